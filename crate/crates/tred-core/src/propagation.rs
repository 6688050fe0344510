//! Evaluation of the reduced dynamics.
//!
//! The time-ordered propagator of a polynomial generator
//! `F_{t,N} = Σ_k t^k F_(k+1)` expands as `Σ_k t^k E_(k)` with
//!
//! ```text
//!   E_(0) = I,   E_(k) = (1/k) Σ_{s=1}^{k} F_(s) E_(k-s),
//! ```
//!
//! using `F_(s) = 0` for `s > N+1`. This module builds that series, sums it,
//! integrates the same dynamics with fixed-step RK4, and provides the exact
//! reference `R e^{Lt} J` plus the truncated-exponential baseline
//! `Σ_{k≤N} t^k RL^kJ/k!` for comparison.

use crate::error::{Error, Result};
use crate::linalg::{c, expm, hs_norm, op_norm, CMatrix, CVector};
use crate::reduction::{reduced_moments, PolyGenerator, ProjectorFactorization};

/// Truncated series `Σ_{k=0}^{K} t^k E_(k)` for the time-ordered
/// propagator of a polynomial generator.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorSeries {
    terms: Vec<CMatrix>,
    source_order: usize,
}

impl PropagatorSeries {
    /// Number of terms beyond `E_(0)`, i.e. `K`.
    pub fn max_power(&self) -> usize {
        self.terms.len() - 1
    }

    /// Degree `N` of the generator the series was built from.
    pub fn source_order(&self) -> usize {
        self.source_order
    }

    /// `E_(k)`, zero-based: `k = 0 ..= K`; `E_(0) = I` exactly.
    pub fn term(&self, k: usize) -> &CMatrix {
        &self.terms[k]
    }

    pub fn terms(&self) -> &[CMatrix] {
        &self.terms
    }
}

/// Series coefficients `E_(0) … E_(K)` of the time-ordered exponential of
/// `gen` by the propagator recursion.
pub fn build_e_terms(gen: &PolyGenerator, k_max: usize) -> Result<PropagatorSeries> {
    if k_max == 0 {
        return Err(Error::InvalidParameter(
            "build_e_terms: K must be >= 1".into(),
        ));
    }
    let m = gen.reduced_dim();
    let n_coeffs = gen.order() + 1;
    let mut terms: Vec<CMatrix> = Vec::with_capacity(k_max + 1);
    terms.push(CMatrix::identity(m, m));
    for k in 1..=k_max {
        let mut acc = CMatrix::zeros(m, m);
        for s in 1..=k.min(n_coeffs) {
            acc += gen.coeff(s) * &terms[k - s];
        }
        terms.push(acc * c(1.0 / k as f64, 0.0));
    }
    Ok(PropagatorSeries {
        terms,
        source_order: gen.order(),
    })
}

/// Series evaluation together with the size of the last retained term,
/// which signals when truncation dominates the result.
#[derive(Debug, Clone)]
pub struct SeriesValue {
    pub value: CMatrix,
    /// `‖t^K E_(K)‖ / ‖value‖`; above `1e-8` the truncation is suspect.
    pub tail_ratio: f64,
}

impl SeriesValue {
    pub fn truncation_suspect(&self) -> bool {
        self.tail_ratio > 1e-8
    }
}

/// Horner evaluation `Σ_{k=0}^{K} t^k E_(k)` with a truncation diagnostic.
pub fn eval_series_diagnostic(series: &PropagatorSeries, t: f64) -> SeriesValue {
    let mut acc = series.terms.last().expect("non-empty").clone();
    let tail_norm = hs_norm(&acc) * t.abs().powi(series.max_power() as i32);
    for e in series.terms.iter().rev().skip(1) {
        acc = acc * c(t, 0.0) + e;
    }
    let scale = hs_norm(&acc);
    let tail_ratio = if scale > 0.0 {
        tail_norm / scale
    } else {
        tail_norm
    };
    SeriesValue {
        value: acc,
        tail_ratio,
    }
}

/// Horner evaluation of the propagator series at time `t`.
pub fn eval_series(series: &PropagatorSeries, t: f64) -> CMatrix {
    eval_series_diagnostic(series, t).value
}

/// A sampled trajectory: strictly increasing times starting at 0, one state
/// per time. States are `m×1` columns for vector dynamics or `m×m` matrices
/// for propagated maps.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<CMatrix>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<CMatrix>) -> Result<Self> {
        if times.is_empty() || times.len() != states.len() {
            return Err(Error::InvalidParameter(
                "trajectory needs matching, non-empty times and states".into(),
            ));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidParameter(
                "trajectory must start at t = 0".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "trajectory times must be strictly increasing".into(),
            ));
        }
        Ok(Self { times, states })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[CMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// One classical RK4 step of `ẏ = F(t) y` where `y` may be a column or a
/// full matrix.
pub(crate) fn rk4_step<F>(f: &F, t: f64, h: f64, y: &CMatrix) -> CMatrix
where
    F: Fn(f64) -> CMatrix,
{
    let f0 = f(t);
    let f_half = f(t + 0.5 * h);
    let f1 = f(t + h);
    let k1 = &f0 * y;
    let k2 = &f_half * (y + &k1 * c(0.5 * h, 0.0));
    let k3 = &f_half * (y + &k2 * c(0.5 * h, 0.0));
    let k4 = &f1 * (y + &k3 * c(h, 0.0));
    y + (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * c(h / 6.0, 0.0)
}

/// Fixed-step RK4 integration of `ż = F(t) z` for an arbitrary
/// time-dependent generator, sampled on the uniform grid
/// `t_i = i · t_max/steps`.
pub fn integrate_time_dependent<F>(
    f: &F,
    z0: &CVector,
    t_max: f64,
    steps: usize,
) -> Result<Trajectory>
where
    F: Fn(f64) -> CMatrix,
{
    if steps == 0 || t_max <= 0.0 {
        return Err(Error::InvalidParameter(
            "integrate: need steps >= 1 and t_max > 0".into(),
        ));
    }
    let h = t_max / steps as f64;
    let mut state = CMatrix::from_column_slice(z0.nrows(), 1, z0.as_slice());
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(state.clone());
    for i in 0..steps {
        let t = i as f64 * h;
        state = rk4_step(f, t, h, &state);
        times.push((i + 1) as f64 * h);
        states.push(state.clone());
    }
    Trajectory::new(times, states)
}

/// Fixed-step RK4 integration of `ż = F_{t,N}(t) z` from `z0`.
pub fn integrate_ltv(
    gen: &PolyGenerator,
    z0: &CVector,
    t_max: f64,
    steps: usize,
) -> Result<Trajectory> {
    if z0.nrows() != gen.reduced_dim() {
        return Err(Error::ShapeMismatch {
            op: "integrate_ltv",
            left: (z0.nrows(), 1),
            right: (gen.reduced_dim(), gen.reduced_dim()),
        });
    }
    integrate_time_dependent(&|t| gen.evaluate(t), z0, t_max, steps)
}

/// Fixed-step RK4 propagation of the full map: solves `U̇ = F_{t,N}(t) U`,
/// `U(0) = I`, and returns `U(t_max)`.
pub fn propagate_map(gen: &PolyGenerator, t_max: f64, steps: usize) -> Result<CMatrix> {
    if steps == 0 || t_max <= 0.0 {
        return Err(Error::InvalidParameter(
            "propagate_map: need steps >= 1 and t_max > 0".into(),
        ));
    }
    let m = gen.reduced_dim();
    let h = t_max / steps as f64;
    let f = |t: f64| gen.evaluate(t);
    let mut u = CMatrix::identity(m, m);
    for i in 0..steps {
        u = rk4_step(&f, i as f64 * h, h, &u);
    }
    Ok(u)
}

/// The exact reduced propagator `R e^{Lt} J`.
pub fn exact_reduced(l: &CMatrix, proj: &ProjectorFactorization, t: f64) -> Result<CMatrix> {
    let e = expm(&(l * c(t, 0.0)))?;
    Ok(proj.reduction() * e * proj.injection())
}

/// Truncated-exponential baseline `Σ_{k=0}^{N} (t^k/k!) R L^k J`.
pub fn taylor_baseline(
    l: &CMatrix,
    proj: &ProjectorFactorization,
    order: usize,
    t: f64,
) -> Result<CMatrix> {
    let moments = reduced_moments(l, proj, order)?;
    let mut acc = moments[order].clone();
    for k in (0..order).rev() {
        acc = acc * c(t, 0.0) + &moments[k];
    }
    Ok(acc)
}

/// How trajectory errors are measured in [`error_curve`].
#[derive(Debug, Clone)]
pub enum ErrorMetric {
    /// Operator norm of the propagator difference.
    PropagatorNorm,
    /// Euclidean norm of the difference applied to a fixed initial state.
    State(CVector),
}

/// Per-time error `‖exact_reduced − eval_series‖` over an ascending grid.
pub fn error_curve(
    l: &CMatrix,
    proj: &ProjectorFactorization,
    gen: &PolyGenerator,
    series_terms: usize,
    grid: &[f64],
    metric: &ErrorMetric,
) -> Result<Vec<(f64, f64)>> {
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "error_curve: grid must be ascending".into(),
        ));
    }
    let series = build_e_terms(gen, series_terms)?;
    let mut out = Vec::with_capacity(grid.len());
    for &t in grid {
        let exact = exact_reduced(l, proj, t)?;
        let approx = eval_series(&series, t);
        let diff = exact - approx;
        let err = match metric {
            ErrorMetric::PropagatorNorm => op_norm(&diff),
            ErrorMetric::State(x0) => (diff * x0).norm(),
        };
        out.push((t, err));
    }
    Ok(out)
}
