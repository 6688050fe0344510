//! Coefficients of the polynomial time-dependent reduced generator.
//!
//! Given `ẋ = L x` and a factorized projector `P = J R`, `R J = I`, the
//! reduced generator `F_t = R L M_t⁻¹ J` is analytic in `t`. Its Taylor
//! coefficients `F_(k)` obey the recursion
//!
//! ```text
//!   F_(k) = k · RL^kJ/k!  −  Σ_{h=1}^{k-1} F_(k-h) · RL^hJ/h!
//! ```
//!
//! which is what [`build_f_terms`] evaluates. [`exact_tcl_oracle`] computes
//! `F_t` directly from its integral definition and serves as an independent
//! cross-check of the recursion.

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, condition_1, expm, hs_norm, max_abs_entry, op_norm, quad_fixed_fallible, CMatrix,
};

/// A projector `P = J·R` split into its reduction `R` (m×n) and injection
/// `J` (n×m) factors, with `R·J = I_m`.
#[derive(Debug, Clone)]
pub struct ProjectorFactorization {
    reduction: CMatrix,
    injection: CMatrix,
}

impl ProjectorFactorization {
    /// Validates `R J = I` and `P² = P` (both to 1e-12, entrywise) and
    /// `m ≤ n` before accepting the pair.
    pub fn new(reduction: CMatrix, injection: CMatrix) -> Result<Self> {
        let (m, n) = (reduction.nrows(), reduction.ncols());
        if injection.nrows() != n || injection.ncols() != m {
            return Err(Error::ShapeMismatch {
                op: "ProjectorFactorization::new",
                left: (m, n),
                right: (injection.nrows(), injection.ncols()),
            });
        }
        if m > n {
            return Err(Error::InvalidParameter(format!(
                "reduced dimension m = {m} exceeds full dimension n = {n}"
            )));
        }
        const TOL: f64 = 1e-12;
        let rj = &reduction * &injection;
        let resid = max_abs_entry(&(&rj - CMatrix::identity(m, m)));
        if resid > TOL {
            return Err(Error::InvalidFactorization {
                check: "R J = I",
                residual: resid,
                tol: TOL,
            });
        }
        let p = &injection * &reduction;
        let resid = max_abs_entry(&(&p * &p - &p));
        if resid > TOL {
            return Err(Error::InvalidFactorization {
                check: "P² = P",
                residual: resid,
                tol: TOL,
            });
        }
        Ok(Self {
            reduction,
            injection,
        })
    }

    pub fn reduction(&self) -> &CMatrix {
        &self.reduction
    }

    pub fn injection(&self) -> &CMatrix {
        &self.injection
    }

    /// Reduced dimension `m`.
    pub fn reduced_dim(&self) -> usize {
        self.reduction.nrows()
    }

    /// Full dimension `n`.
    pub fn full_dim(&self) -> usize {
        self.reduction.ncols()
    }

    /// `P = J R`.
    pub fn projector(&self) -> CMatrix {
        &self.injection * &self.reduction
    }

    /// `Q = I − P`.
    pub fn complement(&self) -> CMatrix {
        let n = self.full_dim();
        CMatrix::identity(n, n) - self.projector()
    }
}

/// Coefficient sequence `F_(1) … F_(N+1)` of the polynomial generator
/// `F_{t,N} = Σ_{k=0}^{N} t^k F_(k+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyGenerator {
    coeffs: Vec<CMatrix>,
}

impl PolyGenerator {
    /// Builds from coefficients ordered `F_(1), F_(2), …`; all must share one
    /// square shape and at least `F_(1)` must be present.
    pub fn new(coeffs: Vec<CMatrix>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::InvalidParameter("PolyGenerator needs at least F_(1)".into()))?;
        let m = first.nrows();
        if first.ncols() != m {
            return Err(Error::NotSquare {
                op: "PolyGenerator::new",
                rows: first.nrows(),
                cols: first.ncols(),
            });
        }
        for f in &coeffs {
            if f.nrows() != m || f.ncols() != m {
                return Err(Error::ShapeMismatch {
                    op: "PolyGenerator::new",
                    left: (m, m),
                    right: (f.nrows(), f.ncols()),
                });
            }
        }
        Ok(Self { coeffs })
    }

    /// Polynomial degree `N` (the sequence holds `N+1` coefficients).
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn reduced_dim(&self) -> usize {
        self.coeffs[0].nrows()
    }

    /// `F_(k)`, one-based: `k = 1 ..= N+1`.
    pub fn coeff(&self, k: usize) -> &CMatrix {
        &self.coeffs[k - 1]
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    /// `F_{t,N}(t)` by Horner evaluation; at `t = 0` this is exactly `F_(1)`.
    pub fn evaluate(&self, t: f64) -> CMatrix {
        let mut acc = self.coeffs.last().expect("non-empty").clone();
        for f in self.coeffs.iter().rev().skip(1) {
            acc = acc * c(t, 0.0) + f;
        }
        acc
    }
}

/// Scaled reduced moments `R L^k J / k!` for `k = 0 ..= k_max`.
///
/// Powers are accumulated on the `n×m` block `L^k J / k!`, never on `L^k`
/// itself, so the cost is `O(k_max · n² · m)`.
pub fn reduced_moments(
    l: &CMatrix,
    proj: &ProjectorFactorization,
    k_max: usize,
) -> Result<Vec<CMatrix>> {
    let n = proj.full_dim();
    if l.nrows() != n || l.ncols() != n {
        return Err(Error::ShapeMismatch {
            op: "reduced_moments",
            left: (l.nrows(), l.ncols()),
            right: (n, n),
        });
    }
    let m = proj.reduced_dim();
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(CMatrix::identity(m, m));
    let mut block = proj.injection().clone();
    for k in 1..=k_max {
        block = l * block * c(1.0 / k as f64, 0.0);
        out.push(proj.reduction() * &block);
    }
    Ok(out)
}

/// Coefficients `F_(1) … F_(N+1)` of the polynomial reduced generator of
/// degree `order`, by the moment recursion.
pub fn build_f_terms(
    l: &CMatrix,
    proj: &ProjectorFactorization,
    order: usize,
) -> Result<PolyGenerator> {
    let moments = reduced_moments(l, proj, order + 1)?;
    let mut coeffs: Vec<CMatrix> = Vec::with_capacity(order + 1);
    for k in 1..=order + 1 {
        let mut f = &moments[k] * c(k as f64, 0.0);
        for h in 1..k {
            f -= &coeffs[k - h - 1] * &moments[h];
        }
        coeffs.push(f);
    }
    PolyGenerator::new(coeffs)
}

/// The first three coefficients in closed form:
/// `F₁ = RLJ`, `F₂ = RL²J − (RLJ)²`, `F₃ = ½RL³J − F₂RLJ − ½F₁RL²J`.
///
/// Used as a test oracle against [`build_f_terms`].
pub fn first_terms_closed_form(
    l: &CMatrix,
    proj: &ProjectorFactorization,
) -> Result<(CMatrix, CMatrix, CMatrix)> {
    let n = proj.full_dim();
    if l.nrows() != n || l.ncols() != n {
        return Err(Error::ShapeMismatch {
            op: "first_terms_closed_form",
            left: (l.nrows(), l.ncols()),
            right: (n, n),
        });
    }
    let lj = l * proj.injection();
    let l2j = l * &lj;
    let l3j = l * &l2j;
    let rlj = proj.reduction() * &lj;
    let rl2j = proj.reduction() * &l2j;
    let rl3j = proj.reduction() * &l3j;
    let f1 = rlj.clone();
    let f2 = &rl2j - &rlj * &rlj;
    let f3 = &rl3j * c(0.5, 0.0) - &f2 * &rlj - &f1 * &rl2j * c(0.5, 0.0);
    Ok((f1, f2, f3))
}

/// Condition-number threshold above which `M_t` is declared singular.
pub const RESOLVENT_CONDITION_LIMIT: f64 = 1e12;

/// The exact time-local reduced generator `F_t = R L M_t⁻¹ J` with
/// `M_t = I − ∫₀ᵗ e^{QLQ s} QLP e^{−L s} ds`.
///
/// The integral is evaluated by composite Gauss–Legendre quadrature with the
/// given panel count; accuracy is the caller's responsibility. Negative `t`
/// is accepted (the integral flips sign), which the finite-difference tests
/// rely on; the physical regime is `t ≥ 0`.
///
/// Fails with [`Error::SingularResolvent`] when the 1-norm condition number
/// of `M_t` exceeds [`RESOLVENT_CONDITION_LIMIT`] — the known breakdown of
/// the exact time-local description.
pub fn exact_tcl_oracle(
    l: &CMatrix,
    proj: &ProjectorFactorization,
    t: f64,
    panels: usize,
) -> Result<CMatrix> {
    let n = proj.full_dim();
    if l.nrows() != n || l.ncols() != n {
        return Err(Error::ShapeMismatch {
            op: "exact_tcl_oracle",
            left: (l.nrows(), l.ncols()),
            right: (n, n),
        });
    }
    let p = proj.projector();
    let q = proj.complement();
    let qlq = &q * l * &q;
    let qlp = &q * l * &p;
    let integrand = |s: f64| -> Result<CMatrix> {
        Ok(expm(&(&qlq * c(s, 0.0)))? * &qlp * expm(&(l * c(-s, 0.0)))?)
    };
    let integral = if t >= 0.0 {
        quad_fixed_fallible(integrand, 0.0, t, panels)?
    } else {
        -quad_fixed_fallible(integrand, t, 0.0, panels)?
    };
    let m_t = CMatrix::identity(n, n) - integral;
    let condition = condition_1(&m_t).unwrap_or(f64::INFINITY);
    if condition > RESOLVENT_CONDITION_LIMIT {
        return Err(Error::SingularResolvent { t, condition });
    }
    let minv_j = m_t
        .lu()
        .solve(proj.injection())
        .ok_or(Error::SingularResolvent {
            t,
            condition: f64::INFINITY,
        })?;
    let f_t = proj.reduction() * (l * minv_j);
    if !linalg::is_finite_matrix(&f_t) {
        return Err(Error::NonFinite {
            op: "exact_tcl_oracle",
        });
    }
    Ok(f_t)
}

/// One row of the coefficient-norm table: `‖F_(k)‖` against the matching
/// `‖L‖^k/k!` reference curves.
#[derive(Debug, Clone, PartialEq)]
pub struct NormStudyRow {
    pub k: usize,
    pub f_hs: f64,
    pub f_op: f64,
    pub hs_bound: f64,
    pub op_bound: f64,
}

/// Per-coefficient norm table for the generator, for CSV emission.
pub fn norm_study(gen: &PolyGenerator, l: &CMatrix) -> Vec<NormStudyRow> {
    let l_hs = hs_norm(l);
    let l_op = op_norm(l);
    let mut hs_bound = 1.0;
    let mut op_bound = 1.0;
    gen.coeffs()
        .iter()
        .enumerate()
        .map(|(idx, f)| {
            let k = idx + 1;
            hs_bound *= l_hs / k as f64;
            op_bound *= l_op / k as f64;
            NormStudyRow {
                k,
                f_hs: hs_norm(f),
                f_op: op_norm(f),
                hs_bound,
                op_bound,
            }
        })
        .collect()
}
