//! Experiment drivers: each produces a set of CSV files plus entries for
//! the run manifest.

pub mod central_spin;
pub mod ising;
pub mod linear;
pub mod reduce;
pub mod spin_boson;

use tred_core::linalg::{c, expm, CMatrix, CVector};
use tred_core::Result as CoreResult;

/// What a driver hands back for the manifest.
pub struct RunOutputs {
    /// File names written inside the output directory.
    pub files: Vec<String>,
    /// Numerical breakdowns recorded along the way (run keeps going where
    /// possible; partial results stay on disk).
    pub breakdowns: Vec<String>,
    /// Non-fatal diagnostics (series truncation and the like).
    pub warnings: Vec<String>,
}

/// Geometric time grid with `points` entries from `t_min` to `t_max`.
pub fn log_grid(t_min: f64, t_max: f64, points: usize) -> Vec<f64> {
    let (lo, hi) = (t_min.ln(), t_max.ln());
    (0..points)
        .map(|i| (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Exact trajectory of `ẋ = G x` on the uniform grid `t_i = i·Δ`: one
/// matrix exponential of `GΔ`, then repeated application, which is exact
/// at the nodes by the semigroup property.
pub fn exact_vector_trajectory(
    generator: &CMatrix,
    x0: &CVector,
    t_max: f64,
    steps: usize,
) -> CoreResult<Vec<CVector>> {
    let dt = t_max / steps as f64;
    let step = expm(&(generator * c(dt, 0.0)))?;
    let mut states = Vec::with_capacity(steps + 1);
    let mut x = x0.clone();
    states.push(x.clone());
    for _ in 0..steps {
        x = &step * x;
        states.push(x.clone());
    }
    Ok(states)
}

/// Uniform grid times matching [`exact_vector_trajectory`].
pub fn uniform_grid(t_max: f64, steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|i| i as f64 * t_max / steps as f64)
        .collect()
}
