//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Incompatible matrix shapes; both shapes are reported.
    #[error("{op}: shape mismatch, left is {0}x{1}, right is {2}x{3}", left.0, left.1, right.0, right.1)]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("{op}: expected a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    /// `‖a − a†‖ > tol · ‖a‖`.
    #[error("matrix is not Hermitian: relative deviation {deviation:.3e} exceeds {tol:.1e}")]
    NotHermitian { deviation: f64, tol: f64 },

    /// `R J = I` or `P² = P` failed at construction.
    #[error("invalid projector factorization: {check} residual {residual:.3e} exceeds {tol:.1e}")]
    InvalidFactorization {
        check: &'static str,
        residual: f64,
        tol: f64,
    },

    /// The memory-kernel resolvent `M_t` is numerically singular; the exact
    /// time-local generator does not exist at this time.
    #[error("M_t is not invertible at t = {t}: 1-norm condition estimate {condition:.3e}")]
    SingularResolvent { t: f64, condition: f64 },

    /// A reference state that must be full rank is not.
    #[error("state is not full rank: minimum eigenvalue {min_eigenvalue:.3e}")]
    SingularState { min_eigenvalue: f64 },

    /// The covariance matrix of the second-order structure came out
    /// indefinite beyond tolerance. For a valid decomposition this would
    /// falsify the positivity of the second-order generator.
    #[error(
        "covariance matrix is indefinite: minimum eigenvalue {min_eigenvalue:.3e} < -{tol:.1e}"
    )]
    IndefiniteCovariance { min_eigenvalue: f64, tol: f64 },

    /// A matrix expected to be real (up to tolerance) has a large imaginary
    /// part.
    #[error("matrix is not real: largest imaginary entry {max_imag:.3e} exceeds {tol:.1e}")]
    NotReal { max_imag: f64, tol: f64 },

    /// A computation produced a NaN or infinity.
    #[error("{op}: non-finite entries in result")]
    NonFinite { op: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
