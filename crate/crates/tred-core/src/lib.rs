//! Time-dependent reduced models for projected linear and quantum dynamics.
//!
//! Given an autonomous model `ẋ = L x` and a fixed projector `P = J R` with
//! `R J = I`, this crate constructs a reduced generator that is polynomial in
//! time,
//!
//! ```text
//!   F_{t,N} = Σ_{k=0}^{N} t^k F_(k+1),
//! ```
//!
//! whose time-ordered propagator matches `R e^{Lt} J` through order `t^N`.
//! The coefficients are produced by a recursion on the reduced moments
//! `R L^k J / k!`, and the propagator of any polynomial generator is itself
//! evaluated by a companion recursion for its series coefficients `E_(k)`.
//!
//! The crate is organised as:
//!
//! - [`linalg`]: dense complex matrices, matrix exponential, Hermitian
//!   eigendecomposition, Gauss–Legendre quadrature;
//! - [`reduction`]: the coefficient recursion and the exact time-local
//!   generator `R L M_t⁻¹ J` used as a cross-validation oracle;
//! - [`propagation`]: series/RK4/exact evaluation of the reduced dynamics
//!   and the truncated-exponential baseline;
//! - [`superop`]: vectorised Lindblad generators, CPTP reduction and
//!   injection maps, positivity and Lindblad-type checkers, and the
//!   second-order covariance structure;
//! - [`models`]: builders for the four reference experiments (random linear
//!   testbed, dephasing spin-boson, dissipative central spin, Ising chain).

pub mod error;
pub mod linalg;
pub mod models;
pub mod propagation;
pub mod reduction;
pub mod superop;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, RMatrix};
