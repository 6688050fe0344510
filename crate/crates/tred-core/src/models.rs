//! Builders for the four reference experiments: the random stable linear
//! testbed, the dephasing spin-boson model, the dissipative central spin
//! model, and the Ising chain with the diagonal projector. Paper parameter
//! values are the defaults throughout.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::linalg::{c, kron, op_norm, CMatrix, CVector};
use crate::reduction::ProjectorFactorization;
use crate::superop::{thermal_state, LindbladSpec};

/// Single-qubit operators used by every spin model.
pub mod pauli {
    use super::*;

    pub fn identity() -> CMatrix {
        CMatrix::identity(2, 2)
    }

    pub fn x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
    }

    pub fn y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
    }

    pub fn z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
    }

    /// Lowering operator `σ₋ = ½(σ_x − iσ_y) = |0⟩⟨1|`.
    pub fn minus() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)])
    }

    /// `|+⟩⟨+|`.
    pub fn plus_projector() -> CMatrix {
        CMatrix::from_element(2, 2, c(0.5, 0.0))
    }

    /// Embeds a single-qubit operator at `site` of an `n_sites` register
    /// (site 0 is the leftmost tensor factor).
    pub fn on_site(op: &CMatrix, site: usize, n_sites: usize) -> CMatrix {
        let mut out = CMatrix::identity(1, 1);
        for s in 0..n_sites {
            let factor = if s == site {
                op.clone()
            } else {
                CMatrix::identity(2, 2)
            };
            out = kron(&out, &factor);
        }
        out
    }
}

/// Random uniformly-stable testbed: `L = ½ B/‖B‖_op` with
/// `B = A − ρ(A)·I` for a uniform random `A`, together with the coordinate
/// projector `R = [I_m | 0]`, `J = Rᵀ`.
///
/// `L` has operator norm exactly ½ and spectrum in the closed left
/// half-plane (the spectral radius of a positive matrix is an eigenvalue).
pub fn linear_testbed(n: usize, m: usize, seed: u64) -> Result<(CMatrix, ProjectorFactorization)> {
    if m == 0 || m >= n {
        return Err(Error::InvalidParameter(format!(
            "linear_testbed: need 1 <= m < n, got m = {m}, n = {n}"
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let a = DMatrix::<f64>::from_fn(n, n, |_, _| rng.random::<f64>());
    let spectral_radius = a
        .complex_eigenvalues()
        .iter()
        .map(|ev| ev.norm())
        .fold(0.0, f64::max);
    let b = &a - DMatrix::<f64>::identity(n, n) * spectral_radius;
    let b_c = CMatrix::from_fn(n, n, |i, j| c(b[(i, j)], 0.0));
    let l = &b_c * c(0.5 / op_norm(&b_c), 0.0);
    let r = CMatrix::from_fn(m, n, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) });
    let j = r.transpose();
    Ok((l, ProjectorFactorization::new(r, j)?))
}

/// Parameters of the dephasing spin-boson model.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinBosonParams {
    /// Qubit splitting `g` in `H_S = (g/2)σ_z`.
    pub qubit_splitting: f64,
    /// Bath cutoff frequency of the spectral density.
    pub cutoff_frequency: f64,
    /// Overall amplitude of the spectral density.
    pub spectral_amplitude: f64,
    /// Ohmicity exponent: sub-Ohmic < 1, Ohmic = 1, super-Ohmic > 1.
    pub ohmicity: f64,
    /// Inverse temperature of the bath.
    pub inverse_temperature: f64,
    /// Number of bath modes, frequencies `k/n_modes`, `k = 1…n_modes`.
    pub n_modes: usize,
    /// Coarse-graining time of the comparison model.
    pub coarse_grain_time: f64,
}

impl Default for SpinBosonParams {
    fn default() -> Self {
        Self {
            qubit_splitting: 1.8,
            cutoff_frequency: 0.2,
            spectral_amplitude: 0.5,
            ohmicity: 1.0,
            inverse_temperature: 10.0,
            n_modes: 100,
            coarse_grain_time: 32.0 / 0.2,
        }
    }
}

impl SpinBosonParams {
    pub fn validate(&self) -> Result<()> {
        let all_positive = self.qubit_splitting > 0.0
            && self.cutoff_frequency > 0.0
            && self.spectral_amplitude > 0.0
            && self.ohmicity > 0.0
            && self.inverse_temperature > 0.0
            && self.coarse_grain_time > 0.0;
        if !all_positive || self.n_modes == 0 {
            return Err(Error::InvalidParameter(
                "spin-boson parameters must be positive with n_modes >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Bath spectral density `J(ω) = Λ ω_c^{1−s} ω^s e^{−ω/ω_c}`.
    pub fn spectral_density(&self, omega: f64) -> f64 {
        self.spectral_amplitude
            * self.cutoff_frequency.powf(1.0 - self.ohmicity)
            * omega.powf(self.ohmicity)
            * (-omega / self.cutoff_frequency).exp()
    }
}

/// Precomputed mode sums of the spin-boson model: the exact dephasing rate
/// `ξ(t)`, its linearisation slope, and the coarse-grained rate.
#[derive(Debug, Clone)]
pub struct SpinBosonCoefficients {
    omegas: Vec<f64>,
    /// `α_k = 2|λ_k|² coth(βω_k/2)/ω_k²`.
    alphas: Vec<f64>,
    /// Squared couplings `|λ_k|² = J(ω_k)`.
    lambda_sq: Vec<f64>,
    /// Slope of the second-order dissipation rate: `φ = Σ_k α_k ω_k²
    /// = Σ_k 2|λ_k|² coth(βω_k/2)`, the `t → 0` slope of `ξ(t)`.
    pub phi: f64,
    /// `γ(τ) = Σ_k α_k (1 − cos ω_k τ)/τ` at the coarse-graining time.
    pub gamma_cg: f64,
}

impl SpinBosonCoefficients {
    /// Builds the mode sums from an explicit frequency grid and squared
    /// couplings. Frequencies must be nonzero (`α_k` diverges at ω = 0).
    pub fn from_grid(
        omegas: &[f64],
        lambda_sq: &[f64],
        inverse_temperature: f64,
        coarse_grain_time: f64,
    ) -> Result<Self> {
        if omegas.is_empty() || omegas.len() != lambda_sq.len() {
            return Err(Error::InvalidParameter(
                "spin-boson grid: need matching non-empty frequencies and couplings".into(),
            ));
        }
        if omegas.contains(&0.0) {
            return Err(Error::InvalidParameter(
                "spin-boson grid: zero frequency makes the dephasing weight singular".into(),
            ));
        }
        let beta = inverse_temperature;
        let alphas: Vec<f64> = omegas
            .iter()
            .zip(lambda_sq.iter())
            .map(|(&w, &l2)| 2.0 * l2 / (w * w * (beta * w / 2.0).tanh()))
            .collect();
        let phi: f64 = omegas
            .iter()
            .zip(alphas.iter())
            .map(|(&w, &a)| a * w * w)
            .sum();
        let tau = coarse_grain_time;
        let gamma_cg: f64 = omegas
            .iter()
            .zip(alphas.iter())
            .map(|(&w, &a)| a * (1.0 - (w * tau).cos()) / tau)
            .sum();
        Ok(Self {
            omegas: omegas.to_vec(),
            alphas,
            lambda_sq: lambda_sq.to_vec(),
            phi,
            gamma_cg,
        })
    }

    pub fn from_params(params: &SpinBosonParams) -> Result<Self> {
        params.validate()?;
        let n = params.n_modes;
        let omegas: Vec<f64> = (1..=n).map(|k| k as f64 / n as f64).collect();
        let lambda_sq: Vec<f64> = omegas.iter().map(|&w| params.spectral_density(w)).collect();
        Self::from_grid(
            &omegas,
            &lambda_sq,
            params.inverse_temperature,
            params.coarse_grain_time,
        )
    }

    /// Exact dephasing rate `ξ(t) = Σ_k α_k ω_k sin(ω_k t)`.
    pub fn xi(&self, t: f64) -> f64 {
        self.omegas
            .iter()
            .zip(self.alphas.iter())
            .map(|(&w, &a)| a * w * (w * t).sin())
            .sum()
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn lambda_sq(&self) -> &[f64] {
        &self.lambda_sq
    }
}

/// The three 2×2 dephasing models: exact, second-order in time, and
/// coarse-grained, all sharing the Hamiltonian `H_S = (g/2)σ_z`.
#[derive(Debug, Clone)]
pub struct SpinBosonRhs {
    hamiltonian_superop: CMatrix,
    dephasing_superop: CMatrix,
    coeffs: SpinBosonCoefficients,
}

/// Which of the three spin-boson dynamics to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinBosonModel {
    Exact,
    SecondOrder,
    CoarseGrained,
}

impl SpinBosonRhs {
    pub fn new(params: &SpinBosonParams) -> Result<Self> {
        let coeffs = SpinBosonCoefficients::from_params(params)?;
        let h_s = pauli::z() * c(params.qubit_splitting / 2.0, 0.0);
        Ok(Self {
            hamiltonian_superop: crate::superop::hamiltonian_superop(&h_s),
            dephasing_superop: crate::superop::dissipator_superop(&pauli::z()),
            coeffs,
        })
    }

    pub fn coefficients(&self) -> &SpinBosonCoefficients {
        &self.coeffs
    }

    /// Dissipation rate multiplying `D_{σ_z}` at time `t`.
    pub fn rate(&self, model: SpinBosonModel, t: f64) -> f64 {
        match model {
            SpinBosonModel::Exact => self.coeffs.xi(t),
            SpinBosonModel::SecondOrder => self.coeffs.phi * t,
            SpinBosonModel::CoarseGrained => self.coeffs.gamma_cg,
        }
    }

    /// The 4×4 superoperator of the chosen model at time `t`.
    pub fn superop_at(&self, model: SpinBosonModel, t: f64) -> CMatrix {
        &self.hamiltonian_superop + &self.dephasing_superop * c(self.rate(model, t), 0.0)
    }
}

/// Fock-truncated realisation of the spin-boson Hamiltonian for feeding
/// the covariance machinery: each mode keeps occupations
/// `0 … cutoff−1`.
#[derive(Debug, Clone)]
pub struct SpinBosonFockOracle {
    /// Full Hamiltonian on the `2·cutoffⁿ`-dimensional truncated space.
    pub hamiltonian: CMatrix,
    /// Thermal bath state at the model's inverse temperature.
    pub tau: CMatrix,
    /// The fixed decomposition `H = 1⊗H_B + σ_z⊗E₁` as (system, bath)
    /// pairs, in this index order.
    pub parts: Vec<(CMatrix, CMatrix)>,
    pub bath_dim: usize,
}

/// Annihilation operator on a single truncated mode.
fn annihilation(cutoff: usize) -> CMatrix {
    let mut b = CMatrix::zeros(cutoff, cutoff);
    for m in 1..cutoff {
        b[(m - 1, m)] = c((m as f64).sqrt(), 0.0);
    }
    b
}

/// Builds the truncated bosonic Hamiltonian and thermal state. Restricted
/// to few-mode baths since the bath dimension is `cutoffⁿ`.
pub fn spin_boson_fock_oracle(
    params: &SpinBosonParams,
    cutoff: usize,
) -> Result<SpinBosonFockOracle> {
    params.validate()?;
    if params.n_modes > 2 {
        return Err(Error::InvalidParameter(format!(
            "fock oracle: at most 2 modes, got {}",
            params.n_modes
        )));
    }
    if cutoff < 5 {
        return Err(Error::InvalidParameter(format!(
            "fock oracle: cutoff {cutoff} is too small to resolve the thermal tail"
        )));
    }
    let n = params.n_modes;
    let omegas: Vec<f64> = (1..=n).map(|k| k as f64 / n as f64).collect();
    let lambdas: Vec<f64> = omegas
        .iter()
        .map(|&w| params.spectral_density(w).sqrt())
        .collect();
    let bath_dim = cutoff.pow(n as u32);
    // Mode operators on the joint bath space.
    let single = annihilation(cutoff);
    let mode_ops: Vec<CMatrix> = (0..n)
        .map(|k| {
            let mut op = CMatrix::identity(1, 1);
            for s in 0..n {
                let factor = if s == k {
                    single.clone()
                } else {
                    CMatrix::identity(cutoff, cutoff)
                };
                op = kron(&op, &factor);
            }
            op
        })
        .collect();
    let mut h_bath = CMatrix::zeros(bath_dim, bath_dim);
    for (k, b) in mode_ops.iter().enumerate() {
        let number = b.adjoint() * b;
        h_bath +=
            (number + CMatrix::identity(bath_dim, bath_dim) * c(0.5, 0.0)) * c(omegas[k], 0.0);
    }
    // E₁ = (g/2)·1 + Σ_k λ_k (b_k + b_k†) with real couplings λ_k = √J(ω_k).
    let mut coupling = CMatrix::identity(bath_dim, bath_dim) * c(params.qubit_splitting / 2.0, 0.0);
    for (k, b) in mode_ops.iter().enumerate() {
        coupling += (b + b.adjoint()) * c(lambdas[k], 0.0);
    }
    let tau = thermal_state(&h_bath, params.inverse_temperature)?;
    let hamiltonian = kron(&pauli::identity(), &h_bath) + kron(&pauli::z(), &coupling);
    Ok(SpinBosonFockOracle {
        hamiltonian,
        tau,
        parts: vec![(pauli::identity(), h_bath), (pauli::z(), coupling)],
        bath_dim,
    })
}

/// Parameters of the dissipative central spin model.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralSpinParams {
    /// Number of bath spins.
    pub n_bath: usize,
    /// System splitting `δ` in `H_S = δ(σ_x + σ_z)`.
    pub system_splitting: f64,
    /// System–bath coupling strength `λ`.
    pub coupling: f64,
    /// Bath self-interaction strength `γ`.
    pub bath_coupling: f64,
    /// Anisotropies `(A_x, A_y, A_z)` of the coupling.
    pub anisotropy: [f64; 3],
    /// Inverse temperature of the initial bath state.
    pub inverse_temperature: f64,
    /// Dissipation strength `Λ`; zero gives purely Hamiltonian dynamics.
    pub dissipation: f64,
}

impl Default for CentralSpinParams {
    fn default() -> Self {
        Self {
            n_bath: 3,
            system_splitting: 0.3,
            coupling: 0.1,
            bath_coupling: 1.0,
            anisotropy: [1.2, 1.5, 1.3],
            inverse_temperature: 50.0,
            dissipation: 0.0,
        }
    }
}

/// Assembled central spin model: the Lindblad data, the bipartite
/// reduction onto the central qubit, and the factorized initial state.
#[derive(Debug, Clone)]
pub struct CentralSpinModel {
    pub lindblad: LindbladSpec,
    pub factors: ProjectorFactorization,
    /// Full initial state `|+⟩⟨+| ⊗ ρ_B`.
    pub rho0: CMatrix,
    pub d_s: usize,
    pub d_b: usize,
}

/// Builds the central spin model: `H_S = δ(σ_x+σ_z)`,
/// `H_B = (γ/4)(2J_x² − (N_B/2)·1)`,
/// `H_int = (λ/2)(A_x σ_x⊗J_x + A_y σ_y⊗J_y + A_z σ_z⊗J_z)` with
/// `J_u = ½Σ_k σ_u^{(k)}`, noise `L_k = Λσ₋^{(k)}` on each bath spin, and
/// the thermal bath `ρ_B` at inverse temperature β as reference state.
pub fn central_spin_model(params: &CentralSpinParams) -> Result<CentralSpinModel> {
    if params.n_bath == 0 {
        return Err(Error::InvalidParameter(
            "central spin: need at least one bath spin".into(),
        ));
    }
    let nb = params.n_bath;
    let d_s = 2;
    let d_b = 1 << nb;
    let d = d_s * d_b;
    // Collective bath angular momentum J_u = ½ Σ_k σ_u^{(k)} on the bath
    // space alone.
    let collective = |op: &CMatrix| -> CMatrix {
        let mut total = CMatrix::zeros(d_b, d_b);
        for k in 0..nb {
            total += pauli::on_site(op, k, nb);
        }
        total * c(0.5, 0.0)
    };
    let jx = collective(&pauli::x());
    let jy = collective(&pauli::y());
    let jz = collective(&pauli::z());
    let h_s = (pauli::x() + pauli::z()) * c(params.system_splitting, 0.0);
    let h_b = (&jx * &jx * c(2.0, 0.0) - CMatrix::identity(d_b, d_b) * c(nb as f64 / 2.0, 0.0))
        * c(params.bath_coupling / 4.0, 0.0);
    let [ax, ay, az] = params.anisotropy;
    let h_int = (kron(&pauli::x(), &jx) * c(ax, 0.0)
        + kron(&pauli::y(), &jy) * c(ay, 0.0)
        + kron(&pauli::z(), &jz) * c(az, 0.0))
        * c(params.coupling / 2.0, 0.0);
    let hamiltonian =
        kron(&h_s, &CMatrix::identity(d_b, d_b)) + kron(&pauli::identity(), &h_b) + h_int;
    let mut noise = Vec::new();
    if params.dissipation != 0.0 {
        for k in 0..nb {
            let lowering = pauli::on_site(&pauli::minus(), k, nb);
            noise.push(kron(&pauli::identity(), &lowering) * c(params.dissipation, 0.0));
        }
    }
    let lindblad = LindbladSpec::new(hamiltonian, noise)?;
    let rho_b = thermal_state(&h_b, params.inverse_temperature)?;
    let factors = crate::superop::bipartite_factors(d_s, d_b, &rho_b)?;
    let rho0 = kron(&pauli::plus_projector(), &rho_b);
    debug_assert_eq!(rho0.nrows(), d);
    Ok(CentralSpinModel {
        lindblad,
        factors,
        rho0,
        d_s,
        d_b,
    })
}

/// Parameters of the transverse-coupled Ising chain.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingParams {
    pub n_spins: usize,
    /// On-site `σ_z` field strength.
    pub field: f64,
    /// Nearest-neighbour `σ_x σ_x` coupling.
    pub coupling: f64,
}

impl Default for IsingParams {
    fn default() -> Self {
        Self {
            n_spins: 4,
            field: 0.36,
            coupling: 0.3,
        }
    }
}

/// Assembled Ising model with the diagonal (classical) projector.
#[derive(Debug, Clone)]
pub struct IsingModel {
    pub lindblad: LindbladSpec,
    pub factors: ProjectorFactorization,
    /// Initial probability vector `(1, 0, …, 0)` from `ρ₀ = |0…0⟩⟨0…0|`.
    pub p0: CVector,
    pub dim: usize,
}

/// Builds `H = Σ_j h σ_z^{(j)} + A Σ_j σ_x^{(j)} σ_x^{(j+1)}` on an open
/// chain, with the projector onto the computational-basis diagonal.
pub fn ising_chain_model(params: &IsingParams) -> Result<IsingModel> {
    if params.n_spins < 2 {
        return Err(Error::InvalidParameter(
            "ising chain: need at least two spins".into(),
        ));
    }
    let n = params.n_spins;
    let dim = 1 << n;
    let mut h = CMatrix::zeros(dim, dim);
    for j in 0..n {
        h += pauli::on_site(&pauli::z(), j, n) * c(params.field, 0.0);
    }
    for j in 0..n - 1 {
        let xx = pauli::on_site(&pauli::x(), j, n) * pauli::on_site(&pauli::x(), j + 1, n);
        h += xx * c(params.coupling, 0.0);
    }
    let lindblad = LindbladSpec::new(h, vec![])?;
    let factors = crate::superop::diagonal_factors(dim)?;
    let mut p0 = CVector::zeros(dim);
    p0[0] = c(1.0, 0.0);
    Ok(IsingModel {
        lindblad,
        factors,
        p0,
        dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hs_norm, max_abs_entry, to_real_checked};
    use crate::propagation::{integrate_time_dependent, Trajectory};
    use crate::reduction::build_f_terms;
    use crate::superop::{
        classical_generator_checks, classical_generator_from_superop, hamiltonian_superop,
        liouvillian, reduced_hamiltonian, second_order_from_parts, vec_mat,
    };

    #[test]
    fn testbed_norm_and_stability() {
        let (l, proj) = linear_testbed(20, 4, 7).unwrap();
        assert!((op_norm(&l) - 0.5).abs() < 1e-12, "operator norm must be ½");
        // Spectrum in the closed left half-plane.
        let real = to_real_checked(&l, 1e-14).unwrap();
        let max_re = real
            .complex_eigenvalues()
            .iter()
            .map(|ev| ev.re)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(max_re <= 1e-10, "max real part {max_re:.3e}");
        // P = J R is the coordinate projector.
        let p = proj.projector();
        for i in 0..20 {
            for j in 0..20 {
                let expected = if i == j && i < 4 { 1.0 } else { 0.0 };
                assert!((p[(i, j)] - c(expected, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn testbed_is_deterministic() {
        let (l1, _) = linear_testbed(12, 3, 99).unwrap();
        let (l2, _) = linear_testbed(12, 3, 99).unwrap();
        assert_eq!(l1, l2);
        let (l3, _) = linear_testbed(12, 3, 100).unwrap();
        assert!(l1 != l3);
    }

    #[test]
    fn spin_boson_grid_and_rates() {
        let params = SpinBosonParams::default();
        let coeffs = SpinBosonCoefficients::from_params(&params).unwrap();
        assert_eq!(coeffs.omegas().len(), 100);
        assert!((coeffs.omegas()[0] - 0.01).abs() < 1e-15);
        assert!((coeffs.omegas()[99] - 1.0).abs() < 1e-15);
        assert_eq!(coeffs.xi(0.0), 0.0);
        // φ is the slope of ξ at zero.
        let h = 1e-5;
        let slope = coeffs.xi(h) / h;
        assert!(
            (slope - coeffs.phi).abs() < 1e-6 * coeffs.phi,
            "xi'(0) = {slope} vs phi = {}",
            coeffs.phi
        );
    }

    #[test]
    fn spin_boson_single_mode_zero_temperature() {
        // ω = 1, λ = 1, β → ∞: coth → 1, α = 2, ξ(t) = 2 sin t.
        let coeffs = SpinBosonCoefficients::from_grid(&[1.0], &[1.0], 1e9, 1.0).unwrap();
        for &t in &[0.1, 0.5, 2.0] {
            assert!((coeffs.xi(t) - 2.0 * t.sin()).abs() < 1e-7);
        }
        assert!(SpinBosonCoefficients::from_grid(&[0.0], &[1.0], 1.0, 1.0).is_err());
    }

    #[test]
    fn spin_boson_trajectories_preserve_trace_and_hermiticity() {
        let params = SpinBosonParams {
            n_modes: 40,
            ..Default::default()
        };
        let rhs = SpinBosonRhs::new(&params).unwrap();
        let rho0 = pauli::plus_projector();
        for model in [
            SpinBosonModel::Exact,
            SpinBosonModel::SecondOrder,
            SpinBosonModel::CoarseGrained,
        ] {
            let traj =
                integrate_time_dependent(&|t| rhs.superop_at(model, t), &vec_mat(&rho0), 1.5, 600)
                    .unwrap();
            for state in traj.states() {
                let rho = crate::superop::unvec(&state.column(0).into_owned(), 2).unwrap();
                assert!((rho.trace().re - 1.0).abs() < 1e-9);
                assert!(hs_norm(&(&rho - rho.adjoint())) < 1e-9);
            }
        }
    }

    #[test]
    fn fock_oracle_thermal_occupation() {
        // Single mode at βω = 1.5 and 5: tr[τ b†b] matches both the
        // truncated geometric sum (exactly) and the closed form (to the
        // truncation tail).
        for &beta_omega in &[1.5_f64, 5.0] {
            let cutoff = 20;
            let b = annihilation(cutoff);
            let number = b.adjoint() * &b;
            let h = &number + CMatrix::identity(cutoff, cutoff) * c(0.5, 0.0);
            let tau = thermal_state(&(h * c(beta_omega, 0.0)), 1.0).unwrap();
            let measured = (tau * &number).trace().re;
            // Truncated geometric oracle.
            let x = (-beta_omega).exp();
            let z: f64 = (0..cutoff).map(|m| x.powi(m as i32)).sum();
            let s: f64 = (0..cutoff).map(|m| m as f64 * x.powi(m as i32)).sum();
            assert!((measured - s / z).abs() < 1e-12);
            let closed = 1.0 / (beta_omega.exp() - 1.0);
            assert!(
                (measured - closed).abs() < 1e-8,
                "truncation error {:.3e} at βω = {beta_omega}",
                (measured - closed).abs()
            );
        }
    }

    #[test]
    fn fock_oracle_covariance_identities() {
        // Two modes, moderate cutoff: χ₁₀ = 0 and the D_{σ_z} rate of F₂
        // (twice the scalar covariance) equals φ.
        let params = SpinBosonParams {
            n_modes: 2,
            ..Default::default()
        };
        let oracle = spin_boson_fock_oracle(&params, 12).unwrap();
        let cov = second_order_from_parts(&oracle.parts, &oracle.tau).unwrap();
        let chi_10 = cov.chi[(1, 0)].norm();
        assert!(chi_10 < 1e-8, "χ₁₀ = {chi_10:.3e}");
        let coeffs = SpinBosonCoefficients::from_params(&params).unwrap();
        let rate = 2.0 * cov.chi[(1, 1)].re;
        assert!(
            (rate - coeffs.phi).abs() < 1e-6 * coeffs.phi,
            "dephasing rate {rate} vs phi {}",
            coeffs.phi
        );
    }

    #[test]
    fn fock_oracle_reduced_hamiltonian_is_system_hamiltonian() {
        // Ȟ = H_S up to an identity shift.
        let params = SpinBosonParams {
            n_modes: 2,
            ..Default::default()
        };
        let oracle = spin_boson_fock_oracle(&params, 10).unwrap();
        let h_check =
            reduced_hamiltonian(&oracle.hamiltonian, &oracle.tau, 2, oracle.bath_dim).unwrap();
        let h_s = pauli::z() * c(params.qubit_splitting / 2.0, 0.0);
        let shift = (h_check.trace() - h_s.trace()) * c(0.5, 0.0);
        let resid = hs_norm(&(h_check - &h_s - CMatrix::identity(2, 2) * shift));
        assert!(
            resid < 1e-10,
            "Ȟ differs from H_S by more than a shift: {resid:.3e}"
        );
    }

    #[test]
    fn central_spin_dimensions_and_hermiticity() {
        let model = central_spin_model(&CentralSpinParams::default()).unwrap();
        assert_eq!(model.lindblad.dim(), 16);
        assert_eq!(model.d_b, 8);
        let h = model.lindblad.hamiltonian();
        assert!(hs_norm(&(h - h.adjoint())) < 1e-12);
        assert!((model.rho0.trace().re - 1.0).abs() < 1e-12);
        // Purely Hamiltonian: the Liouvillian is anti-Hermitian in the HS
        // inner product.
        assert!(model.lindblad.is_purely_hamiltonian());
        let s = liouvillian(&model.lindblad);
        assert!(hs_norm(&(&s + s.adjoint())) < 1e-10 * hs_norm(&s));
    }

    #[test]
    fn central_spin_with_dissipation_annihilates_trace() {
        let model = central_spin_model(&CentralSpinParams {
            dissipation: 0.8,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(model.lindblad.noise_ops().len(), 3);
        let s = liouvillian(&model.lindblad);
        let omega = vec_mat(&CMatrix::identity(16, 16));
        assert!((s.adjoint() * omega).norm() < 1e-10);
    }

    #[test]
    fn central_spin_first_orders_are_lindblad_type() {
        let params = CentralSpinParams::default();
        let model = central_spin_model(&params).unwrap();
        let s = liouvillian(&model.lindblad);
        let gen = build_f_terms(&s, &model.factors, 1).unwrap();
        for k in 1..=2 {
            let verdict = crate::superop::is_lindblad_type(gen.coeff(k), 1e-9).unwrap();
            assert!(verdict.is_lindblad_type, "F_({k}): {verdict:?}");
        }
        // F₁ is the commutator with the reduced Hamiltonian. Recover the
        // reference ρ_B as the bath marginal of ρ₀ = |+⟩⟨+| ⊗ ρ_B.
        let rho_b = {
            let d_b = model.d_b;
            CMatrix::from_fn(d_b, d_b, |a, b| {
                model.rho0[(a, b)] + model.rho0[(d_b + a, d_b + b)]
            })
        };
        let h_check =
            reduced_hamiltonian(model.lindblad.hamiltonian(), &rho_b, 2, model.d_b).unwrap();
        let expected = hamiltonian_superop(&h_check);
        assert!(hs_norm(&(gen.coeff(1) - &expected)) < 1e-10);
    }

    #[test]
    fn ising_first_and_third_coefficients_vanish() {
        let model = ising_chain_model(&IsingParams::default()).unwrap();
        assert_eq!(model.dim, 16);
        let s = liouvillian(&model.lindblad);
        let gen = build_f_terms(&s, &model.factors, 2).unwrap();
        assert!(max_abs_entry(gen.coeff(1)) < 1e-10, "F_(1) must vanish");
        assert!(max_abs_entry(gen.coeff(3)) < 1e-10, "F_(3) must vanish");
        let f2 = classical_generator_from_superop(gen.coeff(2)).unwrap();
        let verdict = classical_generator_checks(&f2, 1e-10);
        assert!(verdict.passes, "{verdict:?}");
    }

    #[test]
    fn ising_initial_condition() {
        let model = ising_chain_model(&IsingParams::default()).unwrap();
        assert_eq!(model.p0[0], c(1.0, 0.0));
        assert!((1..16).all(|i| model.p0[i] == c(0.0, 0.0)));
        // p0 is the diagonal extraction of |0…0⟩⟨0…0|.
        let mut rho0 = CMatrix::zeros(16, 16);
        rho0[(0, 0)] = c(1.0, 0.0);
        let reduced = model.factors.reduction() * vec_mat(&rho0);
        assert!((reduced - &model.p0).norm() < 1e-15);
    }

    #[test]
    fn trajectory_type_accepts_model_output() {
        // Smoke check that model states and Trajectory plug together.
        let params = SpinBosonParams {
            n_modes: 10,
            ..Default::default()
        };
        let rhs = SpinBosonRhs::new(&params).unwrap();
        let traj: Trajectory = integrate_time_dependent(
            &|t| rhs.superop_at(SpinBosonModel::Exact, t),
            &vec_mat(&pauli::plus_projector()),
            0.5,
            50,
        )
        .unwrap();
        assert_eq!(traj.len(), 51);
    }
}
