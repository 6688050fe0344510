//! Quantum layer: vectorised Lindblad generators, CPTP reduction and
//! injection maps, positivity checkers, and the second-order covariance
//! structure.
//!
//! Everything uses the column-stacking convention
//! `vec(X)[r + c·d] = X[r,c]`, under which `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.
//! Composite system–bath indices are `i·d_B + a` with the system as the
//! leftmost tensor factor.

use crate::error::{Error, Result};
use crate::linalg::{
    c, herm_eig, hs_norm, kron, max_abs_entry, max_imag, to_real_checked, CMatrix, CVector, RMatrix,
};
use crate::propagation::Trajectory;
use crate::reduction::{build_f_terms, ProjectorFactorization};

/// Column-stacking vectorisation.
pub fn vec_mat(x: &CMatrix) -> CVector {
    let (rows, cols) = (x.nrows(), x.ncols());
    CVector::from_fn(rows * cols, |idx, _| x[(idx % rows, idx / rows)])
}

/// Inverse of [`vec_mat`] for a `d×d` matrix.
pub fn unvec(v: &CVector, d: usize) -> Result<CMatrix> {
    if v.nrows() != d * d {
        return Err(Error::InvalidParameter(format!(
            "unvec: length {} is not {d}²",
            v.nrows()
        )));
    }
    Ok(CMatrix::from_fn(d, d, |r, cc| v[r + cc * d]))
}

/// Infers the dimension; fails when the length is not a perfect square.
pub fn unvec_square(v: &CVector) -> Result<CMatrix> {
    let len = v.nrows();
    let d = (len as f64).sqrt().round() as usize;
    if d * d != len {
        return Err(Error::InvalidParameter(format!(
            "unvec: length {len} is not a perfect square"
        )));
    }
    unvec(v, d)
}

/// Superoperator of `X ↦ A X B` under column stacking: `Bᵀ ⊗ A`.
pub fn sandwich_superop(a: &CMatrix, b: &CMatrix) -> CMatrix {
    kron(&b.transpose(), a)
}

/// Superoperator of the commutator part `ρ ↦ −i[H, ρ]`.
pub fn hamiltonian_superop(h: &CMatrix) -> CMatrix {
    let d = h.nrows();
    let id = CMatrix::identity(d, d);
    (sandwich_superop(h, &id) - sandwich_superop(&id, h)) * c(0.0, -1.0)
}

/// Superoperator of the dissipator `D_L(ρ) = LρL† − ½{L†L, ρ}`.
pub fn dissipator_superop(l: &CMatrix) -> CMatrix {
    let d = l.nrows();
    let id = CMatrix::identity(d, d);
    let ldl = l.adjoint() * l;
    sandwich_superop(l, &l.adjoint())
        - (sandwich_superop(&ldl, &id) + sandwich_superop(&id, &ldl)) * c(0.5, 0.0)
}

/// Hamiltonian plus noise operators defining a GKLS generator.
#[derive(Debug, Clone)]
pub struct LindbladSpec {
    hamiltonian: CMatrix,
    noise_ops: Vec<CMatrix>,
}

impl LindbladSpec {
    const HERM_TOL: f64 = 1e-10;

    pub fn new(hamiltonian: CMatrix, noise_ops: Vec<CMatrix>) -> Result<Self> {
        let d = hamiltonian.nrows();
        if hamiltonian.ncols() != d {
            return Err(Error::NotSquare {
                op: "LindbladSpec::new",
                rows: hamiltonian.nrows(),
                cols: hamiltonian.ncols(),
            });
        }
        let dev = hs_norm(&(&hamiltonian - hamiltonian.adjoint()));
        if dev > Self::HERM_TOL * hs_norm(&hamiltonian).max(1.0) {
            return Err(Error::NotHermitian {
                deviation: dev,
                tol: Self::HERM_TOL,
            });
        }
        for l in &noise_ops {
            if l.nrows() != d || l.ncols() != d {
                return Err(Error::ShapeMismatch {
                    op: "LindbladSpec::new",
                    left: (d, d),
                    right: (l.nrows(), l.ncols()),
                });
            }
        }
        Ok(Self {
            hamiltonian,
            noise_ops,
        })
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn noise_ops(&self) -> &[CMatrix] {
        &self.noise_ops
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn is_purely_hamiltonian(&self) -> bool {
        self.noise_ops.iter().all(|l| max_abs_entry(l) == 0.0)
    }

    /// Direct action `ℒ(ρ) = −i[H,ρ] + Σ_k D_{L_k}(ρ)` without
    /// vectorisation; the reference the superoperator matrix is tested
    /// against.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let h = &self.hamiltonian;
        let mut out = (h * rho - rho * h) * c(0.0, -1.0);
        for l in &self.noise_ops {
            let ldl = l.adjoint() * l;
            out += l * rho * l.adjoint() - (&ldl * rho + rho * &ldl) * c(0.5, 0.0);
        }
        out
    }
}

/// Superoperator matrix `S` with `unvec(S vec ρ) = ℒ(ρ)`.
pub fn liouvillian(spec: &LindbladSpec) -> CMatrix {
    let mut s = hamiltonian_superop(spec.hamiltonian());
    for l in spec.noise_ops() {
        s += dissipator_superop(l);
    }
    s
}

/// A validated density matrix: Hermitian, unit trace, positive
/// semidefinite (all to 1e-10).
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    const TOL: f64 = 1e-10;

    pub fn new(matrix: CMatrix) -> Result<Self> {
        let d = matrix.nrows();
        if matrix.ncols() != d {
            return Err(Error::NotSquare {
                op: "DensityMatrix::new",
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        let dev = hs_norm(&(&matrix - matrix.adjoint()));
        if dev > Self::TOL * hs_norm(&matrix).max(1.0) {
            return Err(Error::NotHermitian {
                deviation: dev,
                tol: Self::TOL,
            });
        }
        let tr = matrix.trace();
        if (tr - c(1.0, 0.0)).norm() > Self::TOL {
            return Err(Error::InvalidParameter(format!(
                "density matrix trace {tr} is not 1"
            )));
        }
        let (vals, _) = herm_eig(&matrix)?;
        if vals[0] < -Self::TOL {
            return Err(Error::InvalidParameter(format!(
                "density matrix has negative eigenvalue {:.3e}",
                vals[0]
            )));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Trace norm `Σ|λ_i|` of a Hermitian matrix (differences of density
/// matrices in particular).
pub fn trace_norm_hermitian(a: &CMatrix) -> Result<f64> {
    let (vals, _) = herm_eig(a)?;
    Ok(vals.iter().map(|v| v.abs()).sum())
}

/// Reduction/injection pair for the bipartite projector
/// `P(ρ) = tr_B(ρ) ⊗ τ` in vectorised form: `R` realises the partial trace
/// over the bath, `J` tensors with the reference state `τ`.
///
/// The reference state must be a state: Hermitian, unit trace, positive
/// semidefinite to 1e-10. Strict positivity is the theoretical assumption
/// behind the exact time-local description, but the factor construction
/// itself (`R J = I`, `P² = P`) is exact for any unit-trace `τ`, and
/// low-temperature thermal states are numerically rank-deficient, so only
/// genuine negativity is rejected.
pub fn bipartite_factors(d_s: usize, d_b: usize, tau: &CMatrix) -> Result<ProjectorFactorization> {
    if tau.nrows() != d_b || tau.ncols() != d_b {
        return Err(Error::ShapeMismatch {
            op: "bipartite_factors",
            left: (tau.nrows(), tau.ncols()),
            right: (d_b, d_b),
        });
    }
    let (vals, _) = herm_eig(tau)?;
    if vals[0] < -1e-10 {
        return Err(Error::SingularState {
            min_eigenvalue: vals[0],
        });
    }
    let d = d_s * d_b;
    let one = c(1.0, 0.0);
    // R[(i + j·d_s), (i·d_B + a) + (j·d_B + a)·d] = 1.
    let mut r = CMatrix::zeros(d_s * d_s, d * d);
    for i in 0..d_s {
        for j in 0..d_s {
            for a in 0..d_b {
                let row = i + j * d_s;
                let col = (i * d_b + a) + (j * d_b + a) * d;
                r[(row, col)] = one;
            }
        }
    }
    // J[(i·d_B + a) + (j·d_B + b)·d, (i + j·d_s)] = τ[a,b].
    let mut jm = CMatrix::zeros(d * d, d_s * d_s);
    for i in 0..d_s {
        for j in 0..d_s {
            for a in 0..d_b {
                for b in 0..d_b {
                    let row = (i * d_b + a) + (j * d_b + b) * d;
                    let col = i + j * d_s;
                    jm[(row, col)] = tau[(a, b)];
                }
            }
        }
    }
    ProjectorFactorization::new(r, jm)
}

/// Reduction/injection pair for the projector onto the diagonal:
/// `R` extracts the diagonal of a `d×d` matrix as a vector, `J` embeds a
/// vector as a diagonal matrix.
pub fn diagonal_factors(d: usize) -> Result<ProjectorFactorization> {
    if d == 0 {
        return Err(Error::InvalidParameter(
            "diagonal_factors: dimension must be >= 1".into(),
        ));
    }
    let one = c(1.0, 0.0);
    let mut r = CMatrix::zeros(d, d * d);
    let mut jm = CMatrix::zeros(d * d, d);
    for j in 0..d {
        r[(j, j + j * d)] = one;
        jm[(j + j * d, j)] = one;
    }
    ProjectorFactorization::new(r, jm)
}

/// Gibbs state `e^{−βH} / tr e^{−βH}`, computed on shifted eigenvalues so
/// large `β` cannot overflow.
pub fn thermal_state(h_b: &CMatrix, beta: f64) -> Result<CMatrix> {
    if beta < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "thermal_state: negative inverse temperature {beta}"
        )));
    }
    let (vals, vecs) = herm_eig(h_b)?;
    let lambda_min = vals[0];
    let weights: Vec<f64> = vals
        .iter()
        .map(|&l| (-beta * (l - lambda_min)).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    let d = h_b.nrows();
    let diag = CMatrix::from_diagonal(&CVector::from_iterator(
        d,
        weights.iter().map(|&w| c(w / z, 0.0)),
    ));
    let tau = &vecs * diag * vecs.adjoint();
    // Symmetrise away the last rounding noise.
    Ok((&tau + tau.adjoint()) * c(0.5, 0.0))
}

/// The τ-weighted partial trace `Ȟ = tr_B[(1_S ⊗ τ) H]`.
pub fn reduced_hamiltonian(h: &CMatrix, tau: &CMatrix, d_s: usize, d_b: usize) -> Result<CMatrix> {
    let d = d_s * d_b;
    if h.nrows() != d || h.ncols() != d {
        return Err(Error::ShapeMismatch {
            op: "reduced_hamiltonian",
            left: (h.nrows(), h.ncols()),
            right: (d, d),
        });
    }
    if tau.nrows() != d_b || tau.ncols() != d_b {
        return Err(Error::ShapeMismatch {
            op: "reduced_hamiltonian",
            left: (tau.nrows(), tau.ncols()),
            right: (d_b, d_b),
        });
    }
    Ok(CMatrix::from_fn(d_s, d_s, |i, j| {
        let mut acc = c(0.0, 0.0);
        for a in 0..d_b {
            for b in 0..d_b {
                acc += tau[(a, b)] * h[(i * d_b + b, j * d_b + a)];
            }
        }
        acc
    }))
}

/// Orthonormal Hermitian basis of `d×d` matrices under the
/// Hilbert–Schmidt inner product: `{e_ii}`, `{(e_ij+e_ji)/√2}`,
/// `{i(e_ij−e_ji)/√2}`.
pub fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    let mut basis = Vec::with_capacity(d * d);
    for i in 0..d {
        let mut m = CMatrix::zeros(d, d);
        m[(i, i)] = c(1.0, 0.0);
        basis.push(m);
    }
    let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
    for i in 0..d {
        for j in (i + 1)..d {
            let mut m = CMatrix::zeros(d, d);
            m[(i, j)] = c(inv_sqrt2, 0.0);
            m[(j, i)] = c(inv_sqrt2, 0.0);
            basis.push(m);
            let mut m = CMatrix::zeros(d, d);
            m[(i, j)] = c(0.0, inv_sqrt2);
            m[(j, i)] = c(0.0, -inv_sqrt2);
            basis.push(m);
        }
    }
    basis
}

/// Operator-Schmidt split of a Hermitian bipartite operator:
/// `H = Σ_k S_k ⊗ E_k` with every factor Hermitian and the bath factors
/// mutually orthogonal.
///
/// The system side is expanded in an orthonormal Hermitian basis, whose
/// bath-side coefficients `tr_S[(G_α ⊗ 1)H]` are automatically Hermitian;
/// a real orthogonal rotation (the eigenbasis of the bath-side Gram
/// matrix) then orthogonalises the bath factors, which is the Schmidt form
/// up to how the singular values are distributed between the two sides.
pub fn operator_schmidt_split(
    h: &CMatrix,
    d_s: usize,
    d_b: usize,
) -> Result<Vec<(CMatrix, CMatrix)>> {
    let d = d_s * d_b;
    if h.nrows() != d || h.ncols() != d {
        return Err(Error::ShapeMismatch {
            op: "operator_schmidt_split",
            left: (h.nrows(), h.ncols()),
            right: (d, d),
        });
    }
    let dev = hs_norm(&(h - h.adjoint()));
    if dev > 1e-10 * hs_norm(h).max(1.0) {
        return Err(Error::NotHermitian {
            deviation: dev,
            tol: 1e-10,
        });
    }
    let basis = hermitian_basis(d_s);
    // Bath-side coefficients X_α[a,b] = Σ_{i,k} G_α[i,k] H[k·d_B+a, i·d_B+b].
    let mut coeffs: Vec<CMatrix> = Vec::with_capacity(basis.len());
    for g in &basis {
        let mut x = CMatrix::zeros(d_b, d_b);
        for i in 0..d_s {
            for k in 0..d_s {
                let gik = g[(i, k)];
                if gik == c(0.0, 0.0) {
                    continue;
                }
                for a in 0..d_b {
                    for b in 0..d_b {
                        x[(a, b)] += gik * h[(k * d_b + a, i * d_b + b)];
                    }
                }
            }
        }
        coeffs.push(x);
    }
    // Gram matrix of the bath factors is real symmetric for Hermitian X_α.
    let n = basis.len();
    let gram = RMatrix::from_fn(n, n, |a, b| {
        let mut acc = c(0.0, 0.0);
        for i in 0..d_b {
            for j in 0..d_b {
                acc += coeffs[a][(i, j)].conj() * coeffs[b][(i, j)];
            }
        }
        acc.re
    });
    let eig = nalgebra::SymmetricEigen::new(gram);
    let scale = hs_norm(h).max(1.0);
    let cutoff = (1e-12 * scale).powi(2);
    let mut parts = Vec::new();
    for k in 0..n {
        if eig.eigenvalues[k] <= cutoff {
            continue;
        }
        let mut s_k = CMatrix::zeros(d_s, d_s);
        let mut e_k = CMatrix::zeros(d_b, d_b);
        for alpha in 0..n {
            let w = c(eig.eigenvectors[(alpha, k)], 0.0);
            s_k += &basis[alpha] * w;
            e_k += &coeffs[alpha] * w;
        }
        parts.push((s_k, e_k));
    }
    Ok(parts)
}

/// Second-order structure of a purely Hamiltonian reduction: the
/// covariance matrix `χ(τ)` of the bath factors, its nonnegative rates,
/// the rotated noise operators, and the assembled superoperator of
/// `F_(2)`.
#[derive(Debug, Clone)]
pub struct CovarianceStructure {
    pub system_ops: Vec<CMatrix>,
    /// `χ_{jk} = tr[E_j τ E_k] − tr[τE_j]·tr[τE_k]`; Hermitian PSD.
    pub chi: CMatrix,
    /// Eigenvalues of `χ`, clamped at zero.
    pub rates: Vec<f64>,
    /// `L_h = Σ_j conj(U_{hj}) S_j` for the diagonalising unitary `U`.
    pub lindblad_ops: Vec<CMatrix>,
    /// Superoperator of `F_(2)(µ) = Σ_{jk} χ_{jk} [2S_j µ S_k − {S_k S_j, µ}]`.
    pub f2: CMatrix,
}

/// Tolerance below which a negative `χ` eigenvalue is treated as rounding;
/// anything worse is reported as a positivity violation.
pub const CHI_NEGATIVITY_TOL: f64 = 1e-8;

/// [`second_order_structure`] for a caller-supplied decomposition
/// `H = Σ_k S_k ⊗ E_k` (all factors Hermitian).
pub fn second_order_from_parts(
    parts: &[(CMatrix, CMatrix)],
    tau: &CMatrix,
) -> Result<CovarianceStructure> {
    if parts.is_empty() {
        return Err(Error::InvalidParameter(
            "second_order_from_parts: empty decomposition".into(),
        ));
    }
    let d_s = parts[0].0.nrows();
    let n = parts.len();
    // τE_k once; then c_{jk} = tr[E_j τ E_k] and a_k = tr[τ E_k].
    let tau_e: Vec<CMatrix> = parts.iter().map(|(_, e)| tau * e).collect();
    let a: Vec<f64> = tau_e.iter().map(|te| te.trace().re).collect();
    let mut chi = CMatrix::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let mut c_jk = c(0.0, 0.0);
            let e_j = &parts[j].1;
            let te_k = &tau_e[k];
            for r in 0..e_j.nrows() {
                for s in 0..e_j.ncols() {
                    c_jk += e_j[(r, s)] * te_k[(s, r)];
                }
            }
            chi[(j, k)] = c_jk - c(a[j] * a[k], 0.0);
        }
    }
    let chi = (&chi + chi.adjoint()) * c(0.5, 0.0);
    let (vals, vecs) = herm_eig(&chi)?;
    if vals[0] < -CHI_NEGATIVITY_TOL {
        return Err(Error::IndefiniteCovariance {
            min_eigenvalue: vals[0],
            tol: CHI_NEGATIVITY_TOL,
        });
    }
    let rates: Vec<f64> = vals.iter().map(|&v| v.max(0.0)).collect();
    // U = V† diagonalises χ; L_h = Σ_j conj(U_{hj}) S_j = Σ_j V_{jh} S_j.
    let lindblad_ops: Vec<CMatrix> = (0..n)
        .map(|h_idx| {
            let mut l = CMatrix::zeros(d_s, d_s);
            for j in 0..n {
                l += &parts[j].0 * vecs[(j, h_idx)];
            }
            l
        })
        .collect();
    let id = CMatrix::identity(d_s, d_s);
    let mut f2 = CMatrix::zeros(d_s * d_s, d_s * d_s);
    for j in 0..n {
        for k in 0..n {
            let s_j = &parts[j].0;
            let s_k = &parts[k].0;
            let sks_j = s_k * s_j;
            let term = sandwich_superop(s_j, s_k) * c(2.0, 0.0)
                - sandwich_superop(&sks_j, &id)
                - sandwich_superop(&id, &sks_j);
            f2 += term * chi[(j, k)];
        }
    }
    Ok(CovarianceStructure {
        system_ops: parts.iter().map(|(s, _)| s.clone()).collect(),
        chi,
        rates,
        lindblad_ops,
        f2,
    })
}

/// Second-order covariance structure of `H` with respect to the bath
/// state `τ`, using the automatic operator-Schmidt decomposition.
pub fn second_order_structure(
    h: &CMatrix,
    tau: &CMatrix,
    d_s: usize,
    d_b: usize,
) -> Result<CovarianceStructure> {
    let parts = operator_schmidt_split(h, d_s, d_b)?;
    second_order_from_parts(&parts, tau)
}

/// Builds `F_(2)` twice — through the moment recursion on the vectorised
/// Liouvillian with bipartite factors, and through the covariance
/// structure — and returns the Hilbert–Schmidt norm of the difference.
/// The two constructions are analytically equal for purely Hamiltonian
/// dynamics.
pub fn structural_vs_recursive_f2(
    h: &CMatrix,
    tau: &CMatrix,
    d_s: usize,
    d_b: usize,
) -> Result<f64> {
    let lv = hamiltonian_superop(h);
    let proj = bipartite_factors(d_s, d_b, tau)?;
    let gen = build_f_terms(&lv, &proj, 1)?;
    let structural = second_order_structure(h, tau, d_s, d_b)?;
    Ok(hs_norm(&(gen.coeff(2) - &structural.f2)))
}

/// Choi matrix of a superoperator by index reshuffling:
/// `C[i·d+a, j·d+b] = S[a+b·d, i+j·d]` (unnormalised convention, so the
/// identity map has Choi eigenvalues `{d, 0, …}`).
pub fn choi_from_superop(s: &CMatrix, d: usize) -> Result<CMatrix> {
    if s.nrows() != d * d || s.ncols() != d * d {
        return Err(Error::ShapeMismatch {
            op: "choi_from_superop",
            left: (s.nrows(), s.ncols()),
            right: (d * d, d * d),
        });
    }
    Ok(CMatrix::from_fn(d * d, d * d, |row, col| {
        let (i, a) = (row / d, row % d);
        let (j, b) = (col / d, col % d);
        s[(a + b * d, i + j * d)]
    }))
}

/// Residual of the Hermiticity-preservation symmetry
/// `S[r+cd, r'+c'd] = conj(S[c+rd, c'+r'd])`.
pub fn hermiticity_preservation_residual(s: &CMatrix, d: usize) -> f64 {
    let swap = |idx: usize| -> usize {
        let (r, cc) = (idx % d, idx / d);
        cc + r * d
    };
    let mut worst = 0.0_f64;
    for p in 0..d * d {
        for q in 0..d * d {
            let dev = (s[(p, q)] - s[(swap(p), swap(q))].conj()).norm();
            worst = worst.max(dev);
        }
    }
    worst
}

/// Verdict of the CPTP check with its numerical witnesses.
#[derive(Debug, Clone)]
pub struct CptpVerdict {
    pub is_cptp: bool,
    /// `‖Φ† vec(I) − vec(I)‖`, the trace-preservation defect.
    pub trace_preservation_residual: f64,
    /// Minimum eigenvalue of the (Hermitised) Choi matrix.
    pub min_choi_eigenvalue: f64,
}

/// Checks whether the superoperator `phi` is completely positive and
/// trace preserving, to tolerance `tol`.
pub fn is_cptp_map(phi: &CMatrix, tol: f64) -> Result<CptpVerdict> {
    let d2 = phi.nrows();
    let d = (d2 as f64).sqrt().round() as usize;
    if d * d != d2 || phi.ncols() != d2 {
        return Err(Error::InvalidParameter(format!(
            "is_cptp_map: {d2}x{} is not a superoperator on square matrices",
            phi.ncols()
        )));
    }
    let omega = vec_mat(&CMatrix::identity(d, d));
    let tp_residual = (phi.adjoint() * &omega - &omega).norm();
    let choi = choi_from_superop(phi, d)?;
    let choi = (&choi + choi.adjoint()) * c(0.5, 0.0);
    let (vals, _) = herm_eig(&choi)?;
    let min_choi = vals[0];
    Ok(CptpVerdict {
        is_cptp: tp_residual <= tol && min_choi >= -tol,
        trace_preservation_residual: tp_residual,
        min_choi_eigenvalue: min_choi,
    })
}

/// Verdict of the Lindblad-type check with its numerical witnesses.
#[derive(Debug, Clone)]
pub struct LindbladTypeVerdict {
    pub is_lindblad_type: bool,
    pub hermiticity_residual: f64,
    /// `‖G† vec(I)‖`, the trace-annihilation defect.
    pub trace_annihilation_residual: f64,
    /// Minimum eigenvalue of `Π · Choi(G) · Π` with `Π` projecting
    /// orthogonally to the maximally entangled vector.
    pub min_conditional_choi_eigenvalue: f64,
}

/// Checks whether the superoperator `g` is a Lindblad-type generator:
/// Hermiticity-preserving, trace-annihilating, and conditionally
/// completely positive.
pub fn is_lindblad_type(g: &CMatrix, tol: f64) -> Result<LindbladTypeVerdict> {
    let d2 = g.nrows();
    let d = (d2 as f64).sqrt().round() as usize;
    if d * d != d2 || g.ncols() != d2 {
        return Err(Error::InvalidParameter(format!(
            "is_lindblad_type: {d2}x{} is not a superoperator on square matrices",
            g.ncols()
        )));
    }
    let herm_residual = hermiticity_preservation_residual(g, d);
    let omega = vec_mat(&CMatrix::identity(d, d));
    let ta_residual = (g.adjoint() * &omega).norm();
    let choi = choi_from_superop(g, d)?;
    let choi = (&choi + choi.adjoint()) * c(0.5, 0.0);
    // Π = I − |Ω⟩⟨Ω|/d.
    let proj = CMatrix::identity(d2, d2) - &omega * omega.adjoint() * c(1.0 / d as f64, 0.0);
    let conditional = &proj * choi * &proj;
    let (vals, _) = herm_eig(&conditional)?;
    let min_cond = vals[0];
    Ok(LindbladTypeVerdict {
        is_lindblad_type: herm_residual <= tol && ta_residual <= tol && min_cond >= -tol,
        hermiticity_residual: herm_residual,
        trace_annihilation_residual: ta_residual,
        min_conditional_choi_eigenvalue: min_cond,
    })
}

/// Verdict of the classical (stochastic-semigroup) generator checks.
#[derive(Debug, Clone)]
pub struct ClassicalVerdict {
    pub passes: bool,
    pub is_metzler: bool,
    pub min_off_diagonal: f64,
    pub columns_sum_to_zero: bool,
    pub max_abs_column_sum: f64,
}

/// Metzler and zero-column-sum checks: the classical equivalent of the
/// Lindblad-type conditions. `e^{Ft}` is a stochastic matrix for all
/// `t ≥ 0` exactly when both pass.
pub fn classical_generator_checks(f: &RMatrix, tol: f64) -> ClassicalVerdict {
    let d = f.nrows();
    let mut min_off = f64::INFINITY;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                min_off = min_off.min(f[(i, j)]);
            }
        }
    }
    if d <= 1 {
        min_off = 0.0;
    }
    let max_col_sum = (0..d)
        .map(|j| (0..d).map(|i| f[(i, j)]).sum::<f64>().abs())
        .fold(0.0, f64::max);
    let is_metzler = min_off >= -tol;
    let columns_sum_to_zero = max_col_sum <= tol;
    ClassicalVerdict {
        passes: is_metzler && columns_sum_to_zero,
        is_metzler,
        min_off_diagonal: min_off,
        columns_sum_to_zero,
        max_abs_column_sum: max_col_sum,
    }
}

/// Interpretation of trajectory states for positivity monitoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateSpace {
    /// States are vectorised density matrices; exit means an eigenvalue
    /// below `-tol`.
    VectorizedDensity,
    /// States are probability vectors; exit means an entry below `-tol`.
    Probability,
}

/// First point where a trajectory leaves the physical state set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityExit {
    pub index: usize,
    pub time: f64,
    pub min_value: f64,
}

/// Scans a trajectory for the earliest positivity violation and returns
/// it, or `None` when every state stays physical.
pub fn positivity_exit_detector(
    traj: &Trajectory,
    kind: StateSpace,
    tol: f64,
) -> Result<Option<PositivityExit>> {
    for (idx, state) in traj.states().iter().enumerate() {
        let min_value = match kind {
            StateSpace::Probability => state.iter().map(|z| z.re).fold(f64::INFINITY, f64::min),
            StateSpace::VectorizedDensity => {
                let mat = if state.ncols() == 1 {
                    unvec_square(&state.column(0).into_owned())?
                } else {
                    state.clone()
                };
                let herm = (&mat + mat.adjoint()) * c(0.5, 0.0);
                let (vals, _) = herm_eig(&herm)?;
                vals[0]
            }
        };
        if min_value < -tol {
            return Ok(Some(PositivityExit {
                index: idx,
                time: traj.times()[idx],
                min_value,
            }));
        }
    }
    Ok(None)
}

/// Bloch coordinates `(⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩)` of a qubit state.
pub fn bloch_coordinates(rho: &CMatrix) -> (f64, f64, f64) {
    let sx = (rho[(1, 0)] + rho[(0, 1)]).re;
    let sy = ((rho[(1, 0)] - rho[(0, 1)]) * c(0.0, -1.0)).re;
    let sz = (rho[(0, 0)] - rho[(1, 1)]).re;
    (sx, sy, sz)
}

/// Classical reduced generators are stored as real matrices after checking
/// the imaginary parts are below 1e-10.
pub fn classical_generator_from_superop(f: &CMatrix) -> Result<RMatrix> {
    let mi = max_imag(f);
    if mi > 1e-10 {
        return Err(Error::NotReal {
            max_imag: mi,
            tol: 1e-10,
        });
    }
    to_real_checked(f, 1e-10)
}
