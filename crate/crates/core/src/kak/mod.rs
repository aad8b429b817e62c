//! Magic-basis KAK decomposition of two-qubit unitaries and their synthesis into
//! two CNOTs plus one-qubit gates.
//!
//! The pipeline is
//!
//! 1. [`to_magic_basis`]: normalize to unit determinant and form `U' = M†UM`,
//!    split into real part `U_R` and imaginary part `U_I`;
//! 2. [`joint_diagonalize`]: `U_R = V_A D X_Aᵀ`, `U'_I = V_Aᵀ U_I X_A = P G Pᵀ`,
//!    so that `U' = Q_L (D + iG) Q_R` with `Q_L = V_A P`, `Q_R = Pᵀ X_Aᵀ`;
//! 3. [`extract_k_vector`]: phases `Φ_j = arg(D_jj + iG_jj)` give
//!    `(k₀, k₁, k₂, k₃) = Λ⁻¹ Φ`;
//! 4. [`factor_local_so4`]: the real orthogonal `Q_L`, `Q_R` become
//!    `A₁⊗A₂ = M Q_L M†` and `B₁⊗B₂ = M Q_R M†`;
//! 5. [`canonicalize_and_synthesize`]: rotate `exp(i k·Σ)` into
//!    `exp(−i(h₁σ₁⊗σ₁ + h₂σ₂⊗σ₂))` and emit the two-CNOT circuit.
//!
//! For `U_ε` step 2 has closed forms (see [`analytic`]); a numerical
//! Eckart–Young path handles everything else, including `ε` near `√2/2` where
//! the closed forms are singular.

pub mod analytic;
mod local;
mod numeric;
mod synth;

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::Matrix4;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, Mat2, Mat4, C64, I, ONE, ZERO};
use crate::state_space::Epsilon;
use crate::unitary::{build_u_epsilon, Unitary4};

pub use local::{factor_local_so4, factor_tensor_product};
pub use synth::{
    canonical_form, canonicalize_and_synthesize, interaction, verify_decomposition,
    CanonicalBranch, CanonicalForm, Gate, GateSequence,
};

pub type RMat4 = Matrix4<f64>;

/// Input unitarity tolerance for [`to_magic_basis`].
pub const INPUT_UNITARITY_TOL: f64 = 1e-8;
/// Target residual for reconstructions and synthesized sequences.
pub const SYNTHESIS_TOL: f64 = 1e-9;
/// Half-width of the window around `ε = √2/2` served by the numerical path.
pub const FALLBACK_HALF_WIDTH: f64 = 1e-3;

/// The magic basis
/// ```text
///         ⎛ 1  0  0  i ⎞
/// M = 1/√2⎜ 0  i  1  0 ⎟
///         ⎜ 0  i −1  0 ⎟
///         ⎝ 1  0  0 −i ⎠
/// ```
pub fn magic_basis() -> Mat4 {
    let h = c(FRAC_1_SQRT_2, 0.0);
    #[rustfmt::skip]
    let m = Mat4::new(
        ONE,  ZERO, ZERO, I,
        ZERO, I,    ONE,  ZERO,
        ZERO, I,    -ONE, ZERO,
        ONE,  ZERO, ZERO, -I,
    );
    m * h
}

/// `Λ`: row `j` lists the eigenvalues of `(𝟙, σ₁⊗σ₁, σ₂⊗σ₂, σ₃⊗σ₃)` on the
/// `j`-th magic basis vector, so `Φ = Λ (k₀, k₁, k₂, k₃)ᵀ`.
#[rustfmt::skip]
pub const LAMBDA: [[i8; 4]; 4] = [
    [1,  1, -1,  1],
    [1,  1,  1, -1],
    [1, -1, -1, -1],
    [1, -1,  1,  1],
];

pub fn lambda_matrix() -> RMat4 {
    RMat4::from_fn(|r, k| LAMBDA[r][k] as f64)
}

/// `Λ⁻¹ = Λᵀ/4`.
pub fn lambda_inverse() -> RMat4 {
    lambda_matrix().transpose() / 4.0
}

/// `S = (1/√2)·[[i, −1], [1, −i]]`, the second factor of `M (H⊕H) M† = −iσ₂ ⊗ S`.
pub fn s_matrix() -> Mat2 {
    Mat2::new(I, -ONE, ONE, -I) * c(FRAC_1_SQRT_2, 0.0)
}

/// `H ⊕ H`, the eigenvector matrix of `U'_I` for `U_ε`.
pub fn hadamard_sum() -> RMat4 {
    let h = FRAC_1_SQRT_2;
    #[rustfmt::skip]
    let p = RMat4::new(
        h,  h,  0.0, 0.0,
        h, -h,  0.0, 0.0,
        0.0, 0.0, h,  h,
        0.0, 0.0, h, -h,
    );
    p
}

/// Fixed matrices used throughout the decomposition, gathered for inspection.
#[derive(Debug, Clone)]
pub struct KakConstants {
    pub magic_basis: Mat4,
    pub lambda_matrix: [[i8; 4]; 4],
    pub pauli: [Mat2; 3],
    pub hadamard: Mat2,
    pub s_matrix: Mat2,
}

impl Default for KakConstants {
    fn default() -> Self {
        Self {
            magic_basis: magic_basis(),
            lambda_matrix: LAMBDA,
            pauli: [linalg::pauli(1), linalg::pauli(2), linalg::pauli(3)],
            hadamard: linalg::hadamard(),
            s_matrix: s_matrix(),
        }
    }
}

/// Which route produced the joint diagonalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecompositionPath {
    /// Closed forms for `U_ε`.
    Analytic,
    /// Numerical SVD plus block-wise eigendecomposition.
    Numerical,
}

/// Output of [`to_magic_basis`].
#[derive(Debug, Clone)]
pub struct MagicFrame {
    /// Input scaled to unit determinant.
    pub special: Mat4,
    /// Phase removed by the determinant normalization (`U = e^{i·phase}·special`).
    pub det_phase: f64,
    pub u_prime: Mat4,
    pub u_r: RMat4,
    pub u_i: RMat4,
}

/// Every intermediate of the decomposition, kept for auditing.
#[derive(Debug, Clone)]
pub struct KakIntermediates {
    pub path: DecompositionPath,
    pub det_phase: f64,
    pub u_prime: Mat4,
    pub u_r: RMat4,
    pub u_i: RMat4,
    pub v_a: RMat4,
    pub x_a: RMat4,
    /// Singular values of `U_R` (diagonal of `D`).
    pub d: [f64; 4],
    /// `V_Aᵀ U_I X_A`
    pub u_i_prime: RMat4,
    /// Eigenvalues of `U'_I` (diagonal of `G`).
    pub g: [f64; 4],
    pub p: RMat4,
    pub q_l: RMat4,
    pub q_r: RMat4,
    /// Phases of the diagonal of `D + iG`, after any determinant sign fix-up.
    pub phi: [f64; 4],
}

impl KakIntermediates {
    /// `Q_L diag(e^{iΦ}) Q_R`, which should equal `U'`.
    pub fn magic_reconstruction(&self) -> Mat4 {
        let diag = Mat4::from_diagonal(&nalgebra::Vector4::from_fn(|j, _| {
            C64::from_polar(1.0, self.phi[j])
        }));
        linalg::to_complex(&self.q_l) * diag * linalg::to_complex(&self.q_r)
    }
}

/// `U = (A₁⊗A₂)·exp(i(k₀ + k·Σ))·(B₁⊗B₂)`.
#[derive(Debug, Clone)]
pub struct KakResult {
    pub k0: f64,
    pub k: [f64; 3],
    pub a1: Mat2,
    pub a2: Mat2,
    pub b1: Mat2,
    pub b2: Mat2,
    pub source: Mat4,
    pub intermediates: KakIntermediates,
}

impl KakResult {
    pub fn reconstruct(&self) -> Mat4 {
        linalg::kron(&self.a1, &self.a2)
            * interaction(self.k)
            * linalg::kron(&self.b1, &self.b2)
            * C64::from_polar(1.0, self.k0)
    }

    /// Phase-insensitive distance between the reconstruction and the source.
    pub fn residual(&self) -> f64 {
        linalg::phase_insensitive_residual(&self.reconstruct(), &self.source)
    }
}

/// Determinant normalization and change to the magic basis.
pub fn to_magic_basis(u: &Mat4) -> Result<MagicFrame> {
    let dev = linalg::unitarity_deviation(u);
    if !(dev <= INPUT_UNITARITY_TOL) {
        return Err(Error::NotUnitary(dev));
    }
    // Fourth root of the determinant with the smallest phase.
    let det_phase = u.determinant().arg() / 4.0;
    let special = u * C64::from_polar(1.0, -det_phase);
    let m = magic_basis();
    let u_prime = m.adjoint() * special * m;
    let (u_r, u_i) = linalg::split_re_im(&u_prime);
    Ok(MagicFrame {
        special,
        det_phase,
        u_prime,
        u_r,
        u_i,
    })
}

/// Route selection for [`joint_diagonalize`].
#[derive(Debug, Clone, Copy)]
pub enum PathChoice {
    /// Use the `U_ε` closed forms for this `ε`.
    Analytic(Epsilon),
    Numerical,
}

/// Joint diagonalization of `U_R` and `U_I`.
///
/// An analytic request within [`FALLBACK_HALF_WIDTH`] of `ε = √2/2` is served
/// by the numerical path.
pub fn joint_diagonalize(frame: &MagicFrame, choice: PathChoice) -> Result<KakIntermediates> {
    match choice {
        PathChoice::Analytic(eps) if !in_fallback_window(eps) => {
            Ok(analytic::joint_diagonalize(frame, eps))
        }
        _ => numeric::joint_diagonalize(frame),
    }
}

pub fn in_fallback_window(eps: Epsilon) -> bool {
    (eps.value() - FRAC_1_SQRT_2).abs() < FALLBACK_HALF_WIDTH
}

/// `(k₀, (k₁, k₂, k₃)) = Λ⁻¹ Φ`.
pub fn extract_k_vector(phi: &[f64; 4]) -> (f64, [f64; 3]) {
    let k = lambda_inverse() * nalgebra::Vector4::from_column_slice(phi);
    (k[0], [k[1], k[2], k[3]])
}

/// Shared tail of both paths: local factors from `Q_L`/`Q_R` with determinant
/// fix-ups folded into `Φ₀`.
pub(crate) fn assemble(
    frame: &MagicFrame,
    path: DecompositionPath,
    v_a: RMat4,
    x_a: RMat4,
    d: [f64; 4],
    u_i_prime: RMat4,
    g: [f64; 4],
    p: RMat4,
) -> KakIntermediates {
    let mut q_l = v_a * p;
    let mut q_r = p.transpose() * x_a.transpose();
    let mut phi: [f64; 4] = std::array::from_fn(|j| g[j].atan2(d[j]));
    if q_l.determinant() < 0.0 {
        q_l.column_mut(0).neg_mut();
        phi[0] += PI;
    }
    if q_r.determinant() < 0.0 {
        q_r.row_mut(0).neg_mut();
        phi[0] += PI;
    }
    if phi[0] > PI {
        phi[0] -= 2.0 * PI;
    }
    KakIntermediates {
        path,
        det_phase: frame.det_phase,
        u_prime: frame.u_prime,
        u_r: frame.u_r,
        u_i: frame.u_i,
        v_a,
        x_a,
        d,
        u_i_prime,
        g,
        p,
        q_l,
        q_r,
        phi,
    }
}

fn finish(source: Mat4, inter: KakIntermediates) -> Result<KakResult> {
    let (k0, k) = extract_k_vector(&inter.phi);
    let (a1, a2) = factor_local_so4(&inter.q_l)?;
    let (b1, b2) = factor_local_so4(&inter.q_r)?;
    Ok(KakResult {
        k0: k0 + inter.det_phase,
        k,
        a1,
        a2,
        b1,
        b2,
        source,
        intermediates: inter,
    })
}

/// Generic decomposition through the numerical path.
pub fn decompose(u: &Unitary4) -> Result<KakResult> {
    decompose_matrix(u.matrix(), PathChoice::Numerical)
}

pub fn decompose_matrix(u: &Mat4, choice: PathChoice) -> Result<KakResult> {
    let frame = to_magic_basis(u)?;
    let inter = joint_diagonalize(&frame, choice)?;
    finish(*u, inter)
}

/// Decomposition of `U_ε`, analytic except inside the fallback window.
pub fn decompose_u_epsilon(eps: Epsilon) -> Result<KakResult> {
    let u = build_u_epsilon(eps);
    decompose_matrix(u.matrix(), PathChoice::Analytic(eps))
}

/// `U_ε` straight to its two-CNOT circuit.
pub fn synthesize_u_epsilon(eps: Epsilon) -> Result<GateSequence> {
    let kak = decompose_u_epsilon(eps)?;
    let mut seq = canonicalize_and_synthesize(&kak)?;
    seq.epsilon = Some(eps.value());
    Ok(seq)
}
