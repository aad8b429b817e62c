//! Small dense complex matrices and the handful of operations the rest of the
//! crate needs on them.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity2() -> Mat2 {
    Mat2::identity()
}

/// Pauli matrix σ₁, σ₂ or σ₃ (`index` 1, 2, 3).
pub fn pauli(index: usize) -> Mat2 {
    match index {
        1 => Mat2::new(ZERO, ONE, ONE, ZERO),
        2 => Mat2::new(ZERO, -I, I, ZERO),
        3 => Mat2::new(ONE, ZERO, ZERO, -ONE),
        _ => panic!("pauli index must be 1, 2 or 3, got {index}"),
    }
}

pub fn hadamard() -> Mat2 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Mat2::new(c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0))
}

/// R_i(μ) = exp(−iμσ_i).
pub fn rotation(axis: usize, mu: f64) -> Mat2 {
    identity2() * c(mu.cos(), 0.0) - pauli(axis) * c(0.0, mu.sin())
}

/// R_y(θ) as used for state preparation: cos(θ/2)|0⟩ + sin(θ/2)|1⟩ from |0⟩.
pub fn ry(theta: f64) -> Mat2 {
    let (s, co) = (theta / 2.0).sin_cos();
    Mat2::new(c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0))
}

/// Phase gate P(φ) = diag(1, e^{iφ}).
pub fn phase(phi: f64) -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, C64::from_polar(1.0, phi))
}

/// Kronecker product with the left factor acting on the most significant bit.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

/// CNOT with control on the left (most significant) qubit.
pub fn cnot() -> Mat4 {
    let mut m = Mat4::zeros();
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    m[(2, 3)] = ONE;
    m[(3, 2)] = ONE;
    m
}

pub fn max_abs_diff<const N: usize>(
    a: &nalgebra::SMatrix<C64, N, N>,
    b: &nalgebra::SMatrix<C64, N, N>,
) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Largest entrywise deviation of `u†u` from the identity.
pub fn unitarity_deviation<const N: usize>(u: &nalgebra::SMatrix<C64, N, N>) -> f64 {
    let prod = u.adjoint() * u;
    max_abs_diff(&prod, &nalgebra::SMatrix::<C64, N, N>::identity())
}

/// `1 − |tr(a†b)|/N`; zero exactly when the two unitaries agree up to a global phase.
pub fn phase_insensitive_residual<const N: usize>(
    a: &nalgebra::SMatrix<C64, N, N>,
    b: &nalgebra::SMatrix<C64, N, N>,
) -> f64 {
    let tr = (a.adjoint() * b).trace();
    (1.0 - tr.norm() / N as f64).max(0.0)
}

/// Splits off the real and imaginary parts of a complex 4×4 matrix.
pub fn split_re_im(m: &Mat4) -> (nalgebra::Matrix4<f64>, nalgebra::Matrix4<f64>) {
    (m.map(|z| z.re), m.map(|z| z.im))
}

pub fn to_complex(m: &nalgebra::Matrix4<f64>) -> Mat4 {
    m.map(|x| c(x, 0.0))
}
