//! Splitting a local two-qubit unitary into its one-qubit factors.

use super::{magic_basis, RMat4};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat2, Mat4, C64};

/// Largest entrywise error tolerated in `w₁⊗w₂ ≈ T`.
const FACTOR_TOL: f64 = 1e-8;
const SIGN_TIE: f64 = 1e-12;

/// Factors `M·o·M†` for a real orthogonal `o` into `w₁ ⊗ w₂` with `det w₁ = 1`.
///
/// Of the two preimages `±(w₁, w₂)` the one returned has `w₁[0,0]` with
/// non-negative real part (tie: non-negative imaginary part); when `w₁[0,0]`
/// vanishes the same rule is applied to `w₁[1,0]`.
pub fn factor_local_so4(o: &RMat4) -> Result<(Mat2, Mat2)> {
    let m = magic_basis();
    factor_tensor_product(&(m * linalg::to_complex(o) * m.adjoint()))
}

/// Best rank-one factorization of `t` viewed as a 2×2 array of 2×2 blocks.
pub fn factor_tensor_product(t: &Mat4) -> Result<(Mat2, Mat2)> {
    // t[2i+a, 2j+b] = w1[i,j] * w2[a,b]; the slice with fixed (a,b) is w1 * w2[a,b].
    let slice = |a: usize, b: usize| Mat2::from_fn(|i, j| t[(2 * i + a, 2 * j + b)]);
    let (a, b) = [(0, 0), (0, 1), (1, 0), (1, 1)]
        .into_iter()
        .max_by(|&(a1, b1), &(a2, b2)| slice(a1, b1).norm().total_cmp(&slice(a2, b2).norm()))
        .expect("four candidates");

    let mut w1 = slice(a, b);
    let det = w1.determinant();
    if det.norm() < 1e-12 {
        return Err(Error::NotFactorizable(f64::INFINITY));
    }
    w1 /= det.sqrt();

    let weight: f64 = w1.iter().map(|z| z.norm_sqr()).sum();
    let mut w2 = Mat2::zeros();
    for i in 0..2 {
        for j in 0..2 {
            let block = Mat2::from_fn(|r, k| t[(2 * i + r, 2 * j + k)]);
            w2 += block * w1[(i, j)].conj();
        }
    }
    w2 /= C64::new(weight, 0.0);

    let residual = linalg::max_abs_diff(&linalg::kron(&w1, &w2), t);
    if !(residual <= FACTOR_TOL) {
        return Err(Error::NotFactorizable(residual));
    }

    let key = if w1[(0, 0)].norm() > SIGN_TIE {
        w1[(0, 0)]
    } else {
        w1[(1, 0)]
    };
    let canonical = if key.re.abs() > SIGN_TIE {
        key.re > 0.0
    } else {
        key.im >= -SIGN_TIE
    };
    if !canonical {
        w1 = -w1;
        w2 = -w2;
    }
    Ok((w1, w2))
}
