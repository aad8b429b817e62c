//! Closed forms of the joint diagonalization for `U_ε`, with `ε = cos α`.
//!
//! With `s = sin 2α`, `c = cos 2α` and `r = √(8 + s²)`:
//!
//! * squared singular values of `U_R`: `λ± = (4 − s ± r)/8`,
//!   `D = diag(√λ₊, √λ₊, √λ₋, √λ₋)`;
//! * right singular vectors (columns of `X_A`) built from
//!   `y₁ = (3s + r)/(2√2 c)`, `y₂ = (s − r)/(2√2)`, `N_j = √(1 + y_j²)`;
//! * left singular vectors `v_j = U_R x_j / √λ`, normalized by `M_j = |v_j|`;
//! * `U'_I` is block anti-diagonal with entries `r̃/(2M̃₁)` and `r/(2M̃₂)`,
//!   `r̃ = r(r² − rs − 12)/(2√2 c)`, `M̃₁ = 2√(2λ₊) N₁N₂M₂`, `M̃₂ = 2√λ₋ N₁N₂M₄`;
//! * `P = H ⊕ H` and `G = ½ diag(r̃/M̃₁, −r̃/M̃₁, r/M̃₂, −r/M̃₂)`.
//!
//! Everything blows up as `c → 0` (`ε → √2/2`), where `λ₋ → 0`.

use std::f64::consts::SQRT_2;

use super::{assemble, hadamard_sum, DecompositionPath, KakIntermediates, MagicFrame, RMat4};
use crate::state_space::Epsilon;

/// Scalar building blocks of the closed forms.
#[derive(Debug, Clone, Copy)]
pub struct ClosedForms {
    pub sin_2a: f64,
    pub cos_2a: f64,
    pub r: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub y1: f64,
    pub y2: f64,
    pub n1: f64,
    pub n2: f64,
}

impl ClosedForms {
    pub fn new(eps: Epsilon) -> Self {
        let e = eps.value();
        let sin_2a = 2.0 * e * eps.complement();
        let cos_2a = 2.0 * e * e - 1.0;
        let r = (8.0 + sin_2a * sin_2a).sqrt();
        let y1 = (3.0 * sin_2a + r) / (2.0 * SQRT_2 * cos_2a);
        let y2 = (sin_2a - r) / (2.0 * SQRT_2);
        Self {
            sin_2a,
            cos_2a,
            r,
            lambda_plus: (4.0 - sin_2a + r) / 8.0,
            lambda_minus: (4.0 - sin_2a - r) / 8.0,
            y1,
            y2,
            n1: y1.hypot(1.0),
            n2: y2.hypot(1.0),
        }
    }

    /// `(λ₊, λ₋)`
    pub fn lambdas(&self) -> (f64, f64) {
        (self.lambda_plus, self.lambda_minus)
    }

    pub fn singular_values(&self) -> [f64; 4] {
        let (p, m) = (self.lambda_plus.sqrt(), self.lambda_minus.max(0.0).sqrt());
        [p, p, m, m]
    }

    pub fn x_a(&self) -> RMat4 {
        let (y1, y2, n1, n2) = (self.y1, self.y2, self.n1, self.n2);
        #[rustfmt::skip]
        let x = RMat4::new(
            y1 / n1, 0.0,     -1.0 / n1, 0.0,
            0.0,     1.0 / n2, 0.0,      -y2 / n2,
            1.0 / n1, 0.0,     y1 / n1,  0.0,
            0.0,     y2 / n2,  0.0,      1.0 / n2,
        );
        x
    }

    pub fn r_tilde(&self) -> f64 {
        let r = self.r;
        r / (2.0 * SQRT_2 * self.cos_2a) * (r * r - r * self.sin_2a - 12.0)
    }

    /// `(M̃₁, M̃₂)` given the left-singular-vector norms `M₂` and `M₄`.
    pub fn m_tilde(&self, m2: f64, m4: f64) -> (f64, f64) {
        let nn = self.n1 * self.n2;
        (
            2.0 * (2.0 * self.lambda_plus).sqrt() * nn * m2,
            2.0 * self.lambda_minus.sqrt() * nn * m4,
        )
    }
}

/// `(λ₊, λ₋)` for `U_ε`.
pub fn lambdas(eps: Epsilon) -> (f64, f64) {
    ClosedForms::new(eps).lambdas()
}

pub(super) fn joint_diagonalize(frame: &MagicFrame, eps: Epsilon) -> KakIntermediates {
    let forms = ClosedForms::new(eps);
    let x_a = forms.x_a();
    let d = forms.singular_values();

    // U_R x_j = sqrt(lambda) v_j
    let mut v_a = RMat4::zeros();
    let mut norms = [0.0; 4];
    for j in 0..4 {
        let v = frame.u_r * x_a.column(j) / d[j];
        norms[j] = v.norm();
        v_a.set_column(j, &(v / norms[j]));
    }

    let (mt1, mt2) = forms.m_tilde(norms[1], norms[3]);
    let a = forms.r_tilde() / mt1 / 2.0;
    let b = forms.r / mt2 / 2.0;
    #[rustfmt::skip]
    let u_i_prime = RMat4::new(
        0.0, a,   0.0, 0.0,
        a,   0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, b,
        0.0, 0.0, b,   0.0,
    );
    let g = [a, -a, b, -b];

    assemble(
        frame,
        DecompositionPath::Analytic,
        v_a,
        x_a,
        d,
        u_i_prime,
        g,
        hadamard_sum(),
    )
}
