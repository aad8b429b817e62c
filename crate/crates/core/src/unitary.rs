//! The protocol unitary `U_ε` acting on a pair of qubits.
//!
//! Basis order is `|00⟩, |01⟩, |10⟩, |11⟩` with the left bit belonging to the
//! kept qubit and the right bit to the qubit that is post-selected on `|0⟩`.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, Mat4, C64};
use crate::state_space::{BlochState, Epsilon};

/// Maximum entrywise deviation of `U†U` from the identity accepted on construction.
pub const UNITARITY_TOL: f64 = 1e-12;

/// A dense 4×4 unitary on (kept qubit, post-selected qubit).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct Unitary4(Mat4);

impl Unitary4 {
    pub fn new(m: Mat4) -> Result<Self> {
        Self::with_tolerance(m, UNITARITY_TOL)
    }

    pub fn with_tolerance(m: Mat4, tol: f64) -> Result<Self> {
        let dev = linalg::unitarity_deviation(&m);
        if dev > tol || !dev.is_finite() {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self(m))
    }

    pub fn identity() -> Self {
        Self(Mat4::identity())
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn into_matrix(self) -> Mat4 {
        self.0
    }

    pub fn is_real(&self) -> bool {
        self.0.iter().all(|z| z.im == 0.0)
    }
}

/// Row-major `[re, im]` pairs; the serialized form of a dense matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawMatrix(pub Vec<Vec<[f64; 2]>>);

impl From<Unitary4> for RawMatrix {
    fn from(u: Unitary4) -> Self {
        RawMatrix(
            (0..4)
                .map(|r| (0..4).map(|k| [u.0[(r, k)].re, u.0[(r, k)].im]).collect())
                .collect(),
        )
    }
}

impl TryFrom<RawMatrix> for Unitary4 {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        if raw.0.len() != 4 || raw.0.iter().any(|row| row.len() != 4) {
            return Err(Error::NotUnitary(f64::NAN));
        }
        Unitary4::with_tolerance(Mat4::from_fn(|r, k| c(raw.0[r][k][0], raw.0[r][k][1])), 1e-9)
    }
}

/// The entangling unitary of the protocol, built from `ε` directly:
///
/// ```text
/// ⎛ ε       −s/√2   s/√2   0 ⎞
/// ⎜ 0        1/√2   1/√2   0 ⎟     s = √(1 − ε²)
/// ⎜ 0        0      0      1 ⎟
/// ⎝ s        ε/√2  −ε/√2   0 ⎠
/// ```
pub fn build_u_epsilon(eps: Epsilon) -> Unitary4 {
    let e = eps.value();
    let s = eps.complement();
    let h = FRAC_1_SQRT_2;
    #[rustfmt::skip]
    let rows = [
        e,   -h * s, h * s,  0.0,
        0.0,  h,     h,      0.0,
        0.0,  0.0,   0.0,    1.0,
        s,    h * e, -h * e, 0.0,
    ];
    let m = Mat4::from_row_slice(&rows.map(|x| c(x, 0.0)));
    Unitary4::new(m).expect("U_eps is orthogonal for every admissible epsilon")
}

/// Result of one protocol step on a product input `|Φ₀⟩⊗|Φ₀⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairOutcome {
    /// Probability of reading the second qubit as `0`.
    pub prob_q2_is_0: f64,
    /// Normalized state of the first qubit conditioned on that outcome.
    pub kept_state: BlochState,
}

pub fn action_on_pair(eps: Epsilon, state0: &BlochState) -> PairOutcome {
    let u = build_u_epsilon(eps);
    let [a0, a1] = state0.amplitudes();
    let input = nalgebra::Vector4::<C64>::new(a0 * a0, a0 * a1, a1 * a0, a1 * a1);
    let out = u.matrix() * input;
    // second qubit = 0 keeps indices 0 (|00>) and 2 (|10>)
    let (k0, k1) = (out[0], out[2]);
    let prob = k0.norm_sqr() + k1.norm_sqr();
    let kept_state = BlochState::from_amplitudes(k0, k1).unwrap_or_else(BlochState::zero);
    PairOutcome {
        prob_q2_is_0: prob,
        kept_state,
    }
}
