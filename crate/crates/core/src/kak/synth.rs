//! Canonicalization of `exp(i k·Σ)` and the two-CNOT circuit.
//!
//! `U_ε` yields `k₁ = 0` and `k₂, k₃ < 0`, so its entangler is
//! `exp(−i(|k₂|σ₂⊗σ₂ + |k₃|σ₃⊗σ₃))`. Simultaneous rotations `R_i(μ)⊗R_i(μ)`,
//! `R_i(μ) = exp(−iμσ_i)`, permute the Pauli products:
//!
//! * `|k₂| ≥ |k₃|`: `R₃(3π/4)` then `R₁(3π/4)` maps `(0, |k₂|, |k₃|)` to
//!   `(|k₂|, |k₃|, 0)`;
//! * `|k₃| > |k₂|`: `R₂(π/4)` maps it to `(|k₃|, |k₂|, 0)`.
//!
//! The result `exp(−i(h₁σ₁⊗σ₁ + h₂σ₂⊗σ₂))` equals
//! `(w⊗w†)·CNOT·(u₂⊗v₂)·CNOT·(w†⊗w)` with `w = (𝟙 − iσ₁)/√2`,
//! `u₂ = exp(−ih₁σ₁)`, `v₂ = exp(ih₂σ₃)` and the CNOT controlled by qubit 0.
//!
//! Other coefficient vectors with one vanishing component (modulo π/2) are
//! first brought to the `(0, −a, −b)` form with `π/2` shifts and a swap.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use super::{KakResult, SYNTHESIS_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, c, identity2, pauli, rotation, Mat2, Mat4, C64, I, ONE};
use crate::unitary::Unitary4;

/// A component within this distance of a multiple of π/2 counts as vanishing.
const ZERO_COMPONENT_TOL: f64 = 1e-7;
/// `|k₂| ≥ |k₃|` is decided with this slack.
const BRANCH_TIE_TOL: f64 = 1e-12;

/// `exp(i(k₁σ₁⊗σ₁ + k₂σ₂⊗σ₂ + k₃σ₃⊗σ₃))`, built as a product of the commuting
/// factors `cos k_j 𝟙 + i sin k_j σ_j⊗σ_j`.
pub fn interaction(k: [f64; 3]) -> Mat4 {
    (0..3).fold(Mat4::identity(), |acc, j| {
        let s = pauli(j + 1);
        let (sin, cos) = k[j].sin_cos();
        acc * (Mat4::identity() * c(cos, 0.0) + linalg::kron(&s, &s) * c(0.0, sin))
    })
}

/// Which simultaneous rotation reorders the coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CanonicalBranch {
    /// `|k₂| ≥ |k₃|`: `[R₃(3π/4)]^⊗2` followed by `[R₁(3π/4)]^⊗2`.
    ZThenX,
    /// `|k₃| > |k₂|`: `[R₂(π/4)]^⊗2`.
    Y,
}

/// `exp(i k·Σ) = phase · (L₁⊗L₂) · exp(−i(h₁σ₁⊗σ₁ + h₂σ₂⊗σ₂)) · (R₁⊗R₂)`,
/// up to the dropped component `h3`.
#[derive(Debug, Clone)]
pub struct CanonicalForm {
    pub input: [f64; 3],
    /// Coefficients after shifts and swaps, in the `(≈0, ≤0, ≤0)` form.
    pub reduced: [f64; 3],
    /// `h₁ ≥ h₂ ≥ 0`
    pub h: [f64; 2],
    /// The vanishing component that the two-CNOT circuit ignores.
    pub h3: f64,
    pub branch: CanonicalBranch,
    pub phase: C64,
    pub left: (Mat2, Mat2),
    pub right: (Mat2, Mat2),
}

impl CanonicalForm {
    /// The canonical entangler `exp(−i(h₁σ₁⊗σ₁ + h₂σ₂⊗σ₂))`.
    pub fn canonical_entangler(&self) -> Mat4 {
        interaction([-self.h[0], -self.h[1], 0.0])
    }

    pub fn reconstruct(&self) -> Mat4 {
        linalg::kron(&self.left.0, &self.left.1)
            * self.canonical_entangler()
            * linalg::kron(&self.right.0, &self.right.1)
            * self.phase
    }
}

struct Tracker {
    k: [f64; 3],
    phase: C64,
    left: (Mat2, Mat2),
    right: (Mat2, Mat2),
}

impl Tracker {
    /// `k_j → k_j − m·π/2`, compensated by `(iσ_j⊗σ_j)^m` on the right.
    fn shift(&mut self, j: usize, m: i64) {
        if m == 0 {
            return;
        }
        self.k[j] -= m as f64 * FRAC_PI_2;
        if m.rem_euclid(2) == 1 {
            let s = pauli(j + 1);
            self.right = (s * self.right.0, s * self.right.1);
        }
        self.phase *= I.powi(m.rem_euclid(4) as i32);
    }

    /// Conjugation by `R⊗R`: `exp(ik·Σ) = (R⊗R) exp(ik'·Σ) (R†⊗R†)`.
    fn conjugate(&mut self, r: &Mat2) {
        self.left = (self.left.0 * r, self.left.1 * r);
        let rd = r.adjoint();
        self.right = (rd * self.right.0, rd * self.right.1);
    }

    /// Exchanges components `a` and `b` with a rotation about the third axis.
    fn swap(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let axis = 6 - (a + 1) - (b + 1);
        self.conjugate(&rotation(axis, FRAC_PI_4));
        self.k.swap(a, b);
    }
}

fn distance_to_half_pi_lattice(x: f64) -> f64 {
    (x - (x / FRAC_PI_2).round() * FRAC_PI_2).abs()
}

/// Brings `exp(i k·Σ)` to the two-CNOT canonical form. Fails when no component
/// of `k` vanishes modulo π/2 (such gates need three CNOTs).
pub fn canonical_form(k: [f64; 3]) -> Result<CanonicalForm> {
    let mut t = Tracker {
        k,
        phase: ONE,
        left: (identity2(), identity2()),
        right: (identity2(), identity2()),
    };

    let zero = (0..3)
        .min_by(|&a, &b| {
            distance_to_half_pi_lattice(k[a]).total_cmp(&distance_to_half_pi_lattice(k[b]))
        })
        .expect("three components");
    if distance_to_half_pi_lattice(k[zero]) > ZERO_COMPONENT_TOL {
        return Err(Error::NeedsThreeCnots(k));
    }
    for j in 0..3 {
        let m = if j == zero {
            (t.k[j] / FRAC_PI_2).round()
        } else {
            // into (−π/2, 0]
            (t.k[j] / FRAC_PI_2).ceil()
        };
        t.shift(j, m as i64);
    }
    t.swap(0, zero);
    let reduced = t.k;

    let (a2, a3) = (reduced[1].abs(), reduced[2].abs());
    let (branch, h) = if a2 - a3 >= -BRANCH_TIE_TOL {
        t.conjugate(&(rotation(3, 3.0 * FRAC_PI_4) * rotation(1, 3.0 * FRAC_PI_4)));
        (CanonicalBranch::ZThenX, [a2, a3])
    } else {
        t.conjugate(&rotation(2, FRAC_PI_4));
        (CanonicalBranch::Y, [a3, a2])
    };

    Ok(CanonicalForm {
        input: k,
        reduced,
        h,
        h3: reduced[0],
        branch,
        phase: t.phase,
        left: t.left,
        right: t.right,
    })
}

/// One- or two-qubit gate on the pair (qubit 0 is the kept qubit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "GateRepr", try_from = "GateRepr")]
pub enum Gate {
    OneQubit { qubit: usize, matrix: Mat2 },
    Cnot { control: usize, target: usize },
}

impl Gate {
    /// The gate as a 4×4 matrix on qubits (0, 1).
    pub fn matrix(&self) -> Mat4 {
        match self {
            Gate::OneQubit { qubit: 0, matrix } => linalg::kron(matrix, &identity2()),
            Gate::OneQubit { matrix, .. } => linalg::kron(&identity2(), matrix),
            Gate::Cnot { control: 0, .. } => linalg::cnot(),
            Gate::Cnot { .. } => cnot_reversed(),
        }
    }

    pub fn is_cnot(&self) -> bool {
        matches!(self, Gate::Cnot { .. })
    }
}

/// CNOT controlled by qubit 1: `(H⊗H)·CNOT·(H⊗H)`.
fn cnot_reversed() -> Mat4 {
    let h = linalg::hadamard();
    let hh = linalg::kron(&h, &h);
    hh * linalg::cnot() * hh
}

type Entries2 = [[[f64; 2]; 2]; 2];

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind")]
enum GateRepr {
    #[serde(rename = "u1q")]
    OneQubit { qubit: usize, matrix: Entries2 },
    #[serde(rename = "cnot")]
    Cnot { control: usize, target: usize },
}

impl From<Gate> for GateRepr {
    fn from(g: Gate) -> Self {
        match g {
            Gate::OneQubit { qubit, matrix } => GateRepr::OneQubit {
                qubit,
                matrix: std::array::from_fn(|r| {
                    std::array::from_fn(|k| [matrix[(r, k)].re, matrix[(r, k)].im])
                }),
            },
            Gate::Cnot { control, target } => GateRepr::Cnot { control, target },
        }
    }
}

impl TryFrom<GateRepr> for Gate {
    type Error = String;

    fn try_from(r: GateRepr) -> std::result::Result<Self, String> {
        match r {
            GateRepr::OneQubit { qubit, matrix } if qubit < 2 => Ok(Gate::OneQubit {
                qubit,
                matrix: Mat2::from_fn(|i, j| c(matrix[i][j][0], matrix[i][j][1])),
            }),
            GateRepr::Cnot { control, target } if control < 2 && target < 2 && control != target => {
                Ok(Gate::Cnot { control, target })
            }
            _ => Err("gate qubit indices must be 0 or 1 (and distinct for a CNOT)".into()),
        }
    }
}

/// Ordered gate list realizing a two-qubit unitary; gates apply left to right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSequence {
    pub epsilon: Option<f64>,
    pub cnot_count: usize,
    pub branch: CanonicalBranch,
    /// Canonical coefficients `(h₁, h₂)` of the central entangler.
    pub h: [f64; 2],
    /// `U = e^{i·global_phase} · (product of gates)`.
    pub global_phase: f64,
    pub gates: Vec<Gate>,
}

impl GateSequence {
    /// Product of the gates, without the global phase.
    pub fn product(&self) -> Mat4 {
        self.gates
            .iter()
            .fold(Mat4::identity(), |acc, g| g.matrix() * acc)
    }

    pub fn matrix(&self) -> Mat4 {
        self.product() * C64::from_polar(1.0, self.global_phase)
    }
}

/// `1 − |tr(target†·product)|/4`.
pub fn verify_decomposition(seq: &GateSequence, target: &Unitary4) -> f64 {
    linalg::phase_insensitive_residual(target.matrix(), &seq.product())
}

/// Emits `(B̄₁⊗B̄₂) → CNOT → (u₂⊗v₂) → CNOT → (Ā₁⊗Ā₂)`, with the canonicalizing
/// rotations and `w`, `w†` merged into the outer one-qubit gates.
pub fn canonicalize_and_synthesize(kak: &KakResult) -> Result<GateSequence> {
    let cf = canonical_form(kak.k)?;
    let w = (identity2() - pauli(1) * I) * c(FRAC_1_SQRT_2, 0.0);
    let wd = w.adjoint();
    let [h1, h2] = cf.h;

    let gates = vec![
        Gate::OneQubit {
            qubit: 0,
            matrix: wd * cf.right.0 * kak.b1,
        },
        Gate::OneQubit {
            qubit: 1,
            matrix: w * cf.right.1 * kak.b2,
        },
        Gate::Cnot {
            control: 0,
            target: 1,
        },
        Gate::OneQubit {
            qubit: 0,
            matrix: rotation(1, h1),
        },
        Gate::OneQubit {
            qubit: 1,
            matrix: rotation(3, -h2),
        },
        Gate::Cnot {
            control: 0,
            target: 1,
        },
        Gate::OneQubit {
            qubit: 0,
            matrix: kak.a1 * cf.left.0 * w,
        },
        Gate::OneQubit {
            qubit: 1,
            matrix: kak.a2 * cf.left.1 * wd,
        },
    ];
    let seq = GateSequence {
        epsilon: None,
        cnot_count: gates.iter().filter(|g| g.is_cnot()).count(),
        branch: cf.branch,
        h: cf.h,
        global_phase: kak.k0 + cf.phase.arg(),
        gates,
    };

    let residual = linalg::phase_insensitive_residual(&kak.source, &seq.product());
    if !(residual <= SYNTHESIS_TOL) {
        return Err(Error::SynthesisFailed {
            residual,
            diagnostics: Box::new(kak.clone()),
        });
    }
    Ok(seq)
}
