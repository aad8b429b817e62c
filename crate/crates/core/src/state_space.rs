//! Qubit state parameterizations and the protocol map `f(z) = z²/ε`.
//!
//! A pure qubit state `|0⟩ + z|1⟩` (normalized) is identified with the point `z`
//! of the extended complex plane; the Bloch-sphere angles are related to it by
//! stereographic projection, `z = e^{iφ} tan(θ/2)`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Above this modulus an orbit is considered to have escaped to infinity.
pub const ESCAPE_MODULUS: f64 = 1e150;

/// A pure qubit state given by its polar angle `theta ∈ [0, π]` and azimuth
/// `phi ∈ [0, 2π)`. At the poles the azimuth is fixed to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    theta: f64,
    phi: f64,
}

impl BlochState {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) || !phi.is_finite() {
            return Err(Error::ThetaOutOfRange(theta));
        }
        let phi = if theta == 0.0 || theta == PI {
            0.0
        } else {
            normalize_angle(phi)
        };
        Ok(Self { theta, phi })
    }

    /// `|0⟩`
    pub fn zero() -> Self {
        Self { theta: 0.0, phi: 0.0 }
    }

    /// `|1⟩`
    pub fn one() -> Self {
        Self { theta: PI, phi: 0.0 }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Amplitudes `(cos(θ/2), e^{iφ} sin(θ/2))` in the computational basis.
    pub fn amplitudes(&self) -> [C64; 2] {
        let (s, c) = (self.theta / 2.0).sin_cos();
        [C64::new(c, 0.0), C64::from_polar(s, self.phi)]
    }

    /// Recovers the Bloch angles of a (not necessarily normalized) state vector.
    /// Returns `None` for the zero vector.
    pub fn from_amplitudes(a0: C64, a1: C64) -> Option<Self> {
        let (m0, m1) = (a0.norm(), a1.norm());
        if m0 == 0.0 && m1 == 0.0 {
            return None;
        }
        let theta = 2.0 * m1.atan2(m0);
        let phi = if m0 == 0.0 || m1 == 0.0 {
            0.0
        } else {
            (a1 / a0).arg()
        };
        Self::new(theta.clamp(0.0, PI), phi).ok()
    }
}

fn normalize_angle(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// A point of the extended complex plane `ℂ ∪ {∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComplexPoint {
    Finite(C64),
    Infinity,
}

impl ComplexPoint {
    pub fn finite(re: f64, im: f64) -> Self {
        Self::Finite(C64::new(re, im))
    }

    /// Modulus, with `∞` for the point at infinity.
    pub fn modulus(&self) -> f64 {
        match self {
            Self::Finite(z) => z.norm(),
            Self::Infinity => f64::INFINITY,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Self::Infinity)
    }

    fn from_value(z: C64) -> Self {
        if z.re.is_finite() && z.im.is_finite() {
            Self::Finite(z)
        } else {
            Self::Infinity
        }
    }
}

/// The tolerance radius `ε ∈ (0, 1]`, equivalently `α = arccos ε ∈ [0, π/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Epsilon(f64);

impl Epsilon {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value <= 1.0 {
            Ok(Self(value))
        } else {
            Err(Error::EpsilonOutOfRange(value))
        }
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn alpha(&self) -> f64 {
        self.0.acos()
    }

    /// `√(1 − ε²)`, i.e. `sin α`.
    pub fn complement(&self) -> f64 {
        (1.0 - self.0 * self.0).max(0.0).sqrt()
    }
}

impl TryFrom<f64> for Epsilon {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Epsilon> for f64 {
    fn from(eps: Epsilon) -> f64 {
        eps.0
    }
}

/// `z = e^{iφ} tan(θ/2)`; the south pole maps to infinity.
pub fn project_to_plane(state: &BlochState) -> ComplexPoint {
    if state.theta == PI {
        return ComplexPoint::Infinity;
    }
    ComplexPoint::from_value(C64::from_polar((state.theta / 2.0).tan(), state.phi))
}

pub fn lift_to_sphere(z: &ComplexPoint) -> BlochState {
    match z {
        ComplexPoint::Infinity => BlochState::one(),
        ComplexPoint::Finite(z) => {
            let r = z.norm();
            if r == 0.0 {
                return BlochState::zero();
            }
            let theta = 2.0 * r.atan();
            BlochState::new(theta.min(PI), z.arg()).expect("angle within range")
        }
    }
}

/// One protocol step on the complex plane: `f(z) = z²/ε`, `f(∞) = ∞`.
pub fn apply_map(z: &ComplexPoint, eps: Epsilon) -> ComplexPoint {
    match z {
        ComplexPoint::Infinity => ComplexPoint::Infinity,
        ComplexPoint::Finite(z) => ComplexPoint::from_value(z * z / eps.value()),
    }
}

/// The orbit `z₀, f(z₀), …, fⁿ(z₀)` (length `n + 1`). Once an iterate exceeds
/// [`ESCAPE_MODULUS`] the remaining points are the point at infinity.
pub fn iterate_map(z0: &ComplexPoint, eps: Epsilon, n: usize) -> Vec<ComplexPoint> {
    let mut orbit = Vec::with_capacity(n + 1);
    let mut z = *z0;
    orbit.push(z);
    for _ in 0..n {
        z = if z.modulus() > ESCAPE_MODULUS {
            ComplexPoint::Infinity
        } else {
            apply_map(&z, eps)
        };
        orbit.push(z);
    }
    orbit
}

/// Which superattractive fixed point an initial point flows to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basin {
    /// `|z| < ε`: converges to `0`, i.e. to `|0⟩`.
    Origin,
    /// `|z| = ε` within the relative tolerance: the Julia circle.
    Boundary,
    /// `|z| > ε`: escapes to `∞`, i.e. to `|1⟩`.
    Infinity,
}

pub fn basin(z: &ComplexPoint, eps: Epsilon, rel_tol: f64) -> Basin {
    let r = z.modulus();
    let e = eps.value();
    if (r - e).abs() <= rel_tol * e {
        Basin::Boundary
    } else if r < e {
        Basin::Origin
    } else {
        Basin::Infinity
    }
}

/// Kept-qubit state and success probability of the ideal protocol after `n` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdealOutcome {
    pub state: BlochState,
    pub success_probability: f64,
}

/// Closed form of the transformed state
/// `|Φₙ⟩ ∝ ε^{2ⁿ−1} cos^{2ⁿ}(θ₀/2)|0⟩ + e^{i2ⁿφ₀} sin^{2ⁿ}(θ₀/2)|1⟩`
/// together with `pₛ⁽ⁿ⁾ = ε^{2ⁿ⁺¹−2} cos^{2ⁿ⁺¹}(θ₀/2) + sin^{2ⁿ⁺¹}(θ₀/2)`.
pub fn ideal_state_after(state0: &BlochState, eps: Epsilon, n: u32) -> Result<IdealOutcome> {
    if n == 0 {
        return Err(Error::ZeroIterations);
    }
    let m = 2f64.powi(n as i32);
    let e = eps.value();
    let (s, c) = (state0.theta / 2.0).sin_cos();

    let success_probability = e.powf(2.0 * m - 2.0) * c.powf(2.0 * m) + s.powf(2.0 * m);

    // ratio of |1> to |0> amplitude moduli, in log space to survive large n
    let theta = if s == 0.0 {
        0.0
    } else if c == 0.0 {
        PI
    } else {
        let log_ratio = m * s.ln() - (m - 1.0) * e.ln() - m * c.ln();
        2.0 * log_ratio.exp().atan()
    };
    let phi = (m * state0.phi).rem_euclid(TAU);
    Ok(IdealOutcome {
        state: BlochState::new(theta.min(PI), phi)?,
        success_probability,
    })
}
