use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use super::kernel::apply_one;
use crate::error::{Error, Result};
use crate::state_space::BlochState;

const STOCHASTIC_TOL: f64 = 1e-9;

/// Noise applied around an ideal protocol run.
///
/// `readout[q][reported][true]` is a column-stochastic confusion matrix and `damping[q]`
/// an amplitude-damping probability applied just before measurement. A single entry in
/// either list applies to every qubit; an empty list means no such noise.
/// `prep_overrotation` (κ) mis-prepares the polar angle as `θ + κ·sin φ`, a deliberately
/// φ-dependent error.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    #[serde(default)]
    pub readout: Vec<[[f64; 2]; 2]>,
    #[serde(default)]
    pub damping: Vec<f64>,
    #[serde(default)]
    pub prep_overrotation: f64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self::default()
    }

    /// Symmetric bit flip with probability `q` on every qubit.
    pub fn readout_flip(q: f64) -> Self {
        NoiseSpec {
            readout: vec![[[1.0 - q, q], [q, 1.0 - q]]],
            ..Self::default()
        }
    }

    pub fn damping(gamma: f64) -> Self {
        NoiseSpec {
            damping: vec![gamma],
            ..Self::default()
        }
    }

    pub fn validate(&self, width: usize) -> Result<()> {
        let len_ok = |n: usize| n == 0 || n == 1 || n == width;
        if !len_ok(self.readout.len()) {
            return Err(Error::InvalidNoise(format!(
                "readout lists {} matrices for {width} qubits",
                self.readout.len()
            )));
        }
        if !len_ok(self.damping.len()) {
            return Err(Error::InvalidNoise(format!(
                "damping lists {} values for {width} qubits",
                self.damping.len()
            )));
        }
        for (q, m) in self.readout.iter().enumerate() {
            for t in 0..2 {
                let (a, b) = (m[0][t], m[1][t]);
                if !(a >= 0.0 && b >= 0.0) || (a + b - 1.0).abs() > STOCHASTIC_TOL {
                    return Err(Error::InvalidNoise(format!(
                        "readout matrix {q}: column {t} is not a probability distribution"
                    )));
                }
            }
        }
        if let Some(g) = self.damping.iter().find(|g| !(0.0..=1.0).contains(*g)) {
            return Err(Error::InvalidNoise(format!("damping probability {g} outside [0, 1]")));
        }
        if !self.prep_overrotation.is_finite() {
            return Err(Error::InvalidNoise("prep_overrotation must be finite".into()));
        }
        Ok(())
    }

    pub fn readout_matrix(&self, q: usize) -> Option<Matrix2<f64>> {
        let m = self.readout.get(q).or_else(|| match self.readout.len() {
            1 => self.readout.first(),
            _ => None,
        })?;
        Some(Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1]))
    }

    pub fn damping_for(&self, q: usize) -> f64 {
        match self.damping.len() {
            0 => 0.0,
            1 => self.damping[0],
            _ => self.damping.get(q).copied().unwrap_or(0.0),
        }
    }

    pub fn has_damping(&self) -> bool {
        self.damping.iter().any(|&g| g > 0.0)
    }

    pub fn has_readout(&self) -> bool {
        !self.readout.is_empty()
    }

    pub fn is_noiseless(&self) -> bool {
        !self.has_damping() && !self.has_readout() && self.prep_overrotation == 0.0
    }

    /// The state actually prepared when `state` is requested.
    pub fn prepared_state(&self, state: &BlochState) -> BlochState {
        if self.prep_overrotation == 0.0 {
            return *state;
        }
        let theta = (state.theta() + self.prep_overrotation * state.phi().sin())
            .clamp(0.0, std::f64::consts::PI);
        BlochState::new(theta, state.phi()).expect("clamped angle is valid")
    }

    /// Pushes a distribution over `width`-bit outcomes through the per-qubit confusion.
    pub fn apply_readout(&self, probs: &mut [f64], width: usize) {
        for q in 0..width {
            if let Some(m) = self.readout_matrix(q) {
                apply_one(probs, width, q, &m);
            }
        }
    }
}
