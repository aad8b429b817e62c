use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::{NoiseSpec, MAX_ITERATIONS_DENSITY, MAX_ITERATIONS_STATEVECTOR};
use crate::state_space::Epsilon;

/// Upper end of the default θ₀ interval.
pub const DEFAULT_THETA_MAX: f64 = 25.0 * PI / 49.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    #[default]
    Statevector,
    Density,
    /// Statevector simulation of the synthesized gate sequence instead of dense `U_ε`.
    GateSequence,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThetaGrid {
    pub count: usize,
    pub start: f64,
    pub end: f64,
}

impl Default for ThetaGrid {
    fn default() -> Self {
        ThetaGrid {
            count: 26,
            start: 0.0,
            end: DEFAULT_THETA_MAX,
        }
    }
}

impl ThetaGrid {
    /// Equally spaced values, both endpoints included.
    pub fn values(&self) -> Vec<f64> {
        linspace(self.start, self.end, self.count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiSpacing {
    /// Equally spaced over `[0, 2π]`, both endpoints included.
    #[default]
    EquallySpaced,
    /// Uniform draws on `[0, 2π)`, one seeded stream per θ₀ shared by every ε.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhiPolicy {
    pub policy: PhiSpacing,
    pub count: usize,
}

impl Default for PhiPolicy {
    fn default() -> Self {
        PhiPolicy {
            policy: PhiSpacing::EquallySpaced,
            count: 25,
        }
    }
}

pub(crate) fn linspace(start: f64, end: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![start],
        _ => {
            let step = (end - start) / (count - 1) as f64;
            (0..count)
                .map(|i| if i == count - 1 { end } else { start + step * i as f64 })
                .collect()
        }
    }
}

pub(crate) fn equally_spaced_phases(count: usize) -> Vec<f64> {
    linspace(0.0, TAU, count)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub epsilon: Vec<f64>,
    pub theta0: ThetaGrid,
    pub phi0: PhiPolicy,
    pub shots: u64,
    pub iterations: u32,
    /// Use exact outcome probabilities in place of sampled frequencies.
    pub exact: bool,
    pub backend: Backend,
    pub seed: u64,
    pub noise: NoiseSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            epsilon: vec![0.6, 0.7, 0.8, 0.9],
            theta0: ThetaGrid::default(),
            phi0: PhiPolicy::default(),
            shots: 1 << 13,
            iterations: 1,
            exact: false,
            backend: Backend::Statevector,
            seed: 0,
            noise: NoiseSpec::none(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.epsilon.is_empty() {
            return bad("epsilon list is empty".into());
        }
        for &e in &self.epsilon {
            Epsilon::new(e).map_err(|err| Error::InvalidConfig(err.to_string()))?;
        }
        let t = &self.theta0;
        if t.count == 0 {
            return bad("theta0.count must be at least 1".into());
        }
        if !(0.0 <= t.start && t.start <= t.end && t.end <= PI) {
            return bad(format!("theta0 interval [{}, {}] must lie within [0, pi]", t.start, t.end));
        }
        if self.phi0.count == 0 {
            return bad("phi0.count must be at least 1".into());
        }
        if self.shots == 0 {
            return bad("shots must be at least 1".into());
        }
        let max = match self.backend {
            Backend::Density => MAX_ITERATIONS_DENSITY,
            _ => MAX_ITERATIONS_STATEVECTOR,
        };
        if !(1..=max).contains(&self.iterations) {
            return bad(format!(
                "iterations = {} outside 1..={max} for the {:?} backend",
                self.iterations, self.backend
            ));
        }
        let width = 1usize << self.iterations;
        self.noise
            .validate(width)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        if self.noise.has_damping() && self.backend != Backend::Density {
            return bad("amplitude damping requires backend = \"density\"".into());
        }
        Ok(())
    }

    pub fn point_count(&self) -> usize {
        self.epsilon.len() * self.theta0.count * self.phi0.count
    }
}
