use std::f64::consts::TAU;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::aggregate::{aggregate, AggregateRow};
use super::band::{classify, sigma, sigma_band, Classification, BAND_SIGMAS};
use super::config::{equally_spaced_phases, Backend, ExperimentConfig, PhiSpacing};
use crate::error::Result;
use crate::simulator::{
    build_protocol_circuit_with, density_probabilities, estimate_theta1, post_select, post_select_exact,
    sample_counts, statevector_probabilities, theta1_from_weights, Circuit, Execution,
};
use crate::state_space::{ideal_state_after, BlochState, Epsilon};

const PHI_STREAM: u64 = 1;
const SHOT_STREAM: u64 = 2;

/// Independent 64-bit value for `(domain, index)` under a master seed: the master seeds a
/// ChaCha20 generator whose stream id is `domain·2³² + index`.
pub fn derive_seed(master: u64, domain: u64, index: u64) -> u64 {
    stream(master, domain, index).next_u64()
}

fn stream(master: u64, domain: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master);
    rng.set_stream((domain << 32) | (index & 0xffff_ffff));
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub index: usize,
    pub epsilon: f64,
    pub theta0: f64,
    pub phi0: f64,
    /// Seed of the shot sampler for this point.
    pub seed: u64,
}

/// φ₀ values used at the θ₀ with index `theta_index`.
pub fn phi_values(config: &ExperimentConfig, theta_index: usize) -> Vec<f64> {
    let n = config.phi0.count;
    match config.phi0.policy {
        PhiSpacing::EquallySpaced => equally_spaced_phases(n),
        PhiSpacing::Random => {
            let mut rng = stream(config.seed, PHI_STREAM, theta_index as u64);
            (0..n).map(|_| rng.random::<f64>() * TAU).collect()
        }
    }
}

/// All `(ε, θ₀, φ₀)` points, ε outermost and φ₀ innermost.
pub fn make_sweep(config: &ExperimentConfig) -> Vec<SweepPoint> {
    let thetas = config.theta0.values();
    let phis: Vec<Vec<f64>> = (0..thetas.len()).map(|i| phi_values(config, i)).collect();
    let mut points = Vec::with_capacity(config.point_count());
    for &epsilon in &config.epsilon {
        for (ti, &theta0) in thetas.iter().enumerate() {
            for &phi0 in &phis[ti] {
                let index = points.len();
                points.push(SweepPoint {
                    index,
                    epsilon,
                    theta0,
                    phi0,
                    seed: derive_seed(config.seed, SHOT_STREAM, index as u64),
                });
            }
        }
    }
    points
}

/// One evaluated sweep point.
///
/// `theta1_*` is the polar angle of the kept qubit after the configured number of
/// iterations. `outcomes` holds the full outcome distribution (relative frequencies, or
/// exact probabilities) for two-qubit circuits and is empty otherwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatRecord {
    pub epsilon: f64,
    pub theta0: f64,
    pub phi0: f64,
    pub shots: u64,
    pub p_ideal: f64,
    pub p_est: f64,
    pub sigma: f64,
    pub band_lo: f64,
    pub band_hi: f64,
    pub classification: Classification,
    pub theta1_ideal: f64,
    pub theta1_est: Option<f64>,
    pub seed: u64,
    pub outcomes: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub records: Vec<StatRecord>,
    pub aggregates: Vec<AggregateRow>,
    pub toolkit_version: &'static str,
}

fn evaluate(config: &ExperimentConfig, circuit: &Circuit, point: &SweepPoint) -> Result<StatRecord> {
    let eps = circuit.epsilon();
    let requested = BlochState::new(point.theta0, point.phi0)?;
    let ideal = ideal_state_after(&requested, eps, config.iterations)?;
    let prepared = config.noise.prepared_state(&requested);
    let width = circuit.qubit_count();
    let probs = match config.backend {
        Backend::Density => density_probabilities(circuit, &prepared.into(), &config.noise)?,
        Backend::Statevector | Backend::GateSequence => {
            let mut p = statevector_probabilities(circuit, &prepared);
            config.noise.apply_readout(&mut p, width);
            p
        }
    };
    let (p_est, theta1_est, distribution) = if config.exact {
        let e = post_select_exact(&probs, circuit);
        (e.p_success, theta1_from_weights(e.p_kept_zero, e.p_kept_one).ok(), probs)
    } else {
        let counts = sample_counts(&probs, width, config.shots, point.seed)?;
        let ps = post_select(&counts, circuit)?;
        (ps.p_success, estimate_theta1(&ps.kept).ok(), counts.frequencies())
    };
    let p_ideal = ideal.success_probability;
    let band = sigma_band(p_ideal, config.shots, BAND_SIGMAS);
    Ok(StatRecord {
        epsilon: point.epsilon,
        theta0: point.theta0,
        phi0: point.phi0,
        shots: config.shots,
        p_ideal,
        p_est,
        sigma: sigma(p_ideal, config.shots),
        band_lo: band.lo,
        band_hi: band.hi,
        classification: classify(p_est, &band),
        theta1_ideal: ideal.state.theta(),
        theta1_est,
        seed: point.seed,
        outcomes: if width == 2 { distribution } else { Vec::new() },
    })
}

/// Simulates, post-selects and classifies every point of the sweep. Points run in
/// parallel; the output order and values do not depend on scheduling.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let execution = match config.backend {
        Backend::GateSequence => Execution::GateSequence,
        _ => Execution::Dense,
    };
    let circuits = config
        .epsilon
        .iter()
        .map(|&e| build_protocol_circuit_with(Epsilon::new(e)?, config.iterations, execution))
        .collect::<Result<Vec<_>>>()?;
    let points = make_sweep(config);
    let per_eps = config.theta0.count * config.phi0.count;
    let records = points
        .par_iter()
        .map(|p| evaluate(config, &circuits[p.index / per_eps], p))
        .collect::<Result<Vec<_>>>()?;
    let aggregates = aggregate(&records);
    Ok(SweepResult {
        config: config.clone(),
        records,
        aggregates,
        toolkit_version: env!("CARGO_PKG_VERSION"),
    })
}
