use std::collections::BTreeMap;

use serde::Serialize;

use super::band::{Classification, BAND_SIGMAS};
use super::sweep::StatRecord;
use crate::error::{Error, Result};

/// A φ₀ spread larger than this many σ is flagged as φ₀-dependent error.
pub const PHI_FLAG_SIGMAS: f64 = 5.0;

/// Spread of the success estimate over φ₀ at fixed (ε, θ₀).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiSpread {
    pub range: f64,
    pub std: f64,
}

impl PhiSpread {
    pub fn flagged(&self, sigma: f64) -> bool {
        self.range > PHI_FLAG_SIGMAS * sigma
    }
}

pub fn phi_invariance_stat(records: &[StatRecord]) -> Result<PhiSpread> {
    if records.len() < 2 {
        return Err(Error::InvalidDistribution(
            "phase spread needs at least two records".into(),
        ));
    }
    let p: Vec<f64> = records.iter().map(|r| r.p_est).collect();
    let max = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = p.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(PhiSpread {
        range: max - min,
        std: mean_std(&p).1,
    })
}

/// Mean and population standard deviation.
pub(crate) fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Per-(ε, θ₀) summary over the φ₀ set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub epsilon: f64,
    pub theta0: f64,
    pub count: usize,
    pub p_ideal: f64,
    pub sigma: f64,
    pub p_est_mean: f64,
    pub p_est_std: f64,
    pub p_est_range: f64,
    pub theta1_ideal: f64,
    pub theta1_mean: Option<f64>,
    pub theta1_std: Option<f64>,
    /// Records whose θ₁ estimate is undefined (no post-selected shots).
    pub theta1_missing: usize,
    pub device_errors: usize,
    /// Half-width of the statistical band.
    pub band_half_width: f64,
    /// Mean distance of the estimates outside the band.
    pub out_of_band_excess: f64,
    pub phi_flagged: bool,
}

fn key(r: &StatRecord) -> (u64, u64) {
    // non-negative floats order like their bit patterns
    (r.epsilon.to_bits(), r.theta0.to_bits())
}

pub fn aggregate(records: &[StatRecord]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(u64, u64), Vec<&StatRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(key(r)).or_default().push(r);
    }
    groups
        .into_values()
        .map(|g| {
            let first = g[0];
            let p: Vec<f64> = g.iter().map(|r| r.p_est).collect();
            let (p_mean, p_std) = mean_std(&p);
            let max = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = p.iter().copied().fold(f64::INFINITY, f64::min);
            let t: Vec<f64> = g.iter().filter_map(|r| r.theta1_est).collect();
            let (t_mean, t_std) = if t.is_empty() {
                (None, None)
            } else {
                let (m, s) = mean_std(&t);
                (Some(m), Some(s))
            };
            let excess = g
                .iter()
                .map(|r| (r.band_lo - r.p_est).max(r.p_est - r.band_hi).max(0.0))
                .sum::<f64>()
                / g.len() as f64;
            AggregateRow {
                epsilon: first.epsilon,
                theta0: first.theta0,
                count: g.len(),
                p_ideal: first.p_ideal,
                sigma: first.sigma,
                p_est_mean: p_mean,
                p_est_std: p_std,
                p_est_range: max - min,
                theta1_ideal: first.theta1_ideal,
                theta1_mean: t_mean,
                theta1_std: t_std,
                theta1_missing: g.len() - t.len(),
                device_errors: g
                    .iter()
                    .filter(|r| r.classification == Classification::DeviceError)
                    .count(),
                band_half_width: BAND_SIGMAS * first.sigma,
                out_of_band_excess: excess,
                phi_flagged: g.len() >= 2 && max - min > PHI_FLAG_SIGMAS * first.sigma,
            }
        })
        .collect()
}
