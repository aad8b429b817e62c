use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::circuit::Circuit;
use super::counts::CountsTable;
use crate::error::{Error, Result};

/// Post-selected shots split by the kept qubit's reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct KeptCounts {
    pub zero: u64,
    pub one: u64,
}

impl KeptCounts {
    pub fn total(&self) -> u64 {
        self.zero + self.one
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PostSelection {
    /// `N / M`.
    pub p_success: f64,
    pub successes: u64,
    pub shots: u64,
    pub kept: KeptCounts,
}

/// Joint probabilities of (all discarded qubits read 0, kept qubit reads b).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactPostSelection {
    pub p_success: f64,
    pub p_kept_zero: f64,
    pub p_kept_one: f64,
}

pub fn post_select(counts: &CountsTable, c: &Circuit) -> Result<PostSelection> {
    let w = c.qubit_count();
    if counts.width() != w {
        let bitstring = counts.counts().keys().next().cloned().unwrap_or_default();
        return Err(Error::WidthMismatch { bitstring, width: w });
    }
    let mut kept = KeptCounts::default();
    for (bits, &n) in counts.counts() {
        let success = bits
            .bytes()
            .enumerate()
            .all(|(q, b)| q == c.kept_qubit() || b == b'0');
        if success {
            if bits.as_bytes()[c.kept_qubit()] == b'0' {
                kept.zero += n;
            } else {
                kept.one += n;
            }
        }
    }
    let successes = kept.total();
    Ok(PostSelection {
        p_success: successes as f64 / counts.shots() as f64,
        successes,
        shots: counts.shots(),
        kept,
    })
}

pub fn post_select_exact(probs: &[f64], c: &Circuit) -> ExactPostSelection {
    let p0 = probs[0];
    let p1 = probs[c.kept_mask()];
    ExactPostSelection {
        p_success: p0 + p1,
        p_kept_zero: p0,
        p_kept_one: p1,
    }
}

/// `2·atan(√(w₁/w₀))` from the two kept-qubit weights (counts or probabilities).
pub fn theta1_from_weights(w0: f64, w1: f64) -> Result<f64> {
    if !(w0 >= 0.0 && w1 >= 0.0) || w0 + w1 <= 0.0 {
        return Err(Error::EmptyKeptCounts);
    }
    if w0 == 0.0 {
        return Ok(PI);
    }
    Ok(2.0 * (w1 / w0).sqrt().atan())
}

pub fn estimate_theta1(kept: &KeptCounts) -> Result<f64> {
    theta1_from_weights(kept.zero as f64, kept.one as f64)
}
