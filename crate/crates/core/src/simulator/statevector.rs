use super::circuit::Circuit;
use super::counts::{sample_counts, CountsTable};
use super::kernel::apply_op;
use crate::error::Result;
use crate::linalg::C64;
use crate::state_space::BlochState;

/// `⊗_q (a₀|0⟩ + a₁|1⟩)` over `width` qubits.
pub(crate) fn product_state(width: usize, amps: [C64; 2]) -> Vec<C64> {
    (0..1usize << width)
        .map(|i| {
            let ones = i.count_ones() as i32;
            amps[0].powi(width as i32 - ones) * amps[1].powi(ones)
        })
        .collect()
}

/// Final statevector with every qubit prepared as `R_y(θ)` then `P(φ)` on `|0⟩`.
pub fn final_statevector(c: &Circuit, input: &BlochState) -> Vec<C64> {
    let w = c.qubit_count();
    let mut v = product_state(w, input.amplitudes());
    for op in c.ops() {
        apply_op(&mut v, w, op, 0, false);
    }
    v
}

pub fn statevector_probabilities(c: &Circuit, input: &BlochState) -> Vec<f64> {
    final_statevector(c, input).iter().map(|a| a.norm_sqr()).collect()
}

pub fn run_statevector(c: &Circuit, input: &BlochState, shots: u64, seed: u64) -> Result<CountsTable> {
    sample_counts(&statevector_probabilities(c, input), c.qubit_count(), shots, seed)
}

/// Kept-qubit state conditioned on every discarded qubit reading 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalState {
    pub success_probability: f64,
    /// `None` when the post-selection has zero probability.
    pub kept: Option<BlochState>,
}

pub fn conditional_kept_state(c: &Circuit, input: &BlochState) -> ConditionalState {
    let v = final_statevector(c, input);
    let (a0, a1) = (v[0], v[c.kept_mask()]);
    let success_probability = a0.norm_sqr() + a1.norm_sqr();
    let kept = (success_probability > 0.0)
        .then(|| BlochState::from_amplitudes(a0, a1))
        .flatten();
    ConditionalState {
        success_probability,
        kept,
    }
}
