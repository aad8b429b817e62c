//! Circuit construction and simulation of the iterated protocol on `2^n` qubits.
//!
//! Every qubit starts in the same single-qubit state, `U_ε` is applied along the
//! pairing tree, and all qubits are measured once at the end. Success means every
//! discarded qubit reads 0; qubit 0 is kept and is the leftmost bitstring character.

mod circuit;
mod counts;
mod density;
mod kernel;
mod noise;
mod postselect;
mod statevector;

pub use circuit::{
    build_protocol_circuit, build_protocol_circuit_with, protocol_pairs, Circuit, Execution, Op,
    MAX_ITERATIONS_DENSITY, MAX_ITERATIONS_STATEVECTOR,
};
pub use counts::{bitstring, sample_counts, CountsTable};
pub use density::{
    conditional_kept_density, density_probabilities, ops_probabilities, run_density, validate_density, InputState,
};
pub use noise::NoiseSpec;
pub use postselect::{
    estimate_theta1, post_select, post_select_exact, theta1_from_weights, ExactPostSelection, KeptCounts,
    PostSelection,
};
pub use statevector::{
    conditional_kept_state, final_statevector, run_statevector, statevector_probabilities, ConditionalState,
};
