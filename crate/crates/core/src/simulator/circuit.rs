use serde::Serialize;

use crate::error::{Error, Result};
use crate::kak::{synthesize_u_epsilon, Gate};
use crate::linalg::{Mat2, Mat4};
use crate::state_space::Epsilon;
use crate::unitary::build_u_epsilon;

/// Largest iteration count the statevector backend accepts (16 qubits).
pub const MAX_ITERATIONS_STATEVECTOR: u32 = 4;
/// Largest iteration count the density backend accepts (8 qubits).
pub const MAX_ITERATIONS_DENSITY: u32 = 3;

/// How each `U_ε` is placed in the circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Execution {
    /// One dense 4×4 application per pair.
    #[default]
    Dense,
    /// The synthesized two-CNOT gate sequence, expanded gate by gate.
    GateSequence,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    OneQubit { qubit: usize, matrix: Mat2 },
    Cnot { control: usize, target: usize },
    /// Two-qubit unitary; `first` is the high (left) factor.
    TwoQubit { first: usize, second: usize, matrix: Mat4 },
}

#[derive(Debug, Clone)]
pub struct Circuit {
    qubit_count: usize,
    iterations: u32,
    epsilon: Epsilon,
    execution: Execution,
    ops: Vec<Op>,
    pairs: Vec<(usize, usize)>,
    kept_qubit: usize,
    discard_set: Vec<usize>,
}

impl Circuit {
    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn iterations(&self) -> u32 {
        self.iterations
    }

    pub fn epsilon(&self) -> Epsilon {
        self.epsilon
    }

    pub fn execution(&self) -> Execution {
        self.execution
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    /// `(kept, discarded)` qubit pairs, one per `U_ε` application, in order.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn kept_qubit(&self) -> usize {
        self.kept_qubit
    }

    pub fn discard_set(&self) -> &[usize] {
        &self.discard_set
    }

    pub(crate) fn kept_mask(&self) -> usize {
        bit_of(self.kept_qubit, self.qubit_count)
    }
}

/// Basis-index bit of qubit `q`; qubit 0 is the most significant.
pub(crate) fn bit_of(q: usize, width: usize) -> usize {
    1 << (width - 1 - q)
}

/// Pairing of the iterated protocol: step `j` pairs qubits `i` and `i + 2^(j−1)` for every
/// survivor `i` that is a multiple of `2^j`.
pub fn protocol_pairs(n: u32) -> Vec<(usize, usize)> {
    let width = 1usize << n;
    let mut pairs = Vec::with_capacity(width - 1);
    for j in 1..=n {
        let stride = 1usize << (j - 1);
        for i in (0..width).step_by(stride * 2) {
            pairs.push((i, i + stride));
        }
    }
    pairs
}

pub fn build_protocol_circuit(eps: Epsilon, n: u32) -> Result<Circuit> {
    build_protocol_circuit_with(eps, n, Execution::Dense)
}

pub fn build_protocol_circuit_with(eps: Epsilon, n: u32, execution: Execution) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::ZeroIterations);
    }
    if n > MAX_ITERATIONS_STATEVECTOR {
        return Err(Error::UnsupportedIterations {
            requested: n,
            max: MAX_ITERATIONS_STATEVECTOR,
            backend: "statevector",
        });
    }
    let qubit_count = 1usize << n;
    let pairs = protocol_pairs(n);
    let ops = match execution {
        Execution::Dense => {
            let u = build_u_epsilon(eps).into_matrix();
            pairs
                .iter()
                .map(|&(a, b)| Op::TwoQubit { first: a, second: b, matrix: u })
                .collect()
        }
        Execution::GateSequence => {
            let seq = synthesize_u_epsilon(eps)?;
            let mut ops = Vec::with_capacity(pairs.len() * seq.gates.len());
            for &(a, b) in &pairs {
                let map = |q: usize| if q == 0 { a } else { b };
                ops.extend(seq.gates.iter().map(|g| match g {
                    Gate::OneQubit { qubit, matrix } => Op::OneQubit { qubit: map(*qubit), matrix: *matrix },
                    Gate::Cnot { control, target } => Op::Cnot { control: map(*control), target: map(*target) },
                }));
            }
            ops
        }
    };
    Ok(Circuit {
        qubit_count,
        iterations: n,
        epsilon: eps,
        execution,
        ops,
        pairs,
        kept_qubit: 0,
        discard_set: (1..qubit_count).collect(),
    })
}
