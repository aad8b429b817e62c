//! Quantum state matching: the nonlinear two-copy protocol, its two-qubit
//! unitary, KAK synthesis, simulation and statistics.

pub mod error;
pub mod kak;
pub mod linalg;
pub mod mitigation;
pub mod simulator;
pub mod state_space;
pub mod stats;
pub mod unitary;

pub use error::{Error, Result};
pub use state_space::{BlochState, Epsilon};
pub use unitary::{build_u_epsilon, Unitary4};
