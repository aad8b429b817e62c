use thiserror::Error;

use crate::kak::KakResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("epsilon must satisfy 0 < eps <= 1, got {0}")]
    EpsilonOutOfRange(f64),

    #[error("polar angle must lie in [0, pi], got {0}")]
    ThetaOutOfRange(f64),

    #[error("iteration count must be at least 1")]
    ZeroIterations,

    #[error("iteration count {requested} outside the supported range 1..={max} for the {backend} backend")]
    UnsupportedIterations {
        requested: u32,
        max: u32,
        backend: &'static str,
    },

    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("matrix is not a tensor product of one-qubit unitaries (residual {0:.3e})")]
    NotFactorizable(f64),

    #[error("interaction coefficients {0:?} have no vanishing component; two CNOTs are not enough")]
    NeedsThreeCnots([f64; 3]),

    #[error("synthesized sequence misses its target (residual {residual:.3e})")]
    SynthesisFailed {
        residual: f64,
        diagnostics: Box<KakResult>,
    },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid noise specification: {0}")]
    InvalidNoise(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("shot count must be at least 1")]
    ZeroShots,

    #[error("bitstring {bitstring:?} does not match circuit width {width}")]
    WidthMismatch { bitstring: String, width: usize },

    #[error("no post-selected shots; the kept-qubit estimate is undefined")]
    EmptyKeptCounts,

    #[error("confusion matrix is numerically singular (condition estimate {0:.3e})")]
    SingularConfusion(f64),

    #[error("invalid confusion matrix: {0}")]
    InvalidConfusion(String),

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed CSV at line {line}: {message}")]
    MalformedCsv { line: u64, message: String },

    #[error("CSV output failed: {0}")]
    CsvWrite(String),
}
