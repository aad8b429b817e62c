//! Parameter sweeps over (ε, θ₀, φ₀), binomial σ bands around the ideal success
//! probability, classification of statistical versus device error, and per-θ₀
//! aggregation over φ₀.

mod aggregate;
mod band;
mod config;
mod persist;
mod sweep;

pub use aggregate::{aggregate, phi_invariance_stat, AggregateRow, PhiSpread, PHI_FLAG_SIGMAS};
pub use band::{classify, sigma, sigma_band, Band, Classification, BAND_SIGMAS};
pub use config::{Backend, ExperimentConfig, PhiPolicy, PhiSpacing, ThetaGrid, DEFAULT_THETA_MAX};
pub use persist::{
    format_outcomes, parse_outcomes, read_records_csv, records_to_csv_string, write_records_csv, SweepSummary,
    CSV_COLUMNS,
};
pub use sweep::{derive_seed, make_sweep, phi_values, run_sweep, StatRecord, SweepPoint, SweepResult};
