//! Benchmark models, error metrics and experiment drivers.
//!
//! The models are small coupled mechanical systems built in code and looked
//! up by name. Experiments compare split co-simulation runs against a
//! tight-tolerance monolithic reference, or feed closed-form signals through
//! a single channel to isolate the extrapolation itself.

mod csv;
mod experiments;
mod fuzz;
mod gnuplot;
mod metrics;
mod models;
mod signals;

pub use csv::{
    format_g17, write_context_csv, write_convergence_csv, write_errors_csv, write_pi_csv,
    write_trace_csv, CsvWriter,
};
pub use experiments::{
    cliff_study, compared_series, converged_reference, convergence_against, convergence_study,
    enlarged_study, omega_study, period_ladder, split_run, state_error, CliffStudy,
    ConvergenceStudy, EnlargedStudy, OmegaStudy, ReferenceOutcome, NOISE_FLOOR, OUTPUT_STEP,
};
pub use fuzz::{run_fuzz, FuzzOutcome, FuzzReport};
pub use gnuplot::{convergence_script, trace_script};
pub use metrics::{
    convergence_slope, cumulative_abs_error, least_squares_slope, relative_error,
    relative_error_with_exclusions, ErrorReport,
};
pub use models::{chain, coupled_oscillator, model, BenchmarkModel, MODEL_NAMES};
pub use signals::{
    cliff_signal, context_coverage_signal, monotone_drift_signal, run_signal, signal_suite,
    smooth_signal, Signal, SignalKind, SignalRun, CLIFF_HEIGHT, CLIFF_TIME,
};

use thiserror::Error;

use crate::sim::SimError;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("series lengths differ: reference {reference}, test {test}")]
    LengthMismatch { reference: usize, test: usize },
    #[error("invalid ladder: {0}")]
    Ladder(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("trace has no output `{0}`")]
    MissingOutput(String),
    #[error("reference did not converge: {0}")]
    Reference(String),
    #[error("signal: {0}")]
    Signal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
