//! Causal weighted least-squares polynomial extrapolation.
//!
//! A predictor `P(δ, λ, ω)` fits a degree-δ polynomial to the λ most recent
//! samples of a signal, weighting lag `l` by `((λ + l) / λ)^ω`, and evaluates
//! it at a relative time `τ ≥ 0` past the last sample (the communication
//! step is normalised to 1 and the last sample sits at lag 0).
//!
//! Two evaluation routes are provided. The moment route (`extrapolate_type1`)
//! builds weighted moments of the frame and solves the Hankel system each
//! time. The matrix route (`extrapolate_type2`) precomputes the predictor
//! matrix Π once per spec so that each prediction is a small mat-vec.

mod cost;
mod exact;
mod frame;
mod linalg;
mod predictor;
mod spec;
mod sums;
pub mod symbolic;

use thiserror::Error;

pub use cost::{flop_counts, FlopCounts};
pub use exact::{exact_predictor_matrix, rational_to_f64};
pub use frame::SampleFrame;
pub use predictor::{
    build_hankel, build_predictor_matrix, eval_poly, extrapolate_type1, extrapolate_type2,
    fit_type1, moments, HankelMatrix, MomentVector, PredictorCache, PredictorMatrix, TauVector,
};
pub use spec::{largest_feasible_spec, PredictorSpec, WeightPower};
pub use sums::{sum_powers, weight_at, weighted_sum_powers};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChopolyError {
    #[error("frame length {frame_length} must exceed degree {degree}")]
    DegenerateFit { degree: usize, frame_length: usize },
    #[error("frame holds {available} samples, predictor needs {needed}")]
    FrameUnderfull { needed: usize, available: usize },
    #[error("singular normal equations")]
    Singular,
    #[error("invalid weight power `{0}`")]
    InvalidWeight(String),
}
