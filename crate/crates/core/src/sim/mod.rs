//! Hybrid-system blocks, ODE integration with state events, and the
//! co-simulation master that couples blocks through extrapolated channels.
//!
//! A [`HybridBlock`] is a pure description; [`integrate_interval`] advances
//! one of them over an interval with inputs given as a function of time.
//! [`run_master`] splits the horizon into communication intervals, lets
//! every block integrate its interval in parallel, and exchanges outputs at
//! the barriers. Between barriers each consumer reads its inputs from the
//! channel's predictor, so the coupling quality is governed by the channel
//! policy: a plain hold, a fixed polynomial predictor, or the adaptive
//! context machine.
//!
//! [`monolithic_reference`] integrates the same blocks wired directly,
//! without communication delay, to provide the reference trajectory.

mod block;
mod channel;
mod composite;
mod master;
mod solver;
mod system;
mod time;
mod trace;

pub use block::{BlockState, HybridBlock};
pub use channel::{ChannelPolicy, ChannelState, InputEvaluation};
pub use composite::{monolithic_reference, Composite};
pub use master::{run_master, BlockConfig, ChannelConfig, MasterConfig};
pub use solver::{
    integrate_interval, EventRecord, IntervalOutcome, Method, SolverConfig, StateSample,
};
pub use system::{Connection, CoupledSystem, PortRef};
pub use time::{ticks_to_time, time_to_ticks, TICKS_PER_SECOND};
pub use trace::{BlockTrace, ContextRow, ExchangeRecord, SimulationTrace};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid solver settings: {0}")]
    InvalidSolver(String),
    #[error("block `{block}`: step size fell below min_step at t = {time}")]
    StepUnderflow { block: String, time: f64 },
    #[error("block `{block}`: state became non-finite at t = {time}")]
    NonFinite { block: String, time: f64 },
    #[error("block `{block}`: too many events in one interval near t = {time}")]
    EventStorm { block: String, time: f64 },
    #[error("unknown block `{0}`")]
    UnknownBlock(String),
    #[error("block `{block}` has no port `{port}`")]
    UnknownPort { block: String, port: String },
    #[error("input `{block}.{port}` is not wired")]
    UnwiredInput { block: String, port: String },
    #[error("input `{block}.{port}` is wired more than once")]
    DoublyWiredInput { block: String, port: String },
    #[error("duplicate block name `{0}`")]
    DuplicateBlock(String),
    #[error("direct-feedthrough loop through block `{0}`")]
    AlgebraicLoop(String),
    #[error("invalid timing: {0}")]
    Timing(String),
    #[error("invalid channel policy: {0}")]
    Channel(String),
}
