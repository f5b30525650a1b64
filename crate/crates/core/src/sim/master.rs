use std::sync::Arc;

use rayon::prelude::*;

use crate::chopoly::PredictorCache;

use super::system::Wiring;
use super::time::{gcd, lcm};
use super::{
    integrate_interval, ticks_to_time, time_to_ticks, BlockState, BlockTrace, ChannelPolicy,
    ChannelState, Connection, ContextRow, CoupledSystem, ExchangeRecord, HybridBlock,
    InputEvaluation, SimError, SimulationTrace, SolverConfig,
};

#[derive(Clone)]
pub struct BlockConfig {
    pub model: Arc<dyn HybridBlock>,
    /// Communication period `H` of this block.
    pub period: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    pub connection: Connection,
    pub policy: ChannelPolicy,
}

#[derive(Clone)]
pub struct MasterConfig {
    pub blocks: Vec<BlockConfig>,
    pub channels: Vec<ChannelConfig>,
    pub total_time: f64,
    /// Preferred order for exchanges within a barrier. Blocks without
    /// direct feedthrough always go first.
    pub execution_order: Vec<String>,
    pub input_evaluation: InputEvaluation,
    /// Spacing of the recorded trace.
    pub output_step: f64,
    /// Worker threads for block integration; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl MasterConfig {
    /// Every block at period `period`, every channel under `policy`.
    pub fn uniform(
        system: &CoupledSystem,
        period: f64,
        policy: ChannelPolicy,
        total_time: f64,
    ) -> Self {
        MasterConfig {
            blocks: system
                .blocks
                .iter()
                .map(|b| BlockConfig {
                    model: Arc::clone(b),
                    period,
                })
                .collect(),
            channels: system
                .connections
                .iter()
                .map(|c| ChannelConfig {
                    connection: c.clone(),
                    policy: policy.clone(),
                })
                .collect(),
            total_time,
            execution_order: Vec::new(),
            input_evaluation: InputEvaluation::Continuous,
            output_step: 1e-3,
            threads: None,
        }
    }

    pub fn system(&self) -> CoupledSystem {
        CoupledSystem::new(
            self.blocks.iter().map(|b| Arc::clone(&b.model)).collect(),
            self.channels.iter().map(|c| c.connection.clone()).collect(),
        )
    }

    pub fn set_period(&mut self, block: &str, period: f64) -> Result<(), SimError> {
        let b = self
            .blocks
            .iter_mut()
            .find(|b| b.model.name() == block)
            .ok_or_else(|| SimError::UnknownBlock(block.to_string()))?;
        b.period = period;
        Ok(())
    }

    pub fn set_policy(&mut self, policy: ChannelPolicy) {
        for c in &mut self.channels {
            c.policy = policy.clone();
        }
    }
}

struct BlockRun {
    model: Arc<dyn HybridBlock>,
    state: BlockState,
    trace: BlockTrace,
    outputs: Vec<f64>,
}

struct Timing {
    base: u64,
    end: u64,
    output: u64,
    channel_periods: Vec<u64>,
}

fn timing(cfg: &MasterConfig, wiring: &Wiring) -> Result<Timing, SimError> {
    let end = time_to_ticks(cfg.total_time)?;
    let output = time_to_ticks(cfg.output_step)?;
    let mut base = 0;
    let mut periods = Vec::with_capacity(cfg.blocks.len());
    for b in &cfg.blocks {
        let p = time_to_ticks(b.period).map_err(|e| {
            SimError::Timing(format!("block `{}`: {e}", b.model.name()))
        })?;
        base = gcd(base, p);
        periods.push(p);
    }
    let channel_periods = wiring
        .producers
        .iter()
        .zip(&wiring.consumers)
        .map(|(&(p, _), &(c, _))| lcm(periods[p], periods[c]))
        .collect();
    Ok(Timing {
        base,
        end,
        output,
        channel_periods,
    })
}

/// Runs the modular co-simulation described by `cfg`.
///
/// The horizon is cut at every multiple of the greatest common divisor of
/// the block periods. Between two cuts all blocks integrate in parallel,
/// each reading its inputs from the channel predictors installed at the
/// last exchange. At a cut, channels whose period divides the current time
/// receive their producer's output and install a new predictor; this happens
/// sequentially in execution order, then in connection order, so the result
/// does not depend on thread scheduling.
pub fn run_master(cfg: &MasterConfig, solver: &SolverConfig) -> Result<SimulationTrace, SimError> {
    match cfg.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| SimError::Timing(format!("thread pool: {e}")))?;
            pool.install(|| run(cfg, solver))
        }
        None => run(cfg, solver),
    }
}

fn run(cfg: &MasterConfig, solver: &SolverConfig) -> Result<SimulationTrace, SimError> {
    solver.validate()?;
    if cfg.blocks.is_empty() {
        return Ok(SimulationTrace::default());
    }
    for c in &cfg.channels {
        c.policy.validate()?;
    }
    let system = cfg.system();
    let wiring = system.wiring(Some(&cfg.execution_order))?;
    let timing = timing(cfg, &wiring)?;
    let cache = PredictorCache::global();

    let mut channels: Vec<ChannelState> = cfg
        .channels
        .iter()
        .zip(&timing.channel_periods)
        .map(|(c, &p)| ChannelState::new(c.policy.clone(), ticks_to_time(p), c.connection.initial_value))
        .collect();

    let mut runs: Vec<BlockRun> = cfg
        .blocks
        .iter()
        .map(|b| BlockRun {
            state: b.model.initial_state(),
            trace: BlockTrace {
                name: b.model.name().to_string(),
                output_names: b.model.output_names(),
                ..Default::default()
            },
            outputs: vec![0.0; b.model.output_count()],
            model: Arc::clone(&b.model),
        })
        .collect();

    let mut trace = SimulationTrace::default();
    let mode = cfg.input_evaluation;

    trace.times.push(0.0);

    let mut now = 0u64;
    loop {
        barrier(&mut runs, &mut channels, &wiring, &timing, now, mode, cache, &mut trace);
        if now == 0 {
            for run in runs.iter_mut() {
                run.trace.states.push(run.state.continuous.clone());
                run.trace.outputs.push(run.outputs.clone());
            }
        }
        if now >= timing.end {
            break;
        }
        let next = (now + timing.base).min(timing.end);
        let t0 = ticks_to_time(now);
        let t1 = ticks_to_time(next);
        let first_k = now / timing.output + 1;
        let samples: Vec<f64> = (first_k..)
            .map(|k| k * timing.output)
            .take_while(|&tk| tk <= next)
            .map(ticks_to_time)
            .collect();
        trace.times.extend_from_slice(&samples);

        let snapshot = &channels;
        let results: Vec<Result<Vec<super::EventRecord>, SimError>> = runs
            .par_iter_mut()
            .enumerate()
            .map(|(b, run)| {
                let sources = &wiring.input_sources[b];
                let inputs = |t: f64, u: &mut [f64]| {
                    for (slot, &c) in u.iter_mut().zip(sources) {
                        *slot = snapshot[c].value_at(t, mode);
                    }
                };
                let outcome = integrate_interval(
                    run.model.as_ref(),
                    &mut run.state,
                    t0,
                    t1,
                    &inputs,
                    solver,
                    &samples,
                )?;
                for s in outcome.samples {
                    run.trace.states.push(s.continuous);
                    run.trace.outputs.push(s.outputs);
                }
                run.outputs = outcome.outputs;
                Ok(outcome.events)
            })
            .collect();
        for r in results {
            trace.events.extend(r?);
        }
        now = next;
    }

    trace.blocks = runs.into_iter().map(|r| r.trace).collect();
    Ok(trace)
}

#[allow(clippy::too_many_arguments)]
fn barrier(
    runs: &mut [BlockRun],
    channels: &mut [ChannelState],
    wiring: &Wiring,
    timing: &Timing,
    now: u64,
    mode: InputEvaluation,
    cache: &PredictorCache,
    trace: &mut SimulationTrace,
) {
    let t = ticks_to_time(now);
    for &b in &wiring.order {
        let run = &mut runs[b];
        let due: Vec<usize> = (0..channels.len())
            .filter(|&c| wiring.producers[c].0 == b && now.is_multiple_of(timing.channel_periods[c]))
            .collect();
        if due.is_empty() && now != 0 {
            continue;
        }
        let u: Vec<f64> = wiring.input_sources[b]
            .iter()
            .map(|&c| channels[c].value_at(t, mode))
            .collect();
        run.model
            .outputs(t, &run.state.continuous, &run.state.discrete, &u, &mut run.outputs);
        for c in due {
            let value = run.outputs[wiring.producers[c].1];
            let decision = channels[c].exchange(t, value, cache);
            trace.exchanges.push(ExchangeRecord {
                time: t,
                channel: c,
                value,
            });
            if let Some(d) = decision {
                trace.contexts.push(ContextRow {
                    time: t,
                    channel: c,
                    context: d.context,
                    rho: d.rho,
                    gamma: d.gamma,
                    omega_best: d.omega_best.as_f64(),
                    prediction: d.previous_prediction.unwrap_or(value),
                    actual: value,
                });
            }
        }
    }
}
