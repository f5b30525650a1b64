use crate::chopatt::ContextConfig;
use crate::chopoly::WeightPower;
use crate::sim::{monolithic_reference, run_master, ChannelPolicy, SimulationTrace, SolverConfig};

use super::metrics::{convergence_slope, ErrorReport};
use super::signals::{run_signal, Signal};
use super::{BenchError, BenchmarkModel};

/// Spacing of the output grid used for every error metric.
pub const OUTPUT_STEP: f64 = 1e-3;

/// Errors below this are treated as numerical noise when fitting slopes.
pub const NOISE_FLOOR: f64 = 1e-11;

#[derive(Debug, Clone)]
pub struct ReferenceOutcome {
    pub trace: SimulationTrace,
    pub rel_tol: f64,
    /// `(rel_tol, Er against the previous level)` for each tightening.
    pub ladder: Vec<(f64, f64)>,
}

fn reference_solver(rel_tol: f64) -> SolverConfig {
    let mut s = SolverConfig::rkf45(rel_tol, rel_tol * 1e-2);
    s.max_step = 1e-2;
    s
}

/// Concatenation of the model's compared outputs.
pub fn compared_series(model: &BenchmarkModel, trace: &SimulationTrace) -> Result<Vec<f64>, BenchError> {
    let mut out = Vec::new();
    for port in &model.compared_outputs {
        let series = trace
            .output(&port.block, &port.port)
            .ok_or_else(|| BenchError::MissingOutput(port.to_string()))?;
        out.extend(series);
    }
    Ok(out)
}

/// Monolithic reference, tightened tenfold until two successive levels
/// agree to `Er < 0.01 %`.
pub fn converged_reference(model: &BenchmarkModel) -> Result<ReferenceOutcome, BenchError> {
    const MAX_LEVELS: usize = 5;
    let mut tol = model.reference_tolerance;
    let mut previous = monolithic_reference(&model.system, &reference_solver(tol), model.total_time, OUTPUT_STEP)?;
    let mut ladder = Vec::new();
    for _ in 1..MAX_LEVELS {
        let next_tol = tol * 0.1;
        let next = monolithic_reference(&model.system, &reference_solver(next_tol), model.total_time, OUTPUT_STEP)?;
        let er = ErrorReport::compare(&compared_series(model, &next)?, &compared_series(model, &previous)?)?
            .er_percent;
        ladder.push((next_tol, er));
        tol = next_tol;
        previous = next;
        if er < 0.01 {
            return Ok(ReferenceOutcome {
                trace: previous,
                rel_tol: tol,
                ladder,
            });
        }
    }
    Err(BenchError::Reference(format!(
        "no agreement after {MAX_LEVELS} levels: {ladder:?}"
    )))
}

/// Largest absolute state difference over every block and grid point.
pub fn state_error(reference: &SimulationTrace, trace: &SimulationTrace) -> Result<f64, BenchError> {
    if reference.times.len() != trace.times.len() {
        return Err(BenchError::LengthMismatch {
            reference: reference.times.len(),
            test: trace.times.len(),
        });
    }
    let mut worst = 0.0f64;
    for rb in &reference.blocks {
        let tb = trace
            .block(&rb.name)
            .ok_or_else(|| BenchError::MissingOutput(rb.name.clone()))?;
        for (xr, xt) in rb.states.iter().zip(&tb.states) {
            for (a, b) in xr.iter().zip(xt) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    if !worst.is_finite() {
        return Err(BenchError::NonFinite("state error".into()));
    }
    Ok(worst)
}

/// Split run of `model` at period `period`, compared with `reference`.
pub fn split_run(
    model: &BenchmarkModel,
    reference: &SimulationTrace,
    period: f64,
    policy: &ChannelPolicy,
) -> Result<(SimulationTrace, ErrorReport), BenchError> {
    let mut cfg = model.master(period, policy.clone());
    cfg.output_step = OUTPUT_STEP;
    let trace = run_master(&cfg, &model.solver)?;
    let report = ErrorReport::compare(&compared_series(model, reference)?, &compared_series(model, &trace)?)?;
    Ok((trace, report))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub steps: Vec<f64>,
    pub errors: Vec<f64>,
    /// `None` when the errors sit at the noise floor.
    pub slope: Option<f64>,
}

/// `levels` periods halving from the model's default.
pub fn period_ladder(model: &BenchmarkModel, levels: usize) -> Vec<f64> {
    (0..levels)
        .map(|k| model.default_period / f64::powi(2.0, k as i32))
        .collect()
}

pub fn convergence_study(
    model: &BenchmarkModel,
    policy: &ChannelPolicy,
    steps: &[f64],
) -> Result<ConvergenceStudy, BenchError> {
    if steps.len() < 4 {
        return Err(BenchError::Ladder(format!(
            "need at least 4 levels, got {}",
            steps.len()
        )));
    }
    let reference = converged_reference(model)?;
    convergence_against(model, &reference.trace, policy, steps)
}

/// As [`convergence_study`] with a precomputed reference.
pub fn convergence_against(
    model: &BenchmarkModel,
    reference: &SimulationTrace,
    policy: &ChannelPolicy,
    steps: &[f64],
) -> Result<ConvergenceStudy, BenchError> {
    let mut errors = Vec::with_capacity(steps.len());
    for &h in steps {
        let mut cfg = model.master(h, policy.clone());
        cfg.output_step = OUTPUT_STEP;
        let trace = run_master(&cfg, &model.solver)?;
        errors.push(state_error(reference, &trace)?);
    }
    let slope = convergence_slope(steps, &errors, NOISE_FLOOR)?;
    Ok(ConvergenceStudy {
        steps: steps.to_vec(),
        errors,
        slope,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliffStudy {
    pub hierarchical_cumulative: f64,
    pub single_level_cumulative: f64,
    pub zoh_cumulative: f64,
    /// Peak errors in the reaction window right after the jump.
    pub hierarchical_peak: f64,
    pub single_level_peak: f64,
    pub zoh_peak: f64,
}

/// Compares the context machine with and without the cliff level, and a
/// plain hold, on a signal with a jump.
///
/// The reaction window opens at the first sync point at or after the jump
/// and spans five periods.
pub fn cliff_study(signal: &Signal, config: &ContextConfig) -> Result<CliffStudy, BenchError> {
    let jump = signal
        .jump_time
        .ok_or_else(|| BenchError::Signal(format!("`{}` has no jump", signal.name)))?;
    let h = signal.period;
    let start = (jump / h).ceil() * h;
    let end = start + 5.0 * h;
    let hier = run_signal(signal, &ChannelPolicy::Choptrey(config.clone()), OUTPUT_STEP);
    let single = run_signal(
        signal,
        &ChannelPolicy::Choptrey(config.clone().single_level()),
        OUTPUT_STEP,
    );
    let zoh = run_signal(signal, &ChannelPolicy::Zoh, OUTPUT_STEP);
    Ok(CliffStudy {
        hierarchical_cumulative: hier.cumulative_abs_error,
        single_level_cumulative: single.cumulative_abs_error,
        zoh_cumulative: zoh.cumulative_abs_error,
        hierarchical_peak: hier.peak_error(start - 1e-9, end),
        single_level_peak: single.peak_error(start - 1e-9, end),
        zoh_peak: zoh.peak_error(start - 1e-9, end),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaStudy {
    pub signal: String,
    pub dynamic: f64,
    /// Cumulative error with the weight held fixed, in increasing `ω`.
    pub fixed: Vec<(WeightPower, f64)>,
}

impl OmegaStudy {
    pub fn best_fixed(&self) -> f64 {
        self.fixed.iter().map(|(_, e)| *e).fold(f64::INFINITY, f64::min)
    }

    /// `dynamic / best fixed`.
    pub fn regret_ratio(&self) -> f64 {
        let best = self.best_fixed();
        if best == 0.0 {
            if self.dynamic == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            self.dynamic / best
        }
    }

    /// Whether the fixed-weight errors never grow by more than `slack`
    /// (relative) from one weight to the next.
    pub fn non_increasing_within(&self, slack: f64) -> bool {
        self.fixed
            .windows(2)
            .all(|w| w[1].1 <= w[0].1 * (1.0 + slack))
    }
}

pub fn omega_study(signal: &Signal, config: &ContextConfig) -> OmegaStudy {
    let dynamic = run_signal(signal, &ChannelPolicy::Choptrey(config.clone()), OUTPUT_STEP)
        .cumulative_abs_error;
    let mut weights = config.weights.clone();
    weights.sort();
    weights.dedup();
    let fixed = weights
        .into_iter()
        .map(|w| {
            let policy = ChannelPolicy::Choptrey(config.clone().with_fixed_weight(w));
            (w, run_signal(signal, &policy, OUTPUT_STEP).cumulative_abs_error)
        })
        .collect();
    OmegaStudy {
        signal: signal.name.to_string(),
        dynamic,
        fixed,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnlargedStudy {
    pub base_period: f64,
    pub enlarged_period: f64,
    pub zoh_base: f64,
    pub zoh_enlarged: f64,
    pub choptrey_base: f64,
    pub choptrey_enlarged: f64,
}

/// `Er` of hold and context-driven coupling at the model's period and at
/// `factor` times that period.
pub fn enlarged_study(
    model: &BenchmarkModel,
    config: &ContextConfig,
    factor: f64,
) -> Result<EnlargedStudy, BenchError> {
    let reference = converged_reference(model)?;
    let base = model.default_period;
    let enlarged = base * factor;
    let er = |h: f64, policy: ChannelPolicy| -> Result<f64, BenchError> {
        Ok(split_run(model, &reference.trace, h, &policy)?.1.er_percent)
    };
    let adaptive = ChannelPolicy::Choptrey(config.clone());
    Ok(EnlargedStudy {
        base_period: base,
        enlarged_period: enlarged,
        zoh_base: er(base, ChannelPolicy::Zoh)?,
        zoh_enlarged: er(enlarged, ChannelPolicy::Zoh)?,
        choptrey_base: er(base, adaptive.clone())?,
        choptrey_enlarged: er(enlarged, adaptive)?,
    })
}
