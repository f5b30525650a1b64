use std::fmt;
use std::sync::Arc;

use crate::chopoly::PredictorCache;
use crate::sim::{ChannelPolicy, ChannelState, ContextRow, InputEvaluation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    Smooth,
    Cliff,
    ContextCoverage,
    MonotoneDrift,
}

/// A scalar test signal with closed-form ground truth.
#[derive(Clone)]
pub struct Signal {
    pub name: &'static str,
    pub kind: SignalKind,
    pub total_time: f64,
    /// Communication period used when the signal is sampled.
    pub period: f64,
    /// Instant of the discontinuity, for cliff signals.
    pub jump_time: Option<f64>,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Signal")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("total_time", &self.total_time)
            .field("period", &self.period)
            .field("jump_time", &self.jump_time)
            .finish()
    }
}

impl Signal {
    pub fn new(
        name: &'static str,
        kind: SignalKind,
        total_time: f64,
        period: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Signal {
            name,
            kind,
            total_time,
            period,
            jump_time: None,
            f: Arc::new(f),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn sync_count(&self) -> usize {
        (self.total_time / self.period).round() as usize
    }
}

pub const CLIFF_TIME: f64 = 3.37;
pub const CLIFF_HEIGHT: f64 = -2.0;

pub fn smooth_signal() -> Signal {
    Signal::new("smooth", SignalKind::Smooth, 10.0, 0.1, |t| {
        (1.3 * t).sin() + 0.5 * (3.1 * t + 0.4).sin() + 0.2 * (0.7 * t).sin()
    })
}

pub fn cliff_signal() -> Signal {
    let mut s = Signal::new("cliff", SignalKind::Cliff, 10.0, 0.1, |t| {
        let step = if t >= CLIFF_TIME { CLIFF_HEIGHT } else { 0.0 };
        (0.9 * t).sin() + 0.3 * (2.3 * t).sin() + step
    });
    s.jump_time = Some(CLIFF_TIME);
    s
}

/// Plateau, ramp, plateau, one-sample spike, then a gentle wave: enough
/// variety for every functional context to appear.
pub fn context_coverage_signal() -> Signal {
    Signal::new("coverage", SignalKind::ContextCoverage, 10.0, 0.1, |t| {
        if t < 2.0 {
            1.0
        } else if t < 3.0 {
            1.0 + 2.0 * (t - 2.0)
        } else if (t - 4.5).abs() < 0.05 {
            6.0
        } else if t < 5.0 {
            3.0
        } else {
            3.0 + 0.4 * (1.5 * (t - 5.0)).sin()
        }
    })
}

pub fn monotone_drift_signal() -> Signal {
    Signal::new("drift", SignalKind::MonotoneDrift, 10.0, 0.1, |t| (0.3 * t).exp())
}

pub fn signal_suite() -> Vec<Signal> {
    vec![
        smooth_signal(),
        cliff_signal(),
        context_coverage_signal(),
        monotone_drift_signal(),
    ]
}

/// Outcome of feeding a signal through one channel, open loop.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalRun {
    pub times: Vec<f64>,
    pub truth: Vec<f64>,
    pub values: Vec<f64>,
    pub abs_errors: Vec<f64>,
    pub cumulative_abs_error: f64,
    pub contexts: Vec<ContextRow>,
}

impl SignalRun {
    /// Largest error over `[from, to)`.
    pub fn peak_error(&self, from: f64, to: f64) -> f64 {
        self.times
            .iter()
            .zip(&self.abs_errors)
            .filter(|(t, _)| **t >= from && **t < to)
            .map(|(_, e)| *e)
            .fold(0.0, f64::max)
    }
}

/// Samples `signal` every period, installs each sample in a channel under
/// `policy`, and compares what a consumer would read on a grid of spacing
/// `fine_step` against the true signal.
pub fn run_signal(signal: &Signal, policy: &ChannelPolicy, fine_step: f64) -> SignalRun {
    let cache = PredictorCache::global();
    let h = signal.period;
    let per_interval = (h / fine_step).round() as usize;
    let mut channel = ChannelState::new(policy.clone(), h, signal.value(0.0));
    let mut run = SignalRun {
        times: Vec::new(),
        truth: Vec::new(),
        values: Vec::new(),
        abs_errors: Vec::new(),
        cumulative_abs_error: 0.0,
        contexts: Vec::new(),
    };
    for k in 0..signal.sync_count() {
        let ts = k as f64 * h;
        let sample = signal.value(ts);
        if let Some(d) = channel.exchange(ts, sample, cache) {
            run.contexts.push(ContextRow {
                time: ts,
                channel: 0,
                context: d.context,
                rho: d.rho,
                gamma: d.gamma,
                omega_best: d.omega_best.as_f64(),
                prediction: d.previous_prediction.unwrap_or(sample),
                actual: sample,
            });
        }
        for j in 0..per_interval {
            let t = ts + j as f64 * fine_step;
            let truth = signal.value(t);
            let value = channel.value_at(t, InputEvaluation::Continuous);
            let err = (truth - value).abs();
            run.times.push(t);
            run.truth.push(truth);
            run.values.push(value);
            run.abs_errors.push(err);
            run.cumulative_abs_error += err;
        }
    }
    run
}
