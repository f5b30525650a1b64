use crate::chopatt::{ContextConfig, ContextState, Decision};
use crate::chopoly::{
    eval_poly, largest_feasible_spec, PredictorCache, PredictorSpec, SampleFrame,
};

use super::SimError;

/// How a consumer sees a producer's output between two exchanges.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelPolicy {
    /// Hold the last exchanged value.
    Zoh,
    /// Always use the same polynomial predictor, shortened while fewer than
    /// `λ` samples have been exchanged.
    Fixed(PredictorSpec),
    /// Let the context machine pick the predictor at every exchange.
    Choptrey(ContextConfig),
}

impl ChannelPolicy {
    pub fn validate(&self) -> Result<(), SimError> {
        match self {
            ChannelPolicy::Choptrey(cfg) => cfg
                .validate()
                .map_err(|e| SimError::Channel(e.to_string())),
            _ => Ok(()),
        }
    }

    fn history_capacity(&self) -> usize {
        match self {
            ChannelPolicy::Zoh => 1,
            ChannelPolicy::Fixed(spec) => spec.frame_length(),
            ChannelPolicy::Choptrey(cfg) => cfg.history_capacity(),
        }
    }
}

/// Where inside an interval the consumer evaluates the predictor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputEvaluation {
    /// At every solver stage time, `τ = (t - t_s) / H`.
    #[default]
    Continuous,
    /// Only at the start of the interval, `τ = 0`, held for the interval.
    Frozen,
}

/// Consumer-side view of one connection.
#[derive(Debug, Clone)]
pub struct ChannelState {
    policy: ChannelPolicy,
    period: f64,
    initial_value: f64,
    last_sync: Option<f64>,
    coefficients: Vec<f64>,
    frame: SampleFrame,
    context: Option<ContextState>,
    active: Option<PredictorSpec>,
}

impl ChannelState {
    pub fn new(policy: ChannelPolicy, period: f64, initial_value: f64) -> Self {
        let context = match &policy {
            ChannelPolicy::Choptrey(cfg) => Some(ContextState::new(cfg)),
            _ => None,
        };
        ChannelState {
            frame: SampleFrame::with_capacity(policy.history_capacity()),
            policy,
            period,
            initial_value,
            last_sync: None,
            coefficients: Vec::new(),
            context,
            active: None,
        }
    }

    pub fn policy(&self) -> &ChannelPolicy {
        &self.policy
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn last_sync(&self) -> Option<f64> {
        self.last_sync
    }

    pub fn latest(&self) -> Option<f64> {
        self.frame.latest()
    }

    /// Predictor installed at the latest exchange.
    pub fn active_predictor(&self) -> Option<PredictorSpec> {
        self.active
    }

    /// Coefficients of the installed extrapolant in powers of `τ`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn value_at(&self, t: f64, mode: InputEvaluation) -> f64 {
        let Some(ts) = self.last_sync else {
            return self.initial_value;
        };
        match mode {
            InputEvaluation::Continuous => eval_poly(&self.coefficients, (t - ts) / self.period),
            InputEvaluation::Frozen => self.coefficients[0],
        }
    }

    /// Installs a freshly exchanged sample and the predictor for the next
    /// interval. Returns the context decision for adaptive channels.
    pub fn exchange(&mut self, t: f64, value: f64, cache: &PredictorCache) -> Option<Decision> {
        self.last_sync = Some(t);
        self.frame.push(value);
        let (spec, history, decision) = match &self.policy {
            ChannelPolicy::Zoh => (PredictorSpec::hold(Default::default()), &self.frame, None),
            ChannelPolicy::Fixed(spec) => {
                let feasible = largest_feasible_spec(*spec, self.frame.valid_count())
                    .expect("frame holds the new sample");
                (feasible, &self.frame, None)
            }
            ChannelPolicy::Choptrey(cfg) => {
                let ctx = self.context.as_mut().expect("adaptive channel has a context");
                let decision = ctx.advance(value, cfg, cache);
                (decision.predictor, ctx.history(), Some(decision))
            }
        };
        self.coefficients = if spec.is_hold() {
            vec![value]
        } else {
            cache
                .get(spec)
                .coefficients(history)
                .expect("spec fits the available samples")
        };
        self.active = Some(spec);
        decision
    }
}
