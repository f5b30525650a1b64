//! Hierarchical context selection for one exchanged signal.
//!
//! At each communication point the newest sample is classified twice.
//! The decisional level compares how well the candidate predictors of the
//! previous interval did against simply holding the previous sample; if
//! the gain is too small the signal is on a "cliff" and the next interval
//! is held. Otherwise the functional level looks at the last two
//! differences against an adaptive threshold and picks a predictor from the
//! context table. The weight power used for the live prediction is the one
//! whose candidate was closest to the sample that just arrived.

use std::fmt;

use thiserror::Error;

use crate::chopoly::{
    largest_feasible_spec, PredictorCache, PredictorSpec, SampleFrame, WeightPower,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum ContextId {
    Flat = 0,
    Calm = 1,
    Move = 2,
    Rest = 3,
    Take = 4,
    Jump = 5,
    Cliff = 6,
}

impl ContextId {
    pub const FUNCTIONAL: [ContextId; 6] = [
        ContextId::Flat,
        ContextId::Calm,
        ContextId::Move,
        ContextId::Rest,
        ContextId::Take,
        ContextId::Jump,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            ContextId::Flat => "flat",
            ContextId::Calm => "calm",
            ContextId::Move => "move",
            ContextId::Rest => "rest",
            ContextId::Take => "take",
            ContextId::Jump => "jump",
            ContextId::Cliff => "cliff",
        }
    }

    pub fn is_functional(self) -> bool {
        self != ContextId::Cliff
    }
}

impl fmt::Display for ContextId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContextError {
    #[error("cliff threshold {0} outside [0.7, 1)")]
    CliffThreshold(f64),
    #[error("history length must be at least 1")]
    HistoryLength,
    #[error("candidate weight set is empty")]
    EmptyWeights,
    #[error("context table entry for {context}: frame length {frame_length} must exceed degree {degree}")]
    Table {
        context: ContextId,
        degree: usize,
        frame_length: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContextConfig {
    /// Λ, number of samples the thresholds look back over.
    pub history_length: usize,
    /// Γ, the cliff threshold on the best-to-worst error ratio.
    pub cliff_threshold: f64,
    /// Ω, candidate weight powers. Kept sorted ascending.
    pub weights: Vec<WeightPower>,
    /// `(δ, λ)` per functional context, indexed by `ContextId::id`.
    pub table: [(usize, usize); 6],
    /// Disable to run the functional level alone (no cliff detection).
    pub decisional: bool,
    /// Reset the usable frame when a flat stretch ends.
    pub reset_on_flat_exit: bool,
}

impl Default for ContextConfig {
    fn default() -> Self {
        ContextConfig {
            history_length: 10,
            cliff_threshold: 0.9,
            weights: WeightPower::default_set(),
            table: [(0, 1), (2, 5), (0, 1), (0, 2), (1, 3), (0, 1)],
            decisional: true,
            reset_on_flat_exit: true,
        }
    }
}

impl ContextConfig {
    pub fn validate(&self) -> Result<(), ContextError> {
        if !(0.7..1.0).contains(&self.cliff_threshold) {
            return Err(ContextError::CliffThreshold(self.cliff_threshold));
        }
        if self.history_length == 0 {
            return Err(ContextError::HistoryLength);
        }
        if self.weights.is_empty() {
            return Err(ContextError::EmptyWeights);
        }
        for (context, &(degree, frame_length)) in ContextId::FUNCTIONAL.iter().zip(&self.table) {
            if frame_length <= degree {
                return Err(ContextError::Table {
                    context: *context,
                    degree,
                    frame_length,
                });
            }
        }
        Ok(())
    }

    /// Same machine with a single candidate weight power.
    pub fn with_fixed_weight(mut self, weight: WeightPower) -> Self {
        self.weights = vec![weight];
        self
    }

    pub fn single_level(mut self) -> Self {
        self.decisional = false;
        self
    }

    fn sorted_weights(&self) -> Vec<WeightPower> {
        let mut w = self.weights.clone();
        w.sort();
        w.dedup();
        w
    }

    pub fn history_capacity(&self) -> usize {
        let widest = self.table.iter().map(|&(_, l)| l).max().unwrap_or(1);
        self.history_length.max(5).max(widest)
    }
}

/// `(d_{-1}, d_0)` with `d_0 = u_0 - u_{-1}` and `d_{-1} = u_{-1} - u_{-2}`.
pub fn differences(history: &SampleFrame) -> Option<(f64, f64)> {
    let u0 = history.get(0)?;
    let u1 = history.get(1)?;
    let u2 = history.get(2)?;
    Some((u1 - u2, u0 - u1))
}

/// Mid-range threshold `½ max |u_i - u_{i+1}|` over `i ∈ [1-Λ, -3]`,
/// restricted to the samples actually held. With fewer than four samples
/// there is no difference in the window and the threshold is `+∞`.
pub fn update_thresholds(history: &SampleFrame, history_length: usize) -> f64 {
    let oldest_lag = (history_length.max(1) - 1).min(history.valid_count().saturating_sub(1));
    if oldest_lag < 3 {
        return f64::INFINITY;
    }
    let max_step = (3..=oldest_lag)
        .map(|lag| {
            let older = history.get(lag).expect("lag within valid samples");
            let newer = history.get(lag - 1).expect("lag within valid samples");
            (older - newer).abs()
        })
        .fold(0.0f64, f64::max);
    0.5 * max_step
}

/// Functional context of the last two differences against threshold γ.
/// A zero difference counts as below the threshold; both zero is flat.
pub fn classify_functional(d_prev: f64, d_last: f64, gamma: f64) -> ContextId {
    let (a, b) = (d_prev.abs(), d_last.abs());
    if a == 0.0 && b == 0.0 {
        return ContextId::Flat;
    }
    match (a <= gamma, b <= gamma) {
        (true, true) => ContextId::Calm,
        (true, false) => ContextId::Move,
        (false, true) => ContextId::Rest,
        (false, false) => {
            if d_prev * d_last > 0.0 {
                ContextId::Take
            } else {
                ContextId::Jump
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateEvaluation {
    pub delta_worst: f64,
    pub delta_best: f64,
    pub omega_best: WeightPower,
}

/// Scores the stored candidates against the sample that just arrived.
/// Candidates must be ordered by ascending ω so ties keep the smallest.
/// With no candidates the best error equals the worst one and
/// `previous_best` is kept.
pub fn evaluate_candidates(
    candidates: &[(WeightPower, f64)],
    latest: f64,
    previous: f64,
    previous_best: WeightPower,
) -> CandidateEvaluation {
    let delta_worst = (latest - previous).abs();
    let mut best: Option<(WeightPower, f64)> = None;
    for &(w, predicted) in candidates {
        let err = (latest - predicted).abs();
        if err.is_nan() {
            continue;
        }
        if best.is_none_or(|(_, e)| err < e) {
            best = Some((w, err));
        }
    }
    match best {
        Some((omega_best, delta_best)) => CandidateEvaluation {
            delta_worst,
            delta_best,
            omega_best,
        },
        None => CandidateEvaluation {
            delta_worst,
            delta_best: delta_worst,
            omega_best: previous_best,
        },
    }
}

/// Best-to-worst error ratio ρ and the cliff decision `ρ > Γ`.
/// A signal that did not move has ρ = 0.
pub fn classify_decisional(delta_worst: f64, delta_best: f64, cliff_threshold: f64) -> (bool, f64) {
    let rho = if delta_worst == 0.0 {
        0.0
    } else {
        delta_best / delta_worst
    };
    (rho > cliff_threshold, rho)
}

/// Everything decided at one communication point.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    /// Predictor for the live extrapolation over the next interval.
    pub predictor: PredictorSpec,
    pub context: ContextId,
    pub functional: ContextId,
    pub is_cliff: bool,
    pub rho: f64,
    pub gamma: f64,
    pub delta_worst: f64,
    pub delta_best: f64,
    pub omega_best: WeightPower,
    /// What the previous live predictor forecast for this sample.
    pub previous_prediction: Option<f64>,
    /// Candidate forecasts for the next communication point, one per ω.
    pub candidates: Vec<(WeightPower, f64)>,
}

/// Per-channel context machine state.
#[derive(Debug, Clone)]
pub struct ContextState {
    history: SampleFrame,
    weights: Vec<WeightPower>,
    current: ContextId,
    gamma: f64,
    omega_best: WeightPower,
    candidates: Vec<(WeightPower, f64)>,
    candidates_informative: bool,
    valid_since_reset: usize,
    observed_flat: bool,
    live_prediction: Option<f64>,
}

impl ContextState {
    pub fn new(config: &ContextConfig) -> Self {
        let weights = config.sorted_weights();
        let omega_best = weights.first().copied().unwrap_or_default();
        ContextState {
            history: SampleFrame::with_capacity(config.history_capacity()),
            weights,
            current: ContextId::Flat,
            gamma: f64::INFINITY,
            omega_best,
            candidates: Vec::new(),
            candidates_informative: false,
            valid_since_reset: 0,
            observed_flat: false,
            live_prediction: None,
        }
    }

    pub fn history(&self) -> &SampleFrame {
        &self.history
    }

    pub fn current_context(&self) -> ContextId {
        self.current
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn omega_best(&self) -> WeightPower {
        self.omega_best
    }

    pub fn candidates(&self) -> &[(WeightPower, f64)] {
        &self.candidates
    }

    pub fn valid_since_reset(&self) -> usize {
        self.valid_since_reset
    }

    /// Runs one communication point with the freshly exchanged sample.
    pub fn advance(
        &mut self,
        sample: f64,
        config: &ContextConfig,
        cache: &PredictorCache,
    ) -> Decision {
        self.history.push(sample);
        self.valid_since_reset = (self.valid_since_reset + 1).min(self.history.capacity());

        let previous = self.history.get(1).unwrap_or(sample);
        let eval = evaluate_candidates(&self.candidates, sample, previous, self.omega_best);
        self.omega_best = eval.omega_best;

        self.gamma = update_thresholds(&self.history, config.history_length);

        let (mut is_cliff, rho) =
            classify_decisional(eval.delta_worst, eval.delta_best, config.cliff_threshold);
        // Candidates from a pure hold carry no information about the gain
        // of extrapolating, so they cannot trigger a cliff.
        is_cliff &= config.decisional && self.candidates_informative;

        let (functional, observed) = match differences(&self.history) {
            Some((d_prev, d_last)) => (classify_functional(d_prev, d_last, self.gamma), true),
            None => (ContextId::Flat, false),
        };

        let flat_exit = config.reset_on_flat_exit && self.observed_flat && functional != ContextId::Flat;
        if is_cliff || functional == ContextId::Jump || flat_exit {
            self.valid_since_reset = 1;
        }
        self.observed_flat = observed && functional == ContextId::Flat;

        let (degree, frame_length) = config.table[functional.id() as usize];
        let tabled = PredictorSpec::new(degree, frame_length, self.omega_best)
            .expect("context table validated");
        let functional_spec = largest_feasible_spec(tabled, self.valid_since_reset)
            .expect("at least one sample since reset");

        let predictor = if is_cliff {
            PredictorSpec::hold(self.omega_best)
        } else {
            functional_spec
        };

        let previous_prediction = self.live_prediction;
        self.live_prediction = cache.get(predictor).extrapolate(&self.history, 1.0).ok();

        self.candidates = self
            .weights
            .iter()
            .filter_map(|&w| {
                let spec = functional_spec.with_weight(w);
                cache
                    .get(spec)
                    .extrapolate(&self.history, 1.0)
                    .ok()
                    .map(|v| (w, v))
            })
            .collect();
        self.candidates_informative = !functional_spec.is_hold();

        self.current = if is_cliff { ContextId::Cliff } else { functional };

        Decision {
            predictor,
            context: self.current,
            functional,
            is_cliff,
            rho,
            gamma: self.gamma,
            delta_worst: eval.delta_worst,
            delta_best: eval.delta_best,
            omega_best: self.omega_best,
            previous_prediction,
            candidates: self.candidates.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(recent_first: &[f64]) -> SampleFrame {
        SampleFrame::from_recent(recent_first)
    }

    #[test]
    fn difference_examples() {
        assert_eq!(differences(&frame(&[3.0, 1.0, 0.0])), Some((1.0, 2.0)));
        assert_eq!(differences(&frame(&[4.0, 4.0, 4.0])), Some((0.0, 0.0)));
        assert_eq!(differences(&frame(&[0.0, 2.0, 1.0])), Some((1.0, -2.0)));
        assert_eq!(differences(&frame(&[0.0, 2.0])), None);
    }

    #[test]
    fn threshold_examples() {
        // window differences |u_{-3}-u_{-2}|, |u_{-4}-u_{-3}|, |u_{-5}-u_{-4}| = 1, 3, 2
        let h = frame(&[9.0, 9.0, 0.0, 1.0, 4.0, 6.0]);
        assert_eq!(update_thresholds(&h, 6), 1.5);
        assert_eq!(update_thresholds(&frame(&[2.0; 8]), 8), 0.0);
        let h = frame(&[7.0, -3.0, 0.0, 0.0, 4.0]);
        assert_eq!(update_thresholds(&h, 5), 2.0);
        assert_eq!(update_thresholds(&frame(&[1.0, 2.0, 3.0]), 10), f64::INFINITY);
    }

    #[test]
    fn threshold_ignores_samples_beyond_history_length() {
        let h = frame(&[0.0, 0.0, 0.0, 1.0, 100.0]);
        assert_eq!(update_thresholds(&h, 4), 0.5);
        assert_eq!(update_thresholds(&h, 5), 49.5);
    }

    #[test]
    fn functional_examples() {
        assert_eq!(classify_functional(0.0, 0.0, 1.0), ContextId::Flat);
        assert_eq!(classify_functional(0.5, 2.0, 1.0), ContextId::Move);
        assert_eq!(classify_functional(3.0, -2.0, 1.0), ContextId::Jump);
        assert_eq!(classify_functional(3.0, 2.0, 1.0), ContextId::Take);
        assert_eq!(classify_functional(3.0, 0.5, 1.0), ContextId::Rest);
        assert_eq!(classify_functional(0.5, -0.5, 1.0), ContextId::Calm);
    }

    #[test]
    fn zero_and_boundary_differences_count_as_below_threshold() {
        assert_eq!(classify_functional(0.0, 2.0, 1.0), ContextId::Move);
        assert_eq!(classify_functional(2.0, 0.0, 1.0), ContextId::Rest);
        assert_eq!(classify_functional(1.0, 1.0, 1.0), ContextId::Calm);
        assert_eq!(classify_functional(0.0, 1e-30, 0.0), ContextId::Move);
        assert_eq!(classify_functional(5.0, 5.0, f64::INFINITY), ContextId::Calm);
    }

    #[test]
    fn candidate_examples() {
        let w1 = WeightPower::integer(1);
        let c = [(WeightPower::ZERO, 4.9), (w1, 5.2)];
        let e = evaluate_candidates(&c, 5.0, 3.0, WeightPower::ZERO);
        assert_eq!(e.delta_worst, 2.0);
        assert!((e.delta_best - 0.1).abs() < 1e-12);
        assert_eq!(e.omega_best, WeightPower::ZERO);

        let e = evaluate_candidates(&[(WeightPower::ZERO, 1.0), (w1, 5.0)], 5.0, 3.0, WeightPower::ZERO);
        assert_eq!(e.delta_best, 0.0);
        assert_eq!(e.omega_best, w1);

        let tied: Vec<_> = WeightPower::default_set().into_iter().map(|w| (w, 4.0)).collect();
        let e = evaluate_candidates(&tied, 5.0, 3.0, w1);
        assert_eq!(e.omega_best, WeightPower::ZERO);

        let e = evaluate_candidates(&[], 5.0, 3.0, w1);
        assert_eq!((e.delta_best, e.omega_best), (2.0, w1));
    }

    #[test]
    fn decisional_examples() {
        assert!(classify_decisional(1.0, 0.95, 0.9).0);
        assert!(!classify_decisional(1.0, 0.2, 0.9).0);
        assert_eq!(classify_decisional(0.0, 0.0, 0.9), (false, 0.0));
    }

    #[test]
    fn config_validation() {
        assert!(ContextConfig::default().validate().is_ok());
        let bad = ContextConfig {
            cliff_threshold: 1.0,
            ..ContextConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = ContextConfig {
            cliff_threshold: 0.6,
            ..ContextConfig::default()
        };
        assert!(bad.validate().is_err());
        let mut bad = ContextConfig::default();
        bad.table[1] = (2, 2);
        assert!(matches!(bad.validate(), Err(ContextError::Table { .. })));
        assert!(ContextConfig::default().with_fixed_weight(WeightPower::ZERO).validate().is_ok());
    }

    fn run(samples: &[f64], config: &ContextConfig) -> Vec<Decision> {
        let cache = PredictorCache::new();
        let mut state = ContextState::new(config);
        samples.iter().map(|&s| state.advance(s, config, &cache)).collect()
    }

    #[test]
    fn steady_stream_is_flat_hold() {
        let d = run(&[2.0; 12], &ContextConfig::default());
        let last = d.last().unwrap();
        assert_eq!(last.context, ContextId::Flat);
        assert_eq!((last.predictor.degree(), last.predictor.frame_length()), (0, 1));
        assert!(d.iter().all(|x| !x.is_cliff));
    }

    #[test]
    fn parabola_near_vertex_is_calm_quadratic() {
        let u = |k: usize| -((k as f64) * 0.1 - 2.5).powi(2);
        let samples: Vec<f64> = (0..26).map(u).collect();
        let d = run(&samples, &ContextConfig::default());
        let last = d.last().unwrap();
        assert_eq!(last.context, ContextId::Calm);
        assert_eq!((last.predictor.degree(), last.predictor.frame_length()), (2, 5));
        // exact parabola: every candidate hits the next sample
        for &(_, v) in &last.candidates {
            assert!((v - u(26)).abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn take_right_after_reset_is_clamped() {
        let config = ContextConfig::default();
        let cache = PredictorCache::new();
        let mut state = ContextState::new(&config);
        // flat stretch, then a steady steep climb
        for &s in &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0] {
            state.advance(s, &config, &cache);
        }
        let exit = state.advance(5.0, &config, &cache);
        assert_eq!(exit.functional, ContextId::Move);
        assert_eq!(state.valid_since_reset(), 1);
        let d = state.advance(10.0, &config, &cache);
        assert_eq!(d.functional, ContextId::Take);
        assert_eq!(state.valid_since_reset(), 2);
        assert_eq!((d.predictor.degree(), d.predictor.frame_length()), (1, 2));
    }

    #[test]
    fn jump_resets_frame() {
        let config = ContextConfig::default();
        let cache = PredictorCache::new();
        let mut state = ContextState::new(&config);
        for &s in &[0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 3.0] {
            state.advance(s, &config, &cache);
        }
        let d = state.advance(0.6, &config, &cache);
        assert_eq!(d.functional, ContextId::Jump);
        assert_eq!(state.valid_since_reset(), 1);
        assert!(d.predictor.is_hold());
    }

    #[test]
    fn cliff_holds_latest_sample() {
        let mut samples: Vec<f64> = (0..12).map(|k| (k as f64 * 0.3).sin()).collect();
        samples.push(10.0);
        let d = run(&samples, &ContextConfig::default());
        let last = d.last().unwrap();
        assert!(last.is_cliff);
        assert_eq!(last.context, ContextId::Cliff);
        assert!(last.predictor.is_hold());
        assert!(last.rho > 0.9);
    }

    #[test]
    fn single_level_never_reports_cliff() {
        let mut samples: Vec<f64> = (0..12).map(|k| (k as f64 * 0.3).sin()).collect();
        samples.push(10.0);
        samples.extend([10.1, 10.2, 10.3]);
        let d = run(&samples, &ContextConfig::default().single_level());
        assert!(d.iter().all(|x| !x.is_cliff && x.context.is_functional()));
    }

    #[test]
    fn hold_after_reset_does_not_lock_into_cliff() {
        let mut samples: Vec<f64> = (0..12).map(|k| k as f64 * 0.1).collect();
        samples.push(8.0);
        samples.extend((1..10).map(|k| 8.0 + k as f64 * 0.1));
        let d = run(&samples, &ContextConfig::default());
        assert!(d[12].is_cliff);
        assert!(!d.last().unwrap().is_cliff);
        assert!(d.last().unwrap().predictor.frame_length() > 1);
    }
}
