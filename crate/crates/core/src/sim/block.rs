/// One sub-model of a hybrid system.
///
/// The continuous state `x` follows `ẋ = f(t, x, d, u)` between events;
/// outputs are `y = g(t, x, d, u)`. A sign change of any event indicator
/// `h(t, x, d, u)` is a state event, at which [`HybridBlock::handle_events`]
/// may reset `x` and update the discrete state `d`.
///
/// Implementations are immutable descriptions; the evolving state lives
/// in [`BlockState`], so one model can be simulated several times.
pub trait HybridBlock: Send + Sync {
    fn name(&self) -> &str;

    fn input_names(&self) -> Vec<String>;

    fn output_names(&self) -> Vec<String>;

    fn initial_state(&self) -> BlockState;

    fn derivatives(&self, t: f64, x: &[f64], d: &[f64], u: &[f64], dx: &mut [f64]);

    fn outputs(&self, t: f64, x: &[f64], d: &[f64], u: &[f64], y: &mut [f64]);

    fn event_count(&self) -> usize {
        0
    }

    fn event_indicators(&self, _t: f64, _x: &[f64], _d: &[f64], _u: &[f64], _h: &mut [f64]) {}

    /// Called at a located event with the indices of the indicators that
    /// changed sign.
    fn handle_events(
        &self,
        _t: f64,
        _fired: &[usize],
        _x: &mut [f64],
        _d: &mut [f64],
        _u: &[f64],
    ) {
    }

    /// Whether any output depends on the inputs at the same instant.
    fn direct_feedthrough(&self) -> bool {
        false
    }

    fn input_count(&self) -> usize {
        self.input_names().len()
    }

    fn output_count(&self) -> usize {
        self.output_names().len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockState {
    pub continuous: Vec<f64>,
    pub discrete: Vec<f64>,
    /// Step size the adaptive solver proposes next; `None` before the first step.
    pub(crate) next_step: Option<f64>,
    /// Indicator values at the end of the previous interval, so that a sign
    /// change caused by an input jump at a sync point is not missed.
    pub(crate) last_indicators: Option<Vec<f64>>,
}

impl BlockState {
    pub fn new(continuous: Vec<f64>, discrete: Vec<f64>) -> Self {
        BlockState {
            continuous,
            discrete,
            next_step: None,
            last_indicators: None,
        }
    }
}
