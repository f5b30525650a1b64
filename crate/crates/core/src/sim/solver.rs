use super::{BlockState, HybridBlock, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Classical fourth-order Runge-Kutta at `max_step`.
    Rk4,
    /// Runge-Kutta-Fehlberg 4(5) with step control, propagating the
    /// fifth-order solution.
    Rkf45,
}

impl Method {
    pub fn order(self) -> u32 {
        match self {
            Method::Rk4 => 4,
            Method::Rkf45 => 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub min_step: f64,
    /// Width of the bracket left around a located event time.
    pub event_tol: f64,
}

impl SolverConfig {
    pub fn rk4(step: f64) -> Self {
        SolverConfig {
            method: Method::Rk4,
            rel_tol: 1e-6,
            abs_tol: 1e-9,
            max_step: step,
            min_step: step.min(1e-12),
            event_tol: 1e-10,
        }
    }

    pub fn rkf45(rel_tol: f64, abs_tol: f64) -> Self {
        SolverConfig {
            method: Method::Rkf45,
            rel_tol,
            abs_tol,
            max_step: 0.01,
            min_step: 1e-14,
            event_tol: 1e-12,
        }
    }

    pub fn order(&self) -> u32 {
        self.method.order()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: &str| Err(SimError::InvalidSolver(msg.to_string()));
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.event_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.min_step > 0.0 && self.max_step > 0.0) {
            return bad("step bounds must be positive");
        }
        if self.min_step > self.max_step {
            return bad("min_step exceeds max_step");
        }
        Ok(())
    }
}

/// A located state event.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub block: String,
    pub indicators: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSample {
    pub time: f64,
    pub continuous: Vec<f64>,
    pub discrete: Vec<f64>,
    pub outputs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalOutcome {
    /// Outputs at the end of the interval.
    pub outputs: Vec<f64>,
    pub events: Vec<EventRecord>,
    /// One sample per requested time, in order.
    pub samples: Vec<StateSample>,
}

const MAX_EVENTS_PER_INTERVAL: usize = 10_000;

struct Stepper<'a> {
    model: &'a dyn HybridBlock,
    inputs: &'a dyn Fn(f64, &mut [f64]),
    cfg: &'a SolverConfig,
    u: Vec<f64>,
    k: [Vec<f64>; 6],
    tmp: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(
        model: &'a dyn HybridBlock,
        inputs: &'a dyn Fn(f64, &mut [f64]),
        cfg: &'a SolverConfig,
        n: usize,
    ) -> Self {
        Stepper {
            model,
            inputs,
            cfg,
            u: vec![0.0; model.input_count()],
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
        }
    }

    fn rhs(&mut self, t: f64, x: &[f64], d: &[f64], slot: usize) {
        (self.inputs)(t, &mut self.u);
        let mut out = std::mem::take(&mut self.k[slot]);
        self.model.derivatives(t, x, d, &self.u, &mut out);
        self.k[slot] = out;
    }

    #[allow(clippy::needless_range_loop)]
    fn stage(&mut self, x: &[f64], h: f64, coeffs: &[(usize, f64)]) {
        for i in 0..x.len() {
            let mut acc = x[i];
            for &(slot, c) in coeffs {
                acc += h * c * self.k[slot][i];
            }
            self.tmp[i] = acc;
        }
    }

    /// One step of size `h` from `(t, x)`. Writes the new state into
    /// `out` and returns the scaled error norm (zero for RK4).
    fn step(&mut self, t: f64, x: &[f64], d: &[f64], h: f64, out: &mut [f64]) -> f64 {
        match self.cfg.method {
            Method::Rk4 => {
                self.rhs(t, x, d, 0);
                self.stage(x, h, &[(0, 0.5)]);
                let s = self.tmp.clone();
                self.rhs(t + 0.5 * h, &s, d, 1);
                self.stage(x, h, &[(1, 0.5)]);
                let s = self.tmp.clone();
                self.rhs(t + 0.5 * h, &s, d, 2);
                self.stage(x, h, &[(2, 1.0)]);
                let s = self.tmp.clone();
                self.rhs(t + h, &s, d, 3);
                for i in 0..x.len() {
                    out[i] = x[i]
                        + h / 6.0
                            * (self.k[0][i] + 2.0 * self.k[1][i] + 2.0 * self.k[2][i] + self.k[3][i]);
                }
                0.0
            }
            Method::Rkf45 => {
                self.rhs(t, x, d, 0);
                self.stage(x, h, &[(0, 0.25)]);
                let s = self.tmp.clone();
                self.rhs(t + 0.25 * h, &s, d, 1);
                self.stage(x, h, &[(0, 3.0 / 32.0), (1, 9.0 / 32.0)]);
                let s = self.tmp.clone();
                self.rhs(t + 3.0 / 8.0 * h, &s, d, 2);
                self.stage(
                    x,
                    h,
                    &[(0, 1932.0 / 2197.0), (1, -7200.0 / 2197.0), (2, 7296.0 / 2197.0)],
                );
                let s = self.tmp.clone();
                self.rhs(t + 12.0 / 13.0 * h, &s, d, 3);
                self.stage(
                    x,
                    h,
                    &[
                        (0, 439.0 / 216.0),
                        (1, -8.0),
                        (2, 3680.0 / 513.0),
                        (3, -845.0 / 4104.0),
                    ],
                );
                let s = self.tmp.clone();
                self.rhs(t + h, &s, d, 4);
                self.stage(
                    x,
                    h,
                    &[
                        (0, -8.0 / 27.0),
                        (1, 2.0),
                        (2, -3544.0 / 2565.0),
                        (3, 1859.0 / 4104.0),
                        (4, -11.0 / 40.0),
                    ],
                );
                let s = self.tmp.clone();
                self.rhs(t + 0.5 * h, &s, d, 5);

                let mut err_norm = 0.0f64;
                for i in 0..x.len() {
                    let k = &self.k;
                    let y5 = x[i]
                        + h * (16.0 / 135.0 * k[0][i]
                            + 6656.0 / 12825.0 * k[2][i]
                            + 28561.0 / 56430.0 * k[3][i]
                            - 9.0 / 50.0 * k[4][i]
                            + 2.0 / 55.0 * k[5][i]);
                    let y4 = x[i]
                        + h * (25.0 / 216.0 * k[0][i]
                            + 1408.0 / 2565.0 * k[2][i]
                            + 2197.0 / 4104.0 * k[3][i]
                            - 0.2 * k[4][i]);
                    let scale = self.cfg.abs_tol + self.cfg.rel_tol * x[i].abs().max(y5.abs());
                    err_norm = err_norm.max((y5 - y4).abs() / scale);
                    out[i] = y5;
                }
                err_norm
            }
        }
    }

    fn indicators(&mut self, t: f64, x: &[f64], d: &[f64], h: &mut [f64]) {
        (self.inputs)(t, &mut self.u);
        self.model.event_indicators(t, x, d, &self.u, h);
    }

    fn outputs(&mut self, t: f64, x: &[f64], d: &[f64]) -> Vec<f64> {
        (self.inputs)(t, &mut self.u);
        let mut y = vec![0.0; self.model.output_count()];
        self.model.outputs(t, x, d, &self.u, &mut y);
        y
    }
}

fn crossed(before: f64, after: f64) -> bool {
    (before < 0.0 && after >= 0.0) || (before > 0.0 && after <= 0.0)
}

fn fired_indicators(before: &[f64], after: &[f64]) -> Vec<usize> {
    before
        .iter()
        .zip(after)
        .enumerate()
        .filter(|(_, (b, a))| crossed(**b, **a))
        .map(|(i, _)| i)
        .collect()
}

/// Advances one block from `t_start` to `t_end`.
///
/// `inputs` is queried at every stage time, so a time-varying input (an
/// extrapolated channel, say) is seen continuously inside the interval.
/// Event indicator sign changes are located by bisection down to
/// `cfg.event_tol` and handled before integration resumes. The solver stops
/// exactly on each of `sample_times` that lies in `(t_start, t_end]`.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn integrate_interval(
    model: &dyn HybridBlock,
    state: &mut BlockState,
    t_start: f64,
    t_end: f64,
    inputs: &dyn Fn(f64, &mut [f64]),
    cfg: &SolverConfig,
    sample_times: &[f64],
) -> Result<IntervalOutcome, SimError> {
    let n = state.continuous.len();
    let mut stepper = Stepper::new(model, inputs, cfg, n);
    let mut events = Vec::new();
    let mut samples = Vec::new();

    if !(t_end > t_start) {
        let outputs = stepper.outputs(t_start, &state.continuous, &state.discrete);
        return Ok(IntervalOutcome {
            outputs,
            events,
            samples,
        });
    }

    let n_events = model.event_count();
    let mut g_prev = vec![0.0; n_events];
    let mut g_new = vec![0.0; n_events];
    stepper.indicators(t_start, &state.continuous, &state.discrete, &mut g_prev);
    if let Some(last) = state.last_indicators.take() {
        let fired = fired_indicators(&last, &g_prev);
        if !fired.is_empty() {
            (stepper.inputs)(t_start, &mut stepper.u);
            let u = stepper.u.clone();
            model.handle_events(t_start, &fired, &mut state.continuous, &mut state.discrete, &u);
            events.push(EventRecord {
                time: t_start,
                block: model.name().to_string(),
                indicators: fired,
            });
            stepper.indicators(t_start, &state.continuous, &state.discrete, &mut g_prev);
        }
    }

    let mut stops: Vec<f64> = sample_times
        .iter()
        .copied()
        .filter(|&s| s > t_start && s < t_end)
        .collect();
    stops.push(t_end);

    let mut t = t_start;
    let mut x_new = vec![0.0; n];
    let mut h_adaptive = state.next_step.unwrap_or(cfg.max_step).min(cfg.max_step);

    for &stop in &stops {
        while t < stop {
            let remaining = stop - t;
            let (h, lands) = match cfg.method {
                Method::Rk4 => {
                    let steps = (remaining / cfg.max_step - 1e-9).ceil().max(1.0);
                    let h = remaining / steps;
                    (h, steps <= 1.0)
                }
                Method::Rkf45 => {
                    if h_adaptive >= remaining {
                        (remaining, true)
                    } else {
                        (h_adaptive, false)
                    }
                }
            };

            let err = stepper.step(t, &state.continuous, &state.discrete, h, &mut x_new);
            if cfg.method == Method::Rkf45 {
                let factor = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                if err > 1.0 {
                    h_adaptive = h * factor;
                    if h_adaptive < cfg.min_step {
                        return Err(SimError::StepUnderflow {
                            block: model.name().to_string(),
                            time: t,
                        });
                    }
                    continue;
                }
                let proposed = (h * factor).min(cfg.max_step);
                h_adaptive = if lands {
                    h_adaptive.max(proposed).min(cfg.max_step)
                } else {
                    proposed
                };
            }
            if x_new.iter().any(|v| !v.is_finite()) {
                return Err(SimError::NonFinite {
                    block: model.name().to_string(),
                    time: t,
                });
            }

            let t_next = if lands { stop } else { t + h };
            if n_events > 0 {
                stepper.indicators(t_next, &x_new, &state.discrete, &mut g_new);
                if !fired_indicators(&g_prev, &g_new).is_empty() {
                    let (mut lo, mut hi) = (0.0f64, h);
                    let mut x_mid = vec![0.0; n];
                    let mut g_mid = vec![0.0; n_events];
                    while hi - lo > cfg.event_tol {
                        let mid = 0.5 * (lo + hi);
                        stepper.step(t, &state.continuous, &state.discrete, mid, &mut x_mid);
                        stepper.indicators(t + mid, &x_mid, &state.discrete, &mut g_mid);
                        if fired_indicators(&g_prev, &g_mid).is_empty() {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    let t_event = if hi == h { t_next } else { t + hi };
                    if hi < h {
                        stepper.step(t, &state.continuous, &state.discrete, hi, &mut x_new);
                    }
                    stepper.indicators(t_event, &x_new, &state.discrete, &mut g_new);
                    let fired = fired_indicators(&g_prev, &g_new);
                    state.continuous.copy_from_slice(&x_new);
                    t = t_event;
                    (stepper.inputs)(t, &mut stepper.u);
                    let u = stepper.u.clone();
                    model.handle_events(t, &fired, &mut state.continuous, &mut state.discrete, &u);
                    events.push(EventRecord {
                        time: t,
                        block: model.name().to_string(),
                        indicators: fired,
                    });
                    if events.len() > MAX_EVENTS_PER_INTERVAL {
                        return Err(SimError::EventStorm {
                            block: model.name().to_string(),
                            time: t,
                        });
                    }
                    stepper.indicators(t, &state.continuous, &state.discrete, &mut g_prev);
                    continue;
                }
                std::mem::swap(&mut g_prev, &mut g_new);
            }
            state.continuous.copy_from_slice(&x_new);
            t = t_next;
        }
        if stop < t_end {
            let outputs = stepper.outputs(stop, &state.continuous, &state.discrete);
            samples.push(StateSample {
                time: stop,
                continuous: state.continuous.clone(),
                discrete: state.discrete.clone(),
                outputs,
            });
        }
    }

    state.next_step = Some(h_adaptive);
    if n_events > 0 {
        state.last_indicators = Some(g_prev);
    }
    let outputs = stepper.outputs(t_end, &state.continuous, &state.discrete);
    if sample_times.contains(&t_end) {
        samples.push(StateSample {
            time: t_end,
            continuous: state.continuous.clone(),
            discrete: state.discrete.clone(),
            outputs: outputs.clone(),
        });
    }
    Ok(IntervalOutcome {
        outputs,
        events,
        samples,
    })
}
