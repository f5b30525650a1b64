use std::sync::Arc;

use choptrey::chopatt::ContextConfig;
use choptrey::chopoly::{PredictorSpec, WeightPower};
use choptrey::sim::*;

struct Decay;

impl HybridBlock for Decay {
    fn name(&self) -> &str {
        "decay"
    }
    fn input_names(&self) -> Vec<String> {
        vec![]
    }
    fn output_names(&self) -> Vec<String> {
        vec!["x".into()]
    }
    fn initial_state(&self) -> BlockState {
        BlockState::new(vec![1.0], vec![])
    }
    fn derivatives(&self, _t: f64, x: &[f64], _d: &[f64], _u: &[f64], dx: &mut [f64]) {
        dx[0] = -x[0];
    }
    fn outputs(&self, _t: f64, x: &[f64], _d: &[f64], _u: &[f64], y: &mut [f64]) {
        y[0] = x[0];
    }
}

struct Ball {
    restitution: f64,
}

impl HybridBlock for Ball {
    fn name(&self) -> &str {
        "ball"
    }
    fn input_names(&self) -> Vec<String> {
        vec![]
    }
    fn output_names(&self) -> Vec<String> {
        vec!["height".into()]
    }
    fn initial_state(&self) -> BlockState {
        BlockState::new(vec![1.0, 0.0], vec![0.0])
    }
    fn derivatives(&self, _t: f64, x: &[f64], _d: &[f64], _u: &[f64], dx: &mut [f64]) {
        dx[0] = x[1];
        dx[1] = -9.81;
    }
    fn outputs(&self, _t: f64, x: &[f64], _d: &[f64], _u: &[f64], y: &mut [f64]) {
        y[0] = x[0];
    }
    fn event_count(&self) -> usize {
        1
    }
    fn event_indicators(&self, _t: f64, x: &[f64], _d: &[f64], _u: &[f64], h: &mut [f64]) {
        h[0] = x[0];
    }
    fn handle_events(&self, _t: f64, _f: &[usize], x: &mut [f64], d: &mut [f64], _u: &[f64]) {
        x[0] = 0.0;
        x[1] *= -self.restitution;
        d[0] += 1.0;
    }
}

/// `ẋ = a·x + b·u`, output `x`, optionally seen through a gain on `u`.
struct Linear {
    name: String,
    a: f64,
    b: f64,
    x0: f64,
    inputs: bool,
}

impl Linear {
    fn shared(name: &str, a: f64, b: f64, x0: f64) -> Arc<dyn HybridBlock> {
        Arc::new(Linear {
            name: name.into(),
            a,
            b,
            x0,
            inputs: true,
        })
    }
}

impl HybridBlock for Linear {
    fn name(&self) -> &str {
        &self.name
    }
    fn input_names(&self) -> Vec<String> {
        if self.inputs {
            vec!["u".into()]
        } else {
            vec![]
        }
    }
    fn output_names(&self) -> Vec<String> {
        vec!["x".into()]
    }
    fn initial_state(&self) -> BlockState {
        BlockState::new(vec![self.x0], vec![])
    }
    fn derivatives(&self, _t: f64, x: &[f64], _d: &[f64], u: &[f64], dx: &mut [f64]) {
        let input = if self.inputs { u[0] } else { 0.0 };
        dx[0] = self.a * x[0] + self.b * input;
    }
    fn outputs(&self, _t: f64, x: &[f64], _d: &[f64], _u: &[f64], y: &mut [f64]) {
        y[0] = x[0];
    }
}

/// Outputs a function of time only; `switch` changes the signal after a
/// given instant.
struct Source {
    switch: f64,
}

impl HybridBlock for Source {
    fn name(&self) -> &str {
        "source"
    }
    fn input_names(&self) -> Vec<String> {
        vec![]
    }
    fn output_names(&self) -> Vec<String> {
        vec!["y".into()]
    }
    fn initial_state(&self) -> BlockState {
        BlockState::new(vec![], vec![])
    }
    fn derivatives(&self, _t: f64, _x: &[f64], _d: &[f64], _u: &[f64], _dx: &mut [f64]) {}
    fn outputs(&self, t: f64, _x: &[f64], _d: &[f64], _u: &[f64], y: &mut [f64]) {
        y[0] = if t > self.switch { 5.0 } else { t };
    }
}

fn pair() -> CoupledSystem {
    CoupledSystem::new(
        vec![Linear::shared("a", -1.0, 1.0, 1.0), Linear::shared("b", -2.0, -0.5, 0.0)],
        vec![
            Connection::new(PortRef::new("a", "x"), PortRef::new("b", "u")),
            Connection::new(PortRef::new("b", "x"), PortRef::new("a", "u")),
        ],
    )
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn decay_matches_closed_form() {
    let mut state = Decay.initial_state();
    let out = integrate_interval(&Decay, &mut state, 0.0, 1.0, &|_, _| {}, &SolverConfig::rk4(1e-3), &[])
        .unwrap();
    assert!((state.continuous[0] - (-1.0f64).exp()).abs() < 1e-6);
    assert_eq!(out.outputs, state.continuous);
}

#[test]
fn adaptive_decay_meets_tolerance() {
    let mut state = Decay.initial_state();
    integrate_interval(&Decay, &mut state, 0.0, 2.0, &|_, _| {}, &SolverConfig::rkf45(1e-10, 1e-12), &[])
        .unwrap();
    assert!((state.continuous[0] - (-2.0f64).exp()).abs() < 1e-9);
}

#[test]
fn bouncing_ball_impact_time() {
    let ball = Ball { restitution: 0.8 };
    let cfg = SolverConfig::rkf45(1e-10, 1e-12);
    let mut state = ball.initial_state();
    let out = integrate_interval(&ball, &mut state, 0.0, 1.5, &|_, _| {}, &cfg, &[]).unwrap();
    let first = (2.0 / 9.81f64).sqrt();
    let second = first + 2.0 * 0.8 * 9.81 * first / 9.81;
    assert_eq!(out.events.len(), 2);
    assert!((out.events[0].time - first).abs() < 1e-9, "{}", out.events[0].time);
    assert!((out.events[1].time - second).abs() < 1e-8, "{}", out.events[1].time);
    assert_eq!(state.discrete[0], 2.0);
}

#[test]
fn fixed_step_ball_event_within_tolerance() {
    let ball = Ball { restitution: 0.5 };
    let mut cfg = SolverConfig::rk4(1e-2);
    cfg.event_tol = 1e-11;
    let mut state = ball.initial_state();
    let out = integrate_interval(&ball, &mut state, 0.0, 0.5, &|_, _| {}, &cfg, &[]).unwrap();
    let first = (2.0 / 9.81f64).sqrt();
    assert_eq!(out.events.len(), 1);
    assert!((out.events[0].time - first).abs() < 1e-9);
}

#[test]
fn zero_length_interval_is_identity() {
    let ball = Ball { restitution: 0.8 };
    let mut state = ball.initial_state();
    let before = state.clone();
    let out = integrate_interval(&ball, &mut state, 0.3, 0.3, &|_, _| {}, &SolverConfig::rk4(1e-3), &[0.3])
        .unwrap();
    assert_eq!(state, before);
    assert!(out.events.is_empty());
}

#[test]
fn samples_land_on_requested_times() {
    let mut state = Decay.initial_state();
    let times = [0.25, 0.5, 0.75, 1.0];
    let out = integrate_interval(&Decay, &mut state, 0.0, 1.0, &|_, _| {}, &SolverConfig::rkf45(1e-9, 1e-12), &times)
        .unwrap();
    let got: Vec<f64> = out.samples.iter().map(|s| s.time).collect();
    assert_eq!(got, times);
    for s in &out.samples {
        assert!((s.outputs[0] - (-s.time).exp()).abs() < 1e-8);
    }
}

#[test]
fn stiff_block_underflows_with_provenance() {
    let stiff = Linear {
        name: "stiff".into(),
        a: -1e9,
        b: 0.0,
        x0: 1.0,
        inputs: false,
    };
    let mut cfg = SolverConfig::rkf45(1e-8, 1e-10);
    cfg.min_step = 1e-6;
    let mut state = stiff.initial_state();
    let err = integrate_interval(&stiff, &mut state, 0.0, 1.0, &|_, _| {}, &cfg, &[]).unwrap_err();
    match err {
        SimError::StepUnderflow { block, time } => {
            assert_eq!(block, "stiff");
            assert!(time >= 0.0);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn invalid_solver_rejected() {
    let mut cfg = SolverConfig::rk4(1e-3);
    cfg.min_step = 1.0;
    assert!(cfg.validate().is_err());
    cfg = SolverConfig::rkf45(0.0, 1e-9);
    assert!(cfg.validate().is_err());
    assert_eq!(SolverConfig::rk4(1e-3).order(), 4);
    assert_eq!(SolverConfig::rkf45(1e-6, 1e-9).order(), 5);
}

#[test]
fn single_block_master_matches_direct_integration() {
    let system = CoupledSystem::new(vec![Arc::new(Decay)], vec![]);
    let mut cfg = MasterConfig::uniform(&system, 0.1, ChannelPolicy::Zoh, 1.0);
    cfg.output_step = 0.01;
    let solver = SolverConfig::rk4(1e-3);
    let trace = run_master(&cfg, &solver).unwrap();

    let grid: Vec<f64> = (1..=100).map(|k| ticks_to_time(k * 10_000_000_000)).collect();
    let mut state = Decay.initial_state();
    let out = integrate_interval(&Decay, &mut state, 0.0, 1.0, &|_, _| {}, &solver, &grid).unwrap();
    assert_eq!(trace.times.len(), 101);
    let series = trace.output("decay", "x").unwrap();
    let direct: Vec<f64> = std::iter::once(1.0).chain(out.samples.iter().map(|s| s.outputs[0])).collect();
    assert!(max_abs_diff(&series, &direct) < 1e-13);
}

#[test]
fn split_matches_monolithic_when_h_is_the_step() {
    let system = pair();
    let solver = SolverConfig::rk4(1e-3);
    let reference = monolithic_reference(&system, &SolverConfig::rkf45(1e-11, 1e-13), 2.0, 1e-2).unwrap();

    let mut cfg = MasterConfig::uniform(
        &system,
        1e-3,
        ChannelPolicy::Fixed(PredictorSpec::new(2, 3, WeightPower::ZERO).unwrap()),
        2.0,
    );
    cfg.output_step = 1e-2;
    let split = run_master(&cfg, &solver).unwrap();
    for name in ["a", "b"] {
        let r = reference.output(name, "x").unwrap();
        let s = split.output(name, "x").unwrap();
        assert!(max_abs_diff(&r, &s) < 1e-6, "{name}: {}", max_abs_diff(&r, &s));
    }

    cfg.set_policy(ChannelPolicy::Zoh);
    let held = run_master(&cfg, &solver).unwrap();
    let r = reference.output("a", "x").unwrap();
    let s = held.output("a", "x").unwrap();
    let er: f64 = r.iter().zip(&s).map(|(a, b)| ((a - b) / a).abs()).sum::<f64>() * 100.0 / r.len() as f64;
    assert!(er < 0.1, "Er = {er}");
}

#[test]
fn multirate_hold_spans_the_slow_period() {
    struct Clock;
    impl HybridBlock for Clock {
        fn name(&self) -> &str {
            "clock"
        }
        fn input_names(&self) -> Vec<String> {
            vec![]
        }
        fn output_names(&self) -> Vec<String> {
            vec!["t".into()]
        }
        fn initial_state(&self) -> BlockState {
            BlockState::new(vec![0.0], vec![])
        }
        fn derivatives(&self, _t: f64, _x: &[f64], _d: &[f64], _u: &[f64], dx: &mut [f64]) {
            dx[0] = 1.0;
        }
        fn outputs(&self, _t: f64, x: &[f64], _d: &[f64], _u: &[f64], y: &mut [f64]) {
            y[0] = x[0];
        }
    }
    let system = CoupledSystem::new(
        vec![Linear::shared("fast", 0.0, 1.0, 0.0), Arc::new(Clock)],
        vec![Connection::new(PortRef::new("clock", "t"), PortRef::new("fast", "u"))],
    );
    let mut cfg = MasterConfig::uniform(&system, 0.1, ChannelPolicy::Zoh, 0.6);
    cfg.set_period("clock", 0.2).unwrap();
    cfg.output_step = 0.1;
    let trace = run_master(&cfg, &SolverConfig::rk4(1e-3)).unwrap();
    let times: Vec<f64> = trace.exchanges.iter().map(|e| e.time).collect();
    assert_eq!(times, vec![0.0, 0.2, 0.4, 0.6]);
    let x = trace.output("fast", "x").unwrap();
    // Integral of the held ramp: 0 on [0, .2), .2 on [.2, .4), .4 on [.4, .6).
    let expected = [0.0, 0.0, 0.0, 0.02, 0.04, 0.08, 0.12];
    assert!(max_abs_diff(&x, &expected) < 1e-12, "{x:?}");
}

#[test]
fn zoh_equals_one_sample_predictor() {
    let system = pair();
    let mut cfg = MasterConfig::uniform(&system, 0.05, ChannelPolicy::Zoh, 1.0);
    let solver = SolverConfig::rk4(1e-3);
    let zoh = run_master(&cfg, &solver).unwrap();
    for w in WeightPower::default_set() {
        cfg.set_policy(ChannelPolicy::Fixed(PredictorSpec::hold(w)));
        assert_eq!(run_master(&cfg, &solver).unwrap(), zoh);
    }
}

#[test]
fn traces_do_not_depend_on_thread_count() {
    let system = pair();
    let mut cfg = MasterConfig::uniform(&system, 0.05, ChannelPolicy::Choptrey(ContextConfig::default()), 2.0);
    let solver = SolverConfig::rkf45(1e-8, 1e-10);
    cfg.threads = Some(1);
    let one = run_master(&cfg, &solver).unwrap();
    cfg.threads = Some(4);
    let four = run_master(&cfg, &solver).unwrap();
    assert_eq!(one, four);
    assert!(!one.contexts.is_empty());
}

#[test]
fn consumption_is_causal() {
    let run = |switch: f64| {
        let system = CoupledSystem::new(
            vec![Arc::new(Source { switch }), Linear::shared("sink", -1.0, 1.0, 0.0)],
            vec![Connection::new(PortRef::new("source", "y"), PortRef::new("sink", "u"))],
        );
        let cfg = MasterConfig::uniform(&system, 0.1, ChannelPolicy::Choptrey(ContextConfig::default()), 1.0);
        run_master(&cfg, &SolverConfig::rk4(1e-3)).unwrap()
    };
    let early = run(0.55);
    let late = run(10.0);
    let a = early.output("sink", "x").unwrap();
    let b = late.output("sink", "x").unwrap();
    // Sync points are at multiples of 0.1; the change after 0.55 is first
    // exchanged at 0.6, so everything up to and including 0.6 agrees.
    for k in 0..=600 {
        assert_eq!(a[k], b[k], "k = {k}");
    }
    assert_ne!(a[700], b[700]);
}

#[test]
fn oscillator_energy_is_conserved() {
    struct Oscillator;
    impl HybridBlock for Oscillator {
        fn name(&self) -> &str {
            "osc"
        }
        fn input_names(&self) -> Vec<String> {
            vec![]
        }
        fn output_names(&self) -> Vec<String> {
            vec!["energy".into()]
        }
        fn initial_state(&self) -> BlockState {
            BlockState::new(vec![1.0, 0.0], vec![])
        }
        fn derivatives(&self, _t: f64, x: &[f64], _d: &[f64], _u: &[f64], dx: &mut [f64]) {
            dx[0] = x[1];
            dx[1] = -4.0 * x[0];
        }
        fn outputs(&self, _t: f64, x: &[f64], _d: &[f64], _u: &[f64], y: &mut [f64]) {
            y[0] = 0.5 * x[1] * x[1] + 2.0 * x[0] * x[0];
        }
    }
    let system = CoupledSystem::new(vec![Arc::new(Oscillator)], vec![]);
    let period = std::f64::consts::PI;
    let mut solver = SolverConfig::rkf45(1e-10, 1e-12);
    solver.max_step = 0.05;
    let trace = monolithic_reference(&system, &solver, 10.0 * period, 1e-2).unwrap();
    let energy = trace.output("osc", "energy").unwrap();
    let drift = energy.iter().map(|e| (e - 2.0).abs()).fold(0.0, f64::max);
    assert!(drift < 1e-6, "drift {drift}");
}

#[test]
fn empty_system_gives_empty_trace() {
    let system = CoupledSystem::default();
    let trace = monolithic_reference(&system, &SolverConfig::rk4(1e-3), 1.0, 1e-3).unwrap();
    assert!(trace.is_empty());
    let cfg = MasterConfig::uniform(&system, 0.1, ChannelPolicy::Zoh, 1.0);
    assert!(run_master(&cfg, &SolverConfig::rk4(1e-3)).unwrap().is_empty());
}

#[test]
fn wiring_errors_are_reported() {
    let unwired = CoupledSystem::new(vec![Linear::shared("a", -1.0, 1.0, 0.0)], vec![]);
    assert!(matches!(unwired.validate(), Err(SimError::UnwiredInput { .. })));

    let bad_port = CoupledSystem::new(
        vec![Linear::shared("a", -1.0, 1.0, 0.0)],
        vec![Connection::new(PortRef::new("a", "nope"), PortRef::new("a", "u"))],
    );
    assert!(matches!(bad_port.validate(), Err(SimError::UnknownPort { .. })));

    let twice = CoupledSystem::new(
        vec![Linear::shared("a", -1.0, 1.0, 0.0)],
        vec![
            Connection::new(PortRef::new("a", "x"), PortRef::new("a", "u")),
            Connection::new(PortRef::new("a", "x"), PortRef::new("a", "u")),
        ],
    );
    assert!(matches!(twice.validate(), Err(SimError::DoublyWiredInput { .. })));
}

#[test]
fn incommensurate_period_rejected() {
    let system = CoupledSystem::new(vec![Arc::new(Decay)], vec![]);
    let cfg = MasterConfig::uniform(&system, 1.0 / 3.0, ChannelPolicy::Zoh, 1.0);
    assert!(matches!(run_master(&cfg, &SolverConfig::rk4(1e-3)), Err(SimError::Timing(_))));
}

#[test]
fn input_jump_at_sync_point_fires_event() {
    struct Threshold;
    impl HybridBlock for Threshold {
        fn name(&self) -> &str {
            "threshold"
        }
        fn input_names(&self) -> Vec<String> {
            vec!["u".into()]
        }
        fn output_names(&self) -> Vec<String> {
            vec!["count".into()]
        }
        fn initial_state(&self) -> BlockState {
            BlockState::new(vec![], vec![0.0])
        }
        fn derivatives(&self, _t: f64, _x: &[f64], _d: &[f64], _u: &[f64], _dx: &mut [f64]) {}
        fn outputs(&self, _t: f64, _x: &[f64], d: &[f64], _u: &[f64], y: &mut [f64]) {
            y[0] = d[0];
        }
        fn event_count(&self) -> usize {
            1
        }
        fn event_indicators(&self, _t: f64, _x: &[f64], _d: &[f64], u: &[f64], h: &mut [f64]) {
            h[0] = u[0] - 0.45;
        }
        fn handle_events(&self, _t: f64, _f: &[usize], _x: &mut [f64], d: &mut [f64], _u: &[f64]) {
            d[0] += 1.0;
        }
    }
    let system = CoupledSystem::new(
        vec![Arc::new(Source { switch: 10.0 }), Arc::new(Threshold)],
        vec![Connection::new(PortRef::new("source", "y"), PortRef::new("threshold", "u"))],
    );
    let cfg = MasterConfig::uniform(&system, 0.1, ChannelPolicy::Zoh, 1.0);
    let trace = run_master(&cfg, &SolverConfig::rk4(1e-2)).unwrap();
    assert_eq!(trace.events.len(), 1);
    assert!((trace.events[0].time - 0.5).abs() < 1e-12);
    assert_eq!(*trace.output("threshold", "count").unwrap().last().unwrap(), 1.0);
}
