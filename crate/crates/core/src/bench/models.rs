use std::sync::Arc;

use crate::sim::{
    BlockState, ChannelPolicy, Connection, CoupledSystem, HybridBlock, MasterConfig, PortRef,
    SolverConfig,
};

/// A coupled system together with the settings used to study it.
#[derive(Debug, Clone)]
pub struct BenchmarkModel {
    pub name: &'static str,
    pub description: &'static str,
    pub system: CoupledSystem,
    pub default_period: f64,
    pub total_time: f64,
    /// Starting relative tolerance of the reference ladder.
    pub reference_tolerance: f64,
    /// Outputs entering the relative error.
    pub compared_outputs: Vec<PortRef>,
    /// Solver used by each block in split runs.
    pub solver: SolverConfig,
}

impl BenchmarkModel {
    pub fn master(&self, period: f64, policy: ChannelPolicy) -> MasterConfig {
        MasterConfig::uniform(&self.system, period, policy, self.total_time)
    }

    pub fn channel_names(&self) -> Vec<String> {
        self.system
            .connections
            .iter()
            .map(|c| format!("{}->{}", c.producer, c.consumer))
            .collect()
    }
}

pub const MODEL_NAMES: [&str; 2] = ["coupled_oscillator", "chain"];

pub fn model(name: &str) -> Option<BenchmarkModel> {
    match name {
        "coupled_oscillator" => Some(coupled_oscillator()),
        "chain" => Some(chain()),
        _ => None,
    }
}

/// Mass tied to the wall, pulled by a neighbour through a spring-damper pair.
#[derive(Debug, Clone)]
struct Mass {
    name: String,
    mass: f64,
    wall_stiffness: f64,
    wall_damping: f64,
    coupling_stiffness: f64,
    coupling_damping: f64,
    /// Amplitude and angular frequency of `A (1 - cos ω t)`.
    forcing: Option<(f64, f64)>,
    /// Offset added to the displacement for the absolute position output.
    rest: f64,
}

impl HybridBlock for Mass {
    fn name(&self) -> &str {
        &self.name
    }

    fn input_names(&self) -> Vec<String> {
        vec!["x_other".into(), "v_other".into()]
    }

    fn output_names(&self) -> Vec<String> {
        vec!["x".into(), "v".into(), "p".into()]
    }

    fn initial_state(&self) -> BlockState {
        BlockState::new(vec![0.0, 0.0], vec![])
    }

    fn derivatives(&self, t: f64, x: &[f64], _d: &[f64], u: &[f64], dx: &mut [f64]) {
        let coupling =
            self.coupling_stiffness * (u[0] - x[0]) + self.coupling_damping * (u[1] - x[1]);
        let wall = -self.wall_stiffness * x[0] - self.wall_damping * x[1];
        let drive = self
            .forcing
            .map_or(0.0, |(a, w)| a * (1.0 - (w * t).cos()));
        dx[0] = x[1];
        dx[1] = (wall + coupling + drive) / self.mass;
    }

    fn outputs(&self, _t: f64, x: &[f64], _d: &[f64], _u: &[f64], y: &mut [f64]) {
        y[0] = x[0];
        y[1] = x[1];
        y[2] = self.rest + x[0];
    }
}

/// Two masses, each on its own wall spring, coupled by a spring and a
/// damper. Mass `one` is driven smoothly from rest.
pub fn coupled_oscillator() -> BenchmarkModel {
    let one = Mass {
        name: "one".into(),
        mass: 1.0,
        wall_stiffness: 4.0,
        wall_damping: 0.4,
        coupling_stiffness: 2.0,
        coupling_damping: 0.2,
        forcing: Some((1.0, 2.0)),
        rest: 1.0,
    };
    let two = Mass {
        name: "two".into(),
        mass: 0.5,
        wall_stiffness: 1.0,
        wall_damping: 0.1,
        coupling_stiffness: 2.0,
        coupling_damping: 0.2,
        forcing: None,
        rest: 2.0,
    };
    let link = |from: &str, out: &str, to: &str, inp: &str| {
        Connection::new(PortRef::new(from, out), PortRef::new(to, inp))
    };
    let system = CoupledSystem::new(
        vec![Arc::new(one), Arc::new(two)],
        vec![
            link("one", "x", "two", "x_other"),
            link("one", "v", "two", "v_other"),
            link("two", "x", "one", "x_other"),
            link("two", "v", "one", "v_other"),
        ],
    );
    BenchmarkModel {
        name: "coupled_oscillator",
        description: "two masses coupled by a spring-damper, smooth forcing from rest",
        system,
        default_period: 0.1,
        total_time: 10.0,
        reference_tolerance: 1e-9,
        compared_outputs: vec![PortRef::new("one", "p"), PortRef::new("two", "p")],
        solver: SolverConfig::rk4(1e-3),
    }
}

/// One link of the chain. Positions are absolute, `p = rest + x`, so the
/// compared outputs never pass through zero.
#[derive(Debug, Clone)]
struct ChainMass {
    name: String,
    rest: f64,
    spacing: f64,
    mass: f64,
    damping: f64,
    /// Stiffness of the springs to the wall, the left and the right neighbour.
    wall: Option<f64>,
    left: Option<f64>,
    right: Option<f64>,
    driven: bool,
}

impl HybridBlock for ChainMass {
    fn name(&self) -> &str {
        &self.name
    }

    fn input_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        if self.driven {
            names.push("force".into());
        }
        if self.left.is_some() {
            names.push("p_left".into());
            names.push("v_left".into());
        }
        if self.right.is_some() {
            names.push("p_right".into());
            names.push("v_right".into());
        }
        names
    }

    fn output_names(&self) -> Vec<String> {
        vec!["p".into(), "v".into()]
    }

    fn initial_state(&self) -> BlockState {
        BlockState::new(vec![self.rest, 0.0], vec![])
    }

    fn derivatives(&self, _t: f64, x: &[f64], _d: &[f64], u: &[f64], dx: &mut [f64]) {
        let (p, v) = (x[0], x[1]);
        let mut i = 0;
        let mut force = 0.0;
        if self.driven {
            force += u[0];
            i = 1;
        }
        if let Some(k) = self.wall {
            force -= k * (p - self.rest) + self.damping * v;
        }
        if let Some(k) = self.left {
            let stretch = p - u[i] - self.spacing;
            force -= k * stretch + self.damping * (v - u[i + 1]);
            i += 2;
        }
        if let Some(k) = self.right {
            let stretch = u[i] - p - self.spacing;
            force += k * stretch + self.damping * (u[i + 1] - v);
        }
        dx[0] = v;
        dx[1] = force / self.mass;
    }

    fn outputs(&self, _t: f64, x: &[f64], _d: &[f64], _u: &[f64], y: &mut [f64]) {
        y.copy_from_slice(&x[..2]);
    }
}

/// Bang-bang controller with hysteresis and a first-order actuator.
///
/// The discrete state is the command sign. It flips when the observed
/// position leaves the band `[low, high]`; the actuator force follows the
/// command with time constant `lag`.
#[derive(Debug, Clone)]
struct Relay {
    low: f64,
    high: f64,
    force: f64,
    lag: f64,
}

impl HybridBlock for Relay {
    fn name(&self) -> &str {
        "relay"
    }

    fn input_names(&self) -> Vec<String> {
        vec!["p".into()]
    }

    fn output_names(&self) -> Vec<String> {
        vec!["force".into()]
    }

    fn initial_state(&self) -> BlockState {
        BlockState::new(vec![0.0], vec![1.0])
    }

    fn derivatives(&self, _t: f64, x: &[f64], d: &[f64], _u: &[f64], dx: &mut [f64]) {
        dx[0] = (d[0] * self.force - x[0]) / self.lag;
    }

    fn outputs(&self, _t: f64, x: &[f64], _d: &[f64], _u: &[f64], y: &mut [f64]) {
        y[0] = x[0];
    }

    fn event_count(&self) -> usize {
        1
    }

    fn event_indicators(&self, _t: f64, _x: &[f64], d: &[f64], u: &[f64], h: &mut [f64]) {
        h[0] = if d[0] > 0.0 {
            self.high - u[0]
        } else {
            u[0] - self.low
        };
    }

    fn handle_events(&self, _t: f64, _f: &[usize], _x: &mut [f64], d: &mut [f64], _u: &[f64]) {
        d[0] = -d[0];
    }
}

/// Four masses in a line plus a relay that watches the last one and pushes
/// the first one.
pub fn chain() -> BenchmarkModel {
    let spacing = 1.0;
    let stiffness = [20.0, 12.0, 6.0, 3.0];
    let masses: Vec<ChainMass> = (0..4)
        .map(|i| ChainMass {
            name: format!("m{}", i + 1),
            rest: spacing * (i + 1) as f64,
            spacing,
            mass: 1.0,
            damping: 0.3,
            wall: (i == 0).then_some(stiffness[0]),
            left: (i > 0).then(|| stiffness[i]),
            right: (i < 3).then(|| stiffness[i + 1]),
            driven: i == 0,
        })
        .collect();
    let relay = Relay {
        low: 4.0 - 0.05,
        high: 4.0 + 0.05,
        force: 2.0,
        lag: 0.2,
    };

    let mut connections = Vec::new();
    let link = |from: &str, out: &str, to: &str, inp: &str, init: f64| {
        Connection::new(PortRef::new(from, out), PortRef::new(to, inp)).with_initial(init)
    };
    for i in 0..3 {
        let (a, b) = (&masses[i], &masses[i + 1]);
        connections.push(link(&a.name, "p", &b.name, "p_left", a.rest));
        connections.push(link(&a.name, "v", &b.name, "v_left", 0.0));
        connections.push(link(&b.name, "p", &a.name, "p_right", b.rest));
        connections.push(link(&b.name, "v", &a.name, "v_right", 0.0));
    }
    connections.push(link("m4", "p", "relay", "p", masses[3].rest));
    connections.push(link("relay", "force", "m1", "force", 0.0));

    let mut blocks: Vec<Arc<dyn HybridBlock>> =
        masses.into_iter().map(|m| Arc::new(m) as Arc<dyn HybridBlock>).collect();
    blocks.push(Arc::new(relay));

    let mut solver = SolverConfig::rkf45(1e-9, 1e-11);
    solver.max_step = 1e-2;
    BenchmarkModel {
        name: "chain",
        description: "four-mass chain with a hysteresis relay and actuator lag",
        system: CoupledSystem::new(blocks, connections),
        default_period: 0.01,
        total_time: 10.0,
        reference_tolerance: 1e-9,
        compared_outputs: (1..=4).map(|i| PortRef::new(format!("m{i}"), "p")).collect(),
        solver,
    }
}
