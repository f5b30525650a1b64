use std::sync::Arc;

use super::system::Wiring;
use super::{
    integrate_interval, ticks_to_time, time_to_ticks, BlockState, BlockTrace, CoupledSystem,
    HybridBlock, SimError, SimulationTrace, SolverConfig,
};

/// A whole coupled system wired directly, as a single block without inputs.
///
/// Outputs are evaluated in dependency order at every solver stage, so the
/// sub-blocks see each other without delay. The composite's outputs are all
/// sub-block outputs, named `block.port`.
pub struct Composite {
    name: String,
    blocks: Vec<Arc<dyn HybridBlock>>,
    wiring: Wiring,
    x_off: Vec<usize>,
    d_off: Vec<usize>,
    e_off: Vec<usize>,
    y_off: Vec<usize>,
}

fn offsets(lengths: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut acc = 0;
    let mut out = vec![0];
    for n in lengths {
        acc += n;
        out.push(acc);
    }
    out
}

impl Composite {
    pub fn new(name: impl Into<String>, system: &CoupledSystem) -> Result<Self, SimError> {
        let wiring = system.wiring(None)?;
        let blocks = system.blocks.clone();
        let initial: Vec<BlockState> = blocks.iter().map(|b| b.initial_state()).collect();
        Ok(Composite {
            name: name.into(),
            x_off: offsets(initial.iter().map(|s| s.continuous.len())),
            d_off: offsets(initial.iter().map(|s| s.discrete.len())),
            e_off: offsets(blocks.iter().map(|b| b.event_count())),
            y_off: offsets(blocks.iter().map(|b| b.output_count())),
            blocks,
            wiring,
        })
    }

    pub fn blocks(&self) -> &[Arc<dyn HybridBlock>] {
        &self.blocks
    }

    fn slice<'a>(&self, v: &'a [f64], off: &[usize], b: usize) -> &'a [f64] {
        &v[off[b]..off[b + 1]]
    }

    fn inputs_from(&self, b: usize, y: &[f64], u: &mut Vec<f64>) {
        u.clear();
        u.extend(self.wiring.input_sources[b].iter().map(|&c| {
            let (p, port) = self.wiring.producers[c];
            y[self.y_off[p] + port]
        }));
    }

    fn all_outputs(&self, t: f64, x: &[f64], d: &[f64], y: &mut [f64]) {
        let mut u = Vec::new();
        for &b in &self.wiring.order {
            self.inputs_from(b, y, &mut u);
            let (lo, hi) = (self.y_off[b], self.y_off[b + 1]);
            let mut yb = vec![0.0; hi - lo];
            self.blocks[b].outputs(
                t,
                self.slice(x, &self.x_off, b),
                self.slice(d, &self.d_off, b),
                &u,
                &mut yb,
            );
            y[lo..hi].copy_from_slice(&yb);
        }
    }

    fn y_len(&self) -> usize {
        *self.y_off.last().unwrap()
    }
}

impl HybridBlock for Composite {
    fn name(&self) -> &str {
        &self.name
    }

    fn input_names(&self) -> Vec<String> {
        Vec::new()
    }

    fn output_names(&self) -> Vec<String> {
        self.blocks
            .iter()
            .flat_map(|b| {
                let name = b.name().to_string();
                b.output_names().into_iter().map(move |p| format!("{name}.{p}"))
            })
            .collect()
    }

    fn initial_state(&self) -> BlockState {
        let mut x = Vec::new();
        let mut d = Vec::new();
        for b in &self.blocks {
            let s = b.initial_state();
            x.extend(s.continuous);
            d.extend(s.discrete);
        }
        BlockState::new(x, d)
    }

    fn derivatives(&self, t: f64, x: &[f64], d: &[f64], _u: &[f64], dx: &mut [f64]) {
        let mut y = vec![0.0; self.y_len()];
        self.all_outputs(t, x, d, &mut y);
        let mut u = Vec::new();
        for b in 0..self.blocks.len() {
            self.inputs_from(b, &y, &mut u);
            let (lo, hi) = (self.x_off[b], self.x_off[b + 1]);
            self.blocks[b].derivatives(
                t,
                &x[lo..hi],
                self.slice(d, &self.d_off, b),
                &u,
                &mut dx[lo..hi],
            );
        }
    }

    fn outputs(&self, t: f64, x: &[f64], d: &[f64], _u: &[f64], y: &mut [f64]) {
        self.all_outputs(t, x, d, y);
    }

    fn event_count(&self) -> usize {
        *self.e_off.last().unwrap()
    }

    fn event_indicators(&self, t: f64, x: &[f64], d: &[f64], _u: &[f64], h: &mut [f64]) {
        if self.event_count() == 0 {
            return;
        }
        let mut y = vec![0.0; self.y_len()];
        self.all_outputs(t, x, d, &mut y);
        let mut u = Vec::new();
        for b in 0..self.blocks.len() {
            let (lo, hi) = (self.e_off[b], self.e_off[b + 1]);
            if lo == hi {
                continue;
            }
            self.inputs_from(b, &y, &mut u);
            self.blocks[b].event_indicators(
                t,
                self.slice(x, &self.x_off, b),
                self.slice(d, &self.d_off, b),
                &u,
                &mut h[lo..hi],
            );
        }
    }

    fn handle_events(&self, t: f64, fired: &[usize], x: &mut [f64], d: &mut [f64], _u: &[f64]) {
        let mut y = vec![0.0; self.y_len()];
        self.all_outputs(t, x, d, &mut y);
        let mut u = Vec::new();
        for b in 0..self.blocks.len() {
            let (lo, hi) = (self.e_off[b], self.e_off[b + 1]);
            let local: Vec<usize> = fired
                .iter()
                .filter(|&&i| i >= lo && i < hi)
                .map(|&i| i - lo)
                .collect();
            if local.is_empty() {
                continue;
            }
            self.inputs_from(b, &y, &mut u);
            let (xl, xh) = (self.x_off[b], self.x_off[b + 1]);
            let (dl, dh) = (self.d_off[b], self.d_off[b + 1]);
            self.blocks[b].handle_events(t, &local, &mut x[xl..xh], &mut d[dl..dh], &u);
        }
    }

    fn direct_feedthrough(&self) -> bool {
        false
    }
}

/// Integrates the unsplit system in one pass and reports it on the output
/// grid in the same per-block layout as [`super::run_master`].
pub fn monolithic_reference(
    system: &CoupledSystem,
    solver: &SolverConfig,
    total_time: f64,
    output_step: f64,
) -> Result<SimulationTrace, SimError> {
    solver.validate()?;
    if system.blocks.is_empty() {
        return Ok(SimulationTrace::default());
    }
    let composite = Composite::new("monolithic", system)?;
    let end = time_to_ticks(total_time)?;
    let step = time_to_ticks(output_step)?;
    let grid: Vec<f64> = (1..)
        .map(|k| k * step)
        .take_while(|&tk| tk <= end)
        .map(ticks_to_time)
        .collect();

    let mut state = composite.initial_state();
    let mut y0 = vec![0.0; composite.output_count()];
    composite.outputs(0.0, &state.continuous, &state.discrete, &[], &mut y0);
    let x0 = state.continuous.clone();
    let t_end = ticks_to_time(end);
    let outcome = integrate_interval(&composite, &mut state, 0.0, t_end, &|_, _| {}, solver, &grid)?;

    let mut times = vec![0.0];
    times.extend(outcome.samples.iter().map(|s| s.time));
    let mut blocks = Vec::with_capacity(composite.blocks.len());
    for (b, model) in composite.blocks.iter().enumerate() {
        let (xl, xh) = (composite.x_off[b], composite.x_off[b + 1]);
        let (yl, yh) = (composite.y_off[b], composite.y_off[b + 1]);
        let mut trace = BlockTrace {
            name: model.name().to_string(),
            output_names: model.output_names(),
            states: vec![x0[xl..xh].to_vec()],
            outputs: vec![y0[yl..yh].to_vec()],
        };
        for s in &outcome.samples {
            trace.states.push(s.continuous[xl..xh].to_vec());
            trace.outputs.push(s.outputs[yl..yh].to_vec());
        }
        blocks.push(trace);
    }
    Ok(SimulationTrace {
        times,
        blocks,
        exchanges: Vec::new(),
        contexts: Vec::new(),
        events: outcome.events,
    })
}
