use super::EventRecord;
use crate::chopatt::ContextId;

/// States and outputs of one block on the output grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BlockTrace {
    pub name: String,
    pub output_names: Vec<String>,
    /// `states[k]` is the continuous state at `SimulationTrace::times[k]`.
    pub states: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
}

impl BlockTrace {
    pub fn output_series(&self, port: usize) -> Vec<f64> {
        self.outputs.iter().map(|y| y[port]).collect()
    }

    pub fn state_series(&self, index: usize) -> Vec<f64> {
        self.states.iter().map(|x| x[index]).collect()
    }
}

/// A value pushed into a channel at a sync point.
#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeRecord {
    pub time: f64,
    pub channel: usize,
    pub value: f64,
}

/// One decision of a channel's context machine.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextRow {
    pub time: f64,
    pub channel: usize,
    pub context: ContextId,
    pub rho: f64,
    pub gamma: f64,
    pub omega_best: f64,
    /// What the previous predictor said this sample would be.
    pub prediction: f64,
    pub actual: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimulationTrace {
    pub times: Vec<f64>,
    pub blocks: Vec<BlockTrace>,
    pub exchanges: Vec<ExchangeRecord>,
    pub contexts: Vec<ContextRow>,
    pub events: Vec<EventRecord>,
}

impl SimulationTrace {
    pub fn is_empty(&self) -> bool {
        self.times.is_empty() && self.blocks.is_empty()
    }

    pub fn block(&self, name: &str) -> Option<&BlockTrace> {
        self.blocks.iter().find(|b| b.name == name)
    }

    /// Output series addressed as `block.port`.
    pub fn output(&self, block: &str, port: &str) -> Option<Vec<f64>> {
        let b = self.block(block)?;
        let p = b.output_names.iter().position(|n| n == port)?;
        Some(b.output_series(p))
    }
}
