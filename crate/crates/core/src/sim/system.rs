use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::{HybridBlock, SimError};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PortRef {
    pub block: String,
    pub port: String,
}

impl PortRef {
    pub fn new(block: impl Into<String>, port: impl Into<String>) -> Self {
        PortRef {
            block: block.into(),
            port: port.into(),
        }
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.block, self.port)
    }
}

/// A directed link from one block's output to another block's input.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    pub producer: PortRef,
    pub consumer: PortRef,
    /// Value the consumer sees before the first exchange has happened.
    pub initial_value: f64,
}

impl Connection {
    pub fn new(producer: PortRef, consumer: PortRef) -> Self {
        Connection {
            producer,
            consumer,
            initial_value: 0.0,
        }
    }

    pub fn with_initial(mut self, value: f64) -> Self {
        self.initial_value = value;
        self
    }
}

/// Blocks plus their wiring, before any decision about how it is simulated.
#[derive(Clone, Default)]
pub struct CoupledSystem {
    pub blocks: Vec<Arc<dyn HybridBlock>>,
    pub connections: Vec<Connection>,
}

impl fmt::Debug for CoupledSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.blocks.iter().map(|b| b.name()).collect();
        f.debug_struct("CoupledSystem")
            .field("blocks", &names)
            .field("connections", &self.connections)
            .finish()
    }
}

/// Resolved wiring: indices rather than names.
#[derive(Debug, Clone)]
pub(crate) struct Wiring {
    /// `(block, output)` for each connection.
    pub producers: Vec<(usize, usize)>,
    /// `(block, input)` for each connection.
    pub consumers: Vec<(usize, usize)>,
    /// For each block, the connection feeding each of its inputs.
    pub input_sources: Vec<Vec<usize>>,
    /// Block indices in evaluation order: non-feedthrough blocks first,
    /// feedthrough blocks after everything they read from.
    pub order: Vec<usize>,
}

impl CoupledSystem {
    pub fn new(blocks: Vec<Arc<dyn HybridBlock>>, connections: Vec<Connection>) -> Self {
        CoupledSystem {
            blocks,
            connections,
        }
    }

    pub fn block_index(&self, name: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.name() == name)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.wiring(None).map(|_| ())
    }

    /// Resolves names and checks the graph: every input wired exactly once,
    /// and no loop made only of feedthrough blocks. `preferred` is an
    /// optional user ordering that is respected where it is consistent.
    pub(crate) fn wiring(&self, preferred: Option<&[String]>) -> Result<Wiring, SimError> {
        let mut index = HashMap::new();
        for (i, b) in self.blocks.iter().enumerate() {
            if index.insert(b.name().to_string(), i).is_some() {
                return Err(SimError::DuplicateBlock(b.name().to_string()));
            }
        }
        let lookup = |r: &PortRef, outputs: bool| -> Result<(usize, usize), SimError> {
            let &b = index
                .get(&r.block)
                .ok_or_else(|| SimError::UnknownBlock(r.block.clone()))?;
            let names = if outputs {
                self.blocks[b].output_names()
            } else {
                self.blocks[b].input_names()
            };
            let p = names
                .iter()
                .position(|n| *n == r.port)
                .ok_or_else(|| SimError::UnknownPort {
                    block: r.block.clone(),
                    port: r.port.clone(),
                })?;
            Ok((b, p))
        };

        let mut producers = Vec::with_capacity(self.connections.len());
        let mut consumers = Vec::with_capacity(self.connections.len());
        let mut input_sources: Vec<Vec<Option<usize>>> = self
            .blocks
            .iter()
            .map(|b| vec![None; b.input_count()])
            .collect();
        for (c, conn) in self.connections.iter().enumerate() {
            producers.push(lookup(&conn.producer, true)?);
            let (b, p) = lookup(&conn.consumer, false)?;
            if input_sources[b][p].replace(c).is_some() {
                return Err(SimError::DoublyWiredInput {
                    block: conn.consumer.block.clone(),
                    port: conn.consumer.port.clone(),
                });
            }
            consumers.push((b, p));
        }
        let mut resolved = Vec::with_capacity(self.blocks.len());
        for (b, sources) in input_sources.into_iter().enumerate() {
            let names = self.blocks[b].input_names();
            let mut row = Vec::with_capacity(sources.len());
            for (p, s) in sources.into_iter().enumerate() {
                row.push(s.ok_or_else(|| SimError::UnwiredInput {
                    block: self.blocks[b].name().to_string(),
                    port: names[p].clone(),
                })?);
            }
            resolved.push(row);
        }

        let mut rank: Vec<usize> = (0..self.blocks.len()).collect();
        if let Some(pref) = preferred {
            for (pos, name) in pref.iter().enumerate() {
                let &b = index
                    .get(name)
                    .ok_or_else(|| SimError::UnknownBlock(name.clone()))?;
                rank[b] = pos;
            }
            for (b, r) in rank.iter_mut().enumerate() {
                if !pref.iter().any(|n| n == self.blocks[b].name()) {
                    *r = pref.len() + b;
                }
            }
        }
        let mut candidates: Vec<usize> = (0..self.blocks.len()).collect();
        candidates.sort_by_key(|&b| (self.blocks[b].direct_feedthrough(), rank[b]));

        let mut order = Vec::with_capacity(self.blocks.len());
        let mut placed = vec![false; self.blocks.len()];
        while order.len() < self.blocks.len() {
            let next = candidates.iter().copied().find(|&b| {
                !placed[b]
                    && (!self.blocks[b].direct_feedthrough()
                        || resolved[b].iter().all(|&c| {
                            let src = producers[c].0;
                            placed[src] || !self.blocks[src].direct_feedthrough()
                        }))
            });
            match next {
                Some(b) => {
                    placed[b] = true;
                    order.push(b);
                }
                None => {
                    let stuck = candidates.iter().find(|&&b| !placed[b]).copied().unwrap();
                    return Err(SimError::AlgebraicLoop(self.blocks[stuck].name().to_string()));
                }
            }
        }

        Ok(Wiring {
            producers,
            consumers,
            input_sources: resolved,
            order,
        })
    }
}
