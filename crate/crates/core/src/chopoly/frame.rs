use std::collections::VecDeque;

/// Hopping buffer of the most recent samples of one signal.
///
/// Index 0 is the last known sample `u_0`, index 1 is `u_{-1}`, and so on.
/// Pushing a sample shifts every index by one and drops the oldest sample
/// once `capacity` is reached.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleFrame {
    samples: VecDeque<f64>,
    capacity: usize,
}

impl SampleFrame {
    pub fn with_capacity(capacity: usize) -> Self {
        let capacity = capacity.max(1);
        SampleFrame {
            samples: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    /// Builds a full frame from samples ordered most-recent-first.
    pub fn from_recent(recent_first: &[f64]) -> Self {
        let mut frame = SampleFrame::with_capacity(recent_first.len());
        frame.samples.extend(recent_first.iter().copied());
        frame
    }

    pub fn push(&mut self, value: f64) {
        if self.samples.len() == self.capacity {
            self.samples.pop_back();
        }
        self.samples.push_front(value);
    }

    /// Sample `u_{-lag}`; `None` past the valid samples.
    pub fn get(&self, lag: usize) -> Option<f64> {
        self.samples.get(lag).copied()
    }

    pub fn latest(&self) -> Option<f64> {
        self.get(0)
    }

    pub fn valid_count(&self) -> usize {
        self.samples.len()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn clear(&mut self) {
        self.samples.clear();
    }

    /// Iterates `u_0, u_{-1}, ...` over the valid samples.
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().copied()
    }

    pub fn scaled(&self, factor: f64) -> SampleFrame {
        SampleFrame {
            samples: self.samples.iter().map(|u| u * factor).collect(),
            capacity: self.capacity,
        }
    }
}
