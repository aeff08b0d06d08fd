use rand::Rng;
use rowplan_core::env::OBS_DIM;

use crate::qnet::MaskKey;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub obs: [f32; OBS_DIM],
    pub action: usize,
    pub reward: f32,
    pub next_obs: [f32; OBS_DIM],
    /// Goal reached. Running out of steps is not terminal.
    pub done: bool,
    /// Identifies the valid actions in the next state.
    pub next_mask: MaskKey,
}

/// Fixed-capacity ring buffer; once full, each push overwrites the oldest entry.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    head: usize,
    pushed: u64,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            head: 0,
            pushed: 0,
        }
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.head] = t;
        }
        self.head = (self.head + 1) % self.capacity;
        self.pushed += 1;
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Total pushes since creation, including overwritten ones.
    pub fn total_pushed(&self) -> u64 {
        self.pushed
    }

    /// Stored transitions from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> + '_ {
        let split = if self.items.len() < self.capacity { 0 } else { self.head };
        self.items[split..].iter().chain(&self.items[..split])
    }

    /// `n` transitions drawn uniformly with replacement; `None` while fewer
    /// than `n` are stored.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Option<Vec<Transition>> {
        if n == 0 || self.items.len() < n {
            return None;
        }
        Some(
            (0..n)
                .map(|_| self.items[rng.random_range(0..self.items.len())])
                .collect(),
        )
    }
}
