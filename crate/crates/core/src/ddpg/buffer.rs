use rand::Rng;

use crate::scalar::Scalar;

/// One stored experience, with state and action in normalized coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition<T = f64> {
    pub state: [T; 3],
    pub action: T,
    pub reward: T,
    pub next_state: [T; 3],
    /// Terminal (no bootstrapping from `next_state`).
    pub done: bool,
}

/// Fixed-capacity ring of transitions; the oldest entry is overwritten first.
#[derive(Debug, Clone)]
pub struct ReplayBuffer<T = f64> {
    capacity: usize,
    items: Vec<Transition<T>>,
    cursor: usize,
}

impl<T: Scalar> ReplayBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay buffer capacity must be positive");
        Self {
            capacity,
            items: Vec::with_capacity(capacity.min(1 << 20)),
            cursor: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, t: Transition<T>) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition<T>> {
        self.items.iter()
    }

    /// Uniform sample of `n` distinct entries; `None` when fewer are stored.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Option<Vec<Transition<T>>> {
        if n > self.items.len() {
            return None;
        }
        Some(
            rand::seq::index::sample(rng, self.items.len(), n)
                .into_iter()
                .map(|i| self.items[i])
                .collect(),
        )
    }
}
