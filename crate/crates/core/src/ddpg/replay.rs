//! Fixed-capacity FIFO replay buffer with uniform sampling.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// One environment interaction: `(s, a, r, s', done)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
}

/// Ring buffer over transitions. Once full, each push evicts the oldest
/// entry (strict FIFO). Sampling is uniform with replacement over the
/// currently stored transitions only — a slot is never read before it has
/// been written.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    slots: Vec<Transition>,
    capacity: usize,
    write_head: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> ReplayBuffer {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer {
            slots: Vec::new(),
            capacity,
            write_head: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn push(&mut self, transition: Transition) {
        if self.slots.len() < self.capacity {
            self.slots.push(transition);
        } else {
            self.slots[self.write_head] = transition;
        }
        self.write_head = (self.write_head + 1) % self.capacity;
    }

    pub fn get(&self, index: usize) -> &Transition {
        &self.slots[index]
    }

    /// Uniform indices into the stored transitions, with replacement.
    pub fn sample_indices(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
        assert!(!self.slots.is_empty(), "cannot sample from an empty buffer");
        (0..n).map(|_| rng.gen_range(0..self.slots.len())).collect()
    }
}
