use std::collections::VecDeque;

use rand::rngs::StdRng;

/// One environment transition. All tasks here observe 4 numbers and choose
/// between 2 actions, so a fixed-size state keeps the buffer allocation-free.
#[derive(Debug, Clone, Copy)]
pub struct Transition {
    pub state: [f64; 4],
    pub action: usize,
    pub reward: f64,
    pub next: [f64; 4],
    pub done: bool,
}

/// FIFO experience buffer with uniform sampling without replacement.
pub struct ReplayBuffer {
    cap: usize,
    buf: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(cap: usize) -> Self {
        assert!(cap >= 1);
        ReplayBuffer {
            cap,
            buf: VecDeque::with_capacity(cap),
        }
    }

    pub fn push(&mut self, t: Transition) {
        if self.buf.len() == self.cap {
            self.buf.pop_front();
        }
        self.buf.push_back(t);
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.cap
    }

    pub fn clear(&mut self) {
        self.buf.clear();
    }

    pub fn get(&self, i: usize) -> &Transition {
        &self.buf[i]
    }

    /// `k` distinct indices, uniform over the buffer, in draw order.
    pub fn sample_indices(&self, k: usize, rng: &mut StdRng) -> Vec<usize> {
        assert!(k <= self.buf.len());
        rand::seq::index::sample(rng, self.buf.len(), k).into_vec()
    }
}
