//! Recency-ranked replay memory: entries ordered newest first, sampled with
//! probability proportional to 1/rank.

use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use dvsl_env::Transition;

#[derive(Debug, Clone)]
pub struct ReplayMemory {
    capacity: usize,
    entries: VecDeque<Transition>,
    /// Prefix sums of the harmonic series: harmonic[i] = H(i + 1).
    harmonic: Vec<f64>,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayMemory { capacity, entries: VecDeque::with_capacity(capacity), harmonic: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Newest entries first: rank(front) = 1. The oldest entry is evicted
    /// once the memory is full.
    pub fn push(&mut self, t: Transition) {
        if self.entries.len() == self.capacity {
            self.entries.pop_back();
        }
        self.entries.push_front(t);
        while self.harmonic.len() < self.entries.len() {
            let next = self.harmonic.last().copied().unwrap_or(0.0)
                + 1.0 / (self.harmonic.len() as f64 + 1.0);
            self.harmonic.push(next);
        }
    }

    pub fn get_by_rank(&self, rank: usize) -> Option<&Transition> {
        self.entries.get(rank - 1)
    }

    /// Normalized sampling distribution over current ranks, 1/rank each.
    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.entries.len();
        if n == 0 {
            return Vec::new();
        }
        let total = self.harmonic[n - 1];
        (1..=n).map(|rank| 1.0 / rank as f64 / total).collect()
    }

    /// Draws one rank (1-based) with probability 1/rank, normalized.
    pub fn sample_rank(&self, rng: &mut ChaCha8Rng) -> usize {
        let n = self.entries.len();
        debug_assert!(n > 0);
        let u = rng.random_range(0.0..self.harmonic[n - 1]);
        self.harmonic[..n].partition_point(|&h| h <= u) + 1
    }

    /// `k` transitions with replacement; `None` signals the caller to skip
    /// the update because the memory is still too small.
    pub fn sample_minibatch(&self, k: usize, rng: &mut ChaCha8Rng) -> Option<Vec<Transition>> {
        if self.entries.len() < k {
            return None;
        }
        Some((0..k).map(|_| self.entries[self.sample_rank(rng) - 1]).collect())
    }
}
