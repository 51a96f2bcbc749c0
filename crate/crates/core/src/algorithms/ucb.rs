// SPDX-License-Identifier: Apache-2.0

use crate::instance::argmax;
use crate::protocol::Player;
use crate::rng::RngStream;

/// UCB1: pull each arm once, then maximize `mean_i + sqrt(2 ln t / n_i)`
/// with `t` the number of pulls so far.
#[derive(Debug, Clone)]
pub struct Ucb {
    counts: Vec<u64>,
    sums: Vec<f64>,
    t: u64,
}

impl Ucb {
    pub fn new(k: usize) -> Self {
        Self {
            counts: vec![0; k],
            sums: vec![0.0; k],
            t: 0,
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Index of `arm` at the current time; infinite for unpulled arms.
    pub fn index(&self, arm: usize) -> f64 {
        let n = self.counts[arm];
        if n == 0 {
            return f64::INFINITY;
        }
        let mean = self.sums[arm] / n as f64;
        mean + (2.0 * (self.t as f64).ln() / n as f64).sqrt()
    }
}

impl Player for Ucb {
    fn name(&self) -> &'static str {
        "ucb"
    }

    fn select_arm(&mut self, _rng: &mut RngStream) -> usize {
        let indices: Vec<f64> = (0..self.counts.len()).map(|i| self.index(i)).collect();
        argmax(&indices)
    }

    fn observe(&mut self, arm: usize, reward: f64) {
        self.counts[arm] += 1;
        self.sums[arm] += reward;
        self.t += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Role;

    #[test]
    fn dominant_arm_has_larger_index() {
        let mut ucb = Ucb::new(2);
        ucb.observe(0, 1.0);
        ucb.observe(1, 0.0);
        assert!(ucb.index(0) > ucb.index(1));
        let mut rng = RngStream::new(0, 0, Role::Player);
        assert_eq!(ucb.select_arm(&mut rng), 0);
    }

    #[test]
    fn unpulled_arms_first() {
        let mut ucb = Ucb::new(3);
        let mut rng = RngStream::new(0, 0, Role::Player);
        for expected in 0..3 {
            let arm = ucb.select_arm(&mut rng);
            assert_eq!(arm, expected);
            ucb.observe(arm, 1.0);
        }
    }
}
