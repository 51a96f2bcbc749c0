// SPDX-License-Identifier: Apache-2.0

use rand::Rng;

use crate::protocol::Player;
use crate::rng::RngStream;

/// Exp3 on importance-weighted losses with rate `sqrt(ln K / (T K))`.
///
/// Weights are kept in log space; `p = softmax(log_w)`. After pulling arm
/// `i` with reward `r`, `log_w[i] -= rate * (1 - r) / p[i]`.
#[derive(Debug, Clone)]
pub struct Exp3 {
    rate: f64,
    log_weights: Vec<f64>,
    probs: Vec<f64>,
}

impl Exp3 {
    pub fn new(k: usize, horizon: u64) -> Self {
        let rate = ((k as f64).ln() / (horizon as f64 * k as f64)).sqrt();
        Self::with_rate(k, rate)
    }

    pub fn with_rate(k: usize, rate: f64) -> Self {
        Self {
            rate,
            log_weights: vec![0.0; k],
            probs: vec![1.0 / k as f64; k],
        }
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    fn refresh(&mut self) {
        let max = self.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for (p, &lw) in self.probs.iter_mut().zip(&self.log_weights) {
            *p = (lw - max).exp();
            total += *p;
        }
        self.probs.iter_mut().for_each(|p| *p /= total);
    }
}

impl Player for Exp3 {
    fn name(&self) -> &'static str {
        "exp3"
    }

    fn select_arm(&mut self, rng: &mut RngStream) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.probs.len() - 1
    }

    fn observe(&mut self, arm: usize, reward: f64) {
        let loss = (1.0 - reward) / self.probs[arm];
        self.log_weights[arm] -= self.rate * loss;
        self.refresh();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Role;

    #[test]
    fn equal_full_rewards_keep_weights_uniform() {
        let mut exp3 = Exp3::new(4, 1000);
        let mut rng = RngStream::new(0, 0, Role::Player);
        for _ in 0..1000 {
            let arm = exp3.select_arm(&mut rng);
            exp3.observe(arm, 1.0);
        }
        assert!(exp3.probabilities().iter().all(|&p| p == 0.25));
    }

    #[test]
    fn distribution_sums_to_one() {
        let mut exp3 = Exp3::with_rate(5, 0.3);
        let mut rng = RngStream::new(1, 0, Role::Player);
        for t in 0..2000 {
            let arm = exp3.select_arm(&mut rng);
            exp3.observe(arm, if arm == 3 { 0.9 } else { (t % 3) as f64 / 3.0 });
            let total: f64 = exp3.probabilities().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        // Arm 3 pays best and should dominate.
        assert!(exp3.probabilities()[3] > 0.5);
    }

    #[test]
    fn rate_formula() {
        let exp3 = Exp3::new(2, 10_000);
        assert!((exp3.rate() - (2f64.ln() / 20_000.0).sqrt()).abs() < 1e-18);
    }
}
