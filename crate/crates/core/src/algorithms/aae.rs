// SPDX-License-Identifier: Apache-2.0

//! Active arm elimination with geometric epochs, optionally hardened for a
//! known corruption budget `C`, and the restarting wrapper for corruption
//! confined to an unknown prefix.
//!
//! Epoch `m` pulls every active arm `2^m * L` times, `L = ceil(ln(4K log2 T
//! / delta))`, in uniformly random order. When `C > 0` the epoch is padded
//! with pulls of the provisional winner up to `N_m = ceil(4C) + 2^m * L`.
//! At the end of the epoch arm `i` gets radius
//! `sqrt(L / (2 n_i)) + 2C / N_m` around `r_i = S_i / n_i`, and arms whose
//! upper bound falls below the best lower bound are eliminated for good.

use super::draw_from_counts;
use crate::error::{Error, Result};
use crate::instance::argmax;
use crate::protocol::Player;
use crate::rng::RngStream;

/// `ceil(ln(4K * log2 T / delta))`, with `log2 T` floored at 1.
pub fn aae_log_term(k: usize, delta: f64, horizon: u64) -> u64 {
    let log_t = (horizon as f64).log2().max(1.0);
    (4.0 * k as f64 * log_t / delta).ln().ceil().max(1.0) as u64
}

#[derive(Debug, Clone)]
pub struct Aae {
    k: usize,
    corruption_budget: f64,
    log_term: u64,
    active: Vec<bool>,
    winner: usize,
    m: u32,
    planned: Vec<u64>,
    epoch_len: u64,
    remaining: Vec<u64>,
    remaining_total: u64,
    sums: Vec<f64>,
}

impl Aae {
    pub fn new(k: usize, delta: f64, horizon: u64, corruption_budget: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::param("k", format!("{k} < 2")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::param("delta", format!("{delta} is not in (0, 1)")));
        }
        if !(corruption_budget.is_finite() && corruption_budget >= 0.0) {
            return Err(Error::param(
                "corruption_budget",
                format!("{corruption_budget} must be finite and >= 0"),
            ));
        }
        let mut aae = Self {
            k,
            corruption_budget,
            log_term: aae_log_term(k, delta, horizon),
            active: vec![true; k],
            winner: 0,
            m: 1,
            planned: vec![0; k],
            epoch_len: 0,
            remaining: vec![0; k],
            remaining_total: 0,
            sums: vec![0.0; k],
        };
        aae.start_epoch();
        Ok(aae)
    }

    /// Target epoch length `ceil(4C) + 2^m * L`.
    pub fn schedule(&self, m: u32) -> u64 {
        let base = 2u64.saturating_pow(m).saturating_mul(self.log_term);
        ((4.0 * self.corruption_budget).ceil() as u64).saturating_add(base)
    }

    pub fn epoch(&self) -> u32 {
        self.m
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    pub fn epoch_len(&self) -> u64 {
        self.epoch_len
    }

    pub fn planned(&self) -> &[u64] {
        &self.planned
    }

    fn start_epoch(&mut self) {
        let per_arm = 2u64.saturating_pow(self.m).saturating_mul(self.log_term);
        for i in 0..self.k {
            self.planned[i] = if self.active[i] { per_arm } else { 0 };
        }
        let base: u64 = self.planned.iter().sum();
        let pad = self.schedule(self.m).saturating_sub(base);
        self.planned[self.winner] += pad;
        self.epoch_len = base + pad;
        self.remaining.copy_from_slice(&self.planned);
        self.remaining_total = self.epoch_len;
        self.sums.iter_mut().for_each(|s| *s = 0.0);
    }

    /// Confidence radius for an arm with `n` pulls in the current epoch.
    pub fn radius(&self, n: u64) -> f64 {
        (self.log_term as f64 / (2.0 * n as f64)).sqrt() + 2.0 * self.corruption_budget / self.epoch_len as f64
    }

    fn close_epoch(&mut self) {
        let means: Vec<f64> = (0..self.k)
            .map(|i| {
                if self.active[i] {
                    self.sums[i] / self.planned[i] as f64
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        let radii: Vec<f64> = (0..self.k)
            .map(|i| if self.active[i] { self.radius(self.planned[i]) } else { 0.0 })
            .collect();
        let lower: Vec<f64> = means.iter().zip(&radii).map(|(r, w)| r - w).collect();
        let best_lower = lower[argmax(&lower)];
        for i in 0..self.k {
            if self.active[i] && means[i] + radii[i] < best_lower {
                self.active[i] = false;
            }
        }
        self.winner = argmax(&means);
        self.m += 1;
        self.start_epoch();
    }
}

impl Player for Aae {
    fn name(&self) -> &'static str {
        if self.corruption_budget > 0.0 {
            "aae_known_c"
        } else {
            "aae"
        }
    }

    fn select_arm(&mut self, rng: &mut RngStream) -> usize {
        draw_from_counts(&self.remaining, self.remaining_total, rng)
    }

    fn observe(&mut self, arm: usize, reward: f64) {
        self.remaining[arm] -= 1;
        self.remaining_total -= 1;
        self.sums[arm] += reward;
        if self.remaining_total == 0 {
            self.close_epoch();
        }
    }
}

/// Runs a fresh [`Aae`] on each window `[2^j, 2^{j+1})`.
#[derive(Debug, Clone)]
pub struct RestartAae {
    k: usize,
    delta: f64,
    horizon: u64,
    t: u64,
    window_start: u64,
    inner: Aae,
    inner_rounds: u64,
}

impl RestartAae {
    pub fn new(k: usize, delta: f64, horizon: u64) -> Result<Self> {
        let inner = Aae::new(k, delta, 1, 0.0)?;
        Ok(Self {
            k,
            delta,
            horizon,
            t: 0,
            window_start: 1,
            inner,
            inner_rounds: 0,
        })
    }

    /// First round of the current window.
    pub fn window_start(&self) -> u64 {
        self.window_start
    }

    /// Rounds played by the current inner instance.
    pub fn inner_rounds(&self) -> u64 {
        self.inner_rounds
    }

    pub fn inner(&self) -> &Aae {
        &self.inner
    }

    fn maybe_restart(&mut self, t: u64) {
        if t.is_power_of_two() && t != self.window_start {
            let window = t.min(self.horizon.saturating_sub(t) + 1);
            self.window_start = t;
            self.inner = Aae::new(self.k, self.delta, window.max(1), 0.0).expect("parameters validated at construction");
            self.inner_rounds = 0;
        }
    }
}

impl Player for RestartAae {
    fn name(&self) -> &'static str {
        "restart_aae"
    }

    fn select_arm(&mut self, rng: &mut RngStream) -> usize {
        self.maybe_restart(self.t + 1);
        self.inner.select_arm(rng)
    }

    fn observe(&mut self, arm: usize, reward: f64) {
        self.t += 1;
        self.inner_rounds += 1;
        self.inner.observe(arm, reward);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Role;

    #[test]
    fn zero_budget_is_plain_geometric_aae() {
        let aae = Aae::new(3, 0.05, 1 << 14, 0.0).unwrap();
        let l = aae_log_term(3, 0.05, 1 << 14);
        assert_eq!(aae.planned(), &[2 * l, 2 * l, 2 * l]);
        assert_eq!(aae.epoch_len(), 6 * l);
        assert_eq!(aae.schedule(3), 8 * l);
    }

    #[test]
    fn budget_pads_the_epoch() {
        let aae = Aae::new(2, 0.05, 1 << 14, 10_000.0).unwrap();
        assert!(aae.epoch_len() >= 40_000);
        assert_eq!(aae.epoch_len(), aae.schedule(1));
        // Padding goes to the provisional winner.
        assert!(aae.planned()[0] > aae.planned()[1]);
        assert!(Aae::new(2, 0.05, 100, -1.0).is_err());
    }

    #[test]
    fn eliminates_a_dominated_arm_on_deterministic_feed() {
        let mut aae = Aae::new(2, 0.05, 1 << 16, 0.0).unwrap();
        let mut rng = RngStream::new(0, 0, Role::Player);
        for _ in 0..20_000 {
            let arm = aae.select_arm(&mut rng);
            aae.observe(arm, if arm == 1 { 1.0 } else { 0.0 });
        }
        assert_eq!(aae.active(), &[false, true]);
    }

    #[test]
    fn restart_boundaries() {
        let mut alg = RestartAae::new(2, 0.05, 1000).unwrap();
        let mut rng = RngStream::new(0, 0, Role::Player);
        for t in 1..=300u64 {
            let arm = alg.select_arm(&mut rng);
            if t.is_power_of_two() {
                assert_eq!(alg.window_start(), t);
                assert_eq!(alg.inner_rounds(), 0);
                assert_eq!(alg.inner().epoch(), 1);
            }
            alg.observe(arm, 0.5);
        }
    }
}
