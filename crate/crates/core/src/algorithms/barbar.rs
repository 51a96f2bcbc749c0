// SPDX-License-Identifier: Apache-2.0

//! BARBAR and its known-`mu*` variant.
//!
//! Epoch `m` plays arm `i` with probability `n_i^m / N_m` where
//! `n_i^m = ceil(lambda / (gap_i^{m-1})^2)`. At the end of the epoch the
//! per-arm estimate is `r_i = S_i / n_i^m` (planned count, not the realized
//! one), the reference is `r* = max_i (r_i - gap_i^{m-1} / 16)`, and the new
//! gap estimate is `max(2^-m, r* - r_i)`, clamped to at most 1.

use rand::Rng;

use super::{EpochFamily, EpochRecord};
use crate::error::{Error, Result};
use crate::instance::argmax;
use crate::protocol::Player;
use crate::rng::RngStream;

/// `1024 * ln((8K / delta) * log2 T)`.
pub fn barbar_lambda(k: usize, delta: f64, horizon: u64) -> f64 {
    1024.0 * ((8.0 * k as f64 / delta) * (horizon as f64).log2()).ln()
}

/// Planned pulls for one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochPlan {
    pub planned: Vec<u64>,
    pub total: u64,
}

impl EpochPlan {
    /// Sampling weights `q_i = n_i / N`.
    pub fn weights(&self) -> Vec<f64> {
        self.planned
            .iter()
            .map(|&n| n as f64 / self.total as f64)
            .collect()
    }
}

/// `n_i = ceil(lambda * gap_i^-2)` for each arm.
pub fn epoch_plan(lambda: f64, gaps_prev: &[f64]) -> EpochPlan {
    let planned: Vec<u64> = gaps_prev
        .iter()
        .map(|&g| ((lambda / (g * g)).ceil() as u64).max(1))
        .collect();
    let total = planned.iter().fold(0u64, |acc, &n| acc.saturating_add(n));
    EpochPlan { planned, total }
}

/// Outcome of closing an epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct GapUpdate {
    pub r_star: f64,
    /// Arm attaining `r*` (lowest index on ties).
    pub leader: usize,
    pub gaps: Vec<f64>,
}

fn reference_reward(means: &[f64], gaps_prev: &[f64]) -> (f64, usize) {
    let adjusted: Vec<f64> = means
        .iter()
        .zip(gaps_prev)
        .map(|(&r, &g)| r - g / 16.0)
        .collect();
    let leader = argmax(&adjusted);
    (adjusted[leader], leader)
}

fn floor_gap(m: u32) -> f64 {
    0.5f64.powi(m as i32)
}

/// Standard gap update: `max(2^-m, r* - r_i)`, clamped to `<= 1`.
pub fn close_gaps(m: u32, means: &[f64], gaps_prev: &[f64]) -> GapUpdate {
    let (r_star, leader) = reference_reward(means, gaps_prev);
    let floor = floor_gap(m);
    let gaps = means
        .iter()
        .map(|&r| floor.max(r_star - r).min(1.0))
        .collect();
    GapUpdate {
        r_star,
        leader,
        gaps,
    }
}

/// Known-`mu*` update: `max(2^-m, mu* - r_i, gap_i^{m-1} / 2)`, clamped to `<= 1`.
pub fn close_gaps_known_mu_star(m: u32, means: &[f64], gaps_prev: &[f64], mu_star: f64) -> GapUpdate {
    let (r_star, leader) = reference_reward(means, gaps_prev);
    let floor = floor_gap(m);
    let gaps = means
        .iter()
        .zip(gaps_prev)
        .map(|(&r, &g)| floor.max(mu_star - r).max(g / 2.0).min(1.0))
        .collect();
    GapUpdate {
        r_star,
        leader,
        gaps,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GapRule {
    Standard,
    KnownMuStar(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarbarParams {
    pub k: usize,
    pub delta: f64,
    pub horizon: u64,
    pub lambda_scale: f64,
    pub rule: GapRule,
}

impl BarbarParams {
    pub fn new(k: usize, delta: f64, horizon: u64) -> Self {
        Self {
            k,
            delta,
            horizon,
            lambda_scale: 1.0,
            rule: GapRule::Standard,
        }
    }

    pub fn with_lambda_scale(mut self, scale: f64) -> Self {
        self.lambda_scale = scale;
        self
    }

    pub fn with_known_mu_star(mut self, mu_star: f64) -> Self {
        self.rule = GapRule::KnownMuStar(mu_star);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::param("k", format!("{} < 2", self.k)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::param("delta", format!("{} is not in (0, 1)", self.delta)));
        }
        if self.horizon < 2 {
            return Err(Error::param("horizon", format!("{} < 2", self.horizon)));
        }
        if !(self.lambda_scale.is_finite() && self.lambda_scale > 0.0) {
            return Err(Error::param("lambda_scale", "must be finite and > 0"));
        }
        if let GapRule::KnownMuStar(mu) = self.rule {
            if !(0.0..=1.0).contains(&mu) {
                return Err(Error::param("mu_star", format!("{mu} is not in [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn lambda(&self) -> f64 {
        self.lambda_scale * barbar_lambda(self.k, self.delta, self.horizon)
    }
}

/// Running BARBAR state. Observation and epoch bookkeeping are
/// deterministic given the observed `(arm, reward)` sequence, so the same
/// type doubles as an adversary-side shadow of the player.
#[derive(Debug, Clone)]
pub struct BarbarState {
    params: BarbarParams,
    lambda: f64,
    m: u32,
    gaps_prev: Vec<f64>,
    plan: EpochPlan,
    cumulative: Vec<u64>,
    epoch_start: u64,
    elapsed: u64,
    sums: Vec<f64>,
    pulls: Vec<u64>,
    records: Vec<EpochRecord>,
}

impl BarbarState {
    pub fn new(params: BarbarParams) -> Result<Self> {
        params.validate()?;
        let k = params.k;
        let lambda = params.lambda();
        let mut state = Self {
            params,
            lambda,
            m: 1,
            gaps_prev: vec![1.0; k],
            plan: EpochPlan {
                planned: Vec::new(),
                total: 0,
            },
            cumulative: Vec::new(),
            epoch_start: 0,
            elapsed: 0,
            sums: vec![0.0; k],
            pulls: vec![0; k],
            records: Vec::new(),
        };
        state.install_plan();
        Ok(state)
    }

    fn install_plan(&mut self) {
        self.plan = epoch_plan(self.lambda, &self.gaps_prev);
        let mut acc = 0u64;
        self.cumulative = self
            .plan
            .planned
            .iter()
            .map(|&n| {
                acc = acc.saturating_add(n);
                acc
            })
            .collect();
    }

    pub fn params(&self) -> &BarbarParams {
        &self.params
    }

    pub fn lambda_value(&self) -> f64 {
        self.lambda
    }

    /// Current epoch index `m` (1-based).
    pub fn epoch(&self) -> u32 {
        self.m
    }

    /// `gap_i^{m-1}` for the current epoch.
    pub fn gaps_prev(&self) -> &[f64] {
        &self.gaps_prev
    }

    pub fn plan(&self) -> &EpochPlan {
        &self.plan
    }

    /// `T_{m-1}`: the last round of the previous epoch.
    pub fn epoch_start(&self) -> u64 {
        self.epoch_start
    }

    /// `T_m`.
    pub fn planned_epoch_end(&self) -> u64 {
        self.epoch_start.saturating_add(self.plan.total)
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    pub fn completed_epochs(&self) -> &[EpochRecord] {
        &self.records
    }

    /// Draws an arm with probability `n_i / N` using an exact integer draw.
    pub fn sample_arm(&self, rng: &mut RngStream) -> usize {
        let u = rng.random_range(0..self.plan.total);
        self.cumulative.partition_point(|&c| c <= u)
    }

    /// Records one pull; closes the epoch once its `N_m` rounds are spent.
    pub fn record(&mut self, arm: usize, reward: f64) {
        self.sums[arm] += reward;
        self.pulls[arm] += 1;
        self.elapsed += 1;
        if self.elapsed == self.plan.total {
            self.close_epoch();
        }
    }

    fn close_epoch(&mut self) {
        let means: Vec<f64> = self
            .sums
            .iter()
            .zip(&self.plan.planned)
            .map(|(&s, &n)| s / n as f64)
            .collect();
        let update = match self.params.rule {
            GapRule::Standard => close_gaps(self.m, &means, &self.gaps_prev),
            GapRule::KnownMuStar(mu) => close_gaps_known_mu_star(self.m, &means, &self.gaps_prev, mu),
        };
        let mut record = self.open_record();
        record.means = Some(means);
        record.r_star = Some(update.r_star);
        record.leader = Some(update.leader);
        record.gaps = Some(update.gaps.clone());
        record.completed = true;
        self.records.push(record);

        self.epoch_start += self.elapsed;
        self.elapsed = 0;
        self.m += 1;
        self.gaps_prev = update.gaps;
        self.sums.iter_mut().for_each(|s| *s = 0.0);
        self.pulls.iter_mut().for_each(|p| *p = 0);
        self.install_plan();
    }

    fn open_record(&self) -> EpochRecord {
        EpochRecord {
            m: self.m,
            start: self.epoch_start + 1,
            end: self.epoch_start + self.elapsed,
            planned_end: self.planned_epoch_end(),
            planned: self.plan.planned.clone(),
            planned_total: self.plan.total,
            pulls: self.pulls.clone(),
            sums: self.sums.clone(),
            gaps_prev: self.gaps_prev.clone(),
            means: None,
            r_star: None,
            leader: None,
            gaps: None,
            completed: false,
            corruption: Vec::new(),
            corruption_max: 0.0,
        }
    }

    /// Completed epochs plus the truncated current one, if it has started.
    pub fn records(&self) -> Vec<EpochRecord> {
        let mut out = self.records.clone();
        if self.elapsed > 0 {
            out.push(self.open_record());
        }
        out
    }
}

/// BARBAR as a [`Player`].
#[derive(Debug, Clone)]
pub struct Barbar {
    state: BarbarState,
}

impl Barbar {
    pub fn new(params: BarbarParams) -> Result<Self> {
        Ok(Self {
            state: BarbarState::new(params)?,
        })
    }

    pub fn state(&self) -> &BarbarState {
        &self.state
    }
}

impl Player for Barbar {
    fn name(&self) -> &'static str {
        match self.state.params.rule {
            GapRule::Standard => "barbar",
            GapRule::KnownMuStar(_) => "barbar_known_mustar",
        }
    }

    fn select_arm(&mut self, rng: &mut RngStream) -> usize {
        self.state.sample_arm(rng)
    }

    fn observe(&mut self, arm: usize, reward: f64) {
        self.state.record(arm, reward);
    }

    fn epoch_records(&self) -> Vec<EpochRecord> {
        self.state.records()
    }

    fn epoch_family(&self) -> Option<EpochFamily> {
        Some(match self.state.params.rule {
            GapRule::Standard => EpochFamily::Barbar,
            GapRule::KnownMuStar(_) => EpochFamily::BarbarKnownMuStar,
        })
    }

    fn lambda(&self) -> Option<f64> {
        Some(self.state.lambda)
    }
}
