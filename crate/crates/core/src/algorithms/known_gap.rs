// SPDX-License-Identifier: Apache-2.0

//! Epoch algorithm for a known minimal gap `D`.
//!
//! Epoch `m` plays last epoch's winner `4^m` times and every other arm
//! `ceil(lambda / D^2)` times, in a uniformly random order. Epoch 1 has no
//! winner yet and plays every arm `ceil(lambda / D^2)` times. The winner is
//! the argmax of `r_i - w_i / 16`, where `w_i = min(1, sqrt(lambda / n_i))`
//! is the accuracy scale implied by the arm's pull count, matching BARBAR's
//! `n = lambda * gap^-2` relation.

use super::barbar::{barbar_lambda, EpochPlan};
use super::{draw_from_counts, EpochFamily, EpochRecord};
use crate::error::{Error, Result};
use crate::instance::argmax;
use crate::protocol::Player;
use crate::rng::RngStream;

pub fn known_gap_plan(k: usize, lambda: f64, min_gap: f64, m: u32, winner: Option<usize>) -> EpochPlan {
    let others = ((lambda / (min_gap * min_gap)).ceil() as u64).max(1);
    let planned: Vec<u64> = (0..k)
        .map(|i| {
            if Some(i) == winner {
                4u64.saturating_pow(m)
            } else {
                others
            }
        })
        .collect();
    let total = planned.iter().fold(0u64, |acc, &n| acc.saturating_add(n));
    EpochPlan { planned, total }
}

#[derive(Debug, Clone)]
pub struct KnownGap {
    k: usize,
    lambda: f64,
    min_gap: f64,
    m: u32,
    winner: Option<usize>,
    plan: EpochPlan,
    remaining: Vec<u64>,
    remaining_total: u64,
    epoch_start: u64,
    sums: Vec<f64>,
    pulls: Vec<u64>,
    records: Vec<EpochRecord>,
}

impl KnownGap {
    pub fn new(k: usize, delta: f64, horizon: u64, lambda_scale: f64, min_gap: f64) -> Result<Self> {
        if !(min_gap > 0.0 && min_gap <= 1.0) {
            return Err(Error::param("min_gap", format!("{min_gap} is not in (0, 1]")));
        }
        if !(lambda_scale.is_finite() && lambda_scale > 0.0) {
            return Err(Error::param("lambda_scale", "must be finite and > 0"));
        }
        if k < 2 {
            return Err(Error::param("k", format!("{k} < 2")));
        }
        Ok(Self::with_lambda(k, lambda_scale * barbar_lambda(k, delta, horizon), min_gap))
    }

    pub fn with_lambda(k: usize, lambda: f64, min_gap: f64) -> Self {
        let plan = known_gap_plan(k, lambda, min_gap, 1, None);
        Self {
            k,
            lambda,
            min_gap,
            m: 1,
            winner: None,
            remaining: plan.planned.clone(),
            remaining_total: plan.total,
            plan,
            epoch_start: 0,
            sums: vec![0.0; k],
            pulls: vec![0; k],
            records: Vec::new(),
        }
    }

    pub fn winner(&self) -> Option<usize> {
        self.winner
    }

    pub fn epoch(&self) -> u32 {
        self.m
    }

    fn scales(&self) -> Vec<f64> {
        self.plan
            .planned
            .iter()
            .map(|&n| (self.lambda / n as f64).sqrt().min(1.0))
            .collect()
    }

    fn open_record(&self) -> EpochRecord {
        let played = self.plan.total - self.remaining_total;
        EpochRecord {
            m: self.m,
            start: self.epoch_start + 1,
            end: self.epoch_start + played,
            planned_end: self.epoch_start + self.plan.total,
            planned: self.plan.planned.clone(),
            planned_total: self.plan.total,
            pulls: self.pulls.clone(),
            sums: self.sums.clone(),
            gaps_prev: self.scales(),
            means: None,
            r_star: None,
            leader: None,
            gaps: None,
            completed: false,
            corruption: Vec::new(),
            corruption_max: 0.0,
        }
    }

    fn close_epoch(&mut self) {
        let means: Vec<f64> = self
            .sums
            .iter()
            .zip(&self.plan.planned)
            .map(|(&s, &n)| s / n as f64)
            .collect();
        let adjusted: Vec<f64> = means
            .iter()
            .zip(self.scales())
            .map(|(&r, w)| r - w / 16.0)
            .collect();
        let winner = argmax(&adjusted);
        let mut record = self.open_record();
        record.means = Some(means);
        record.r_star = Some(adjusted[winner]);
        record.leader = Some(winner);
        record.completed = true;
        self.records.push(record);

        self.epoch_start += self.plan.total;
        self.m += 1;
        self.winner = Some(winner);
        self.plan = known_gap_plan(self.k, self.lambda, self.min_gap, self.m, self.winner);
        self.remaining = self.plan.planned.clone();
        self.remaining_total = self.plan.total;
        self.sums.iter_mut().for_each(|s| *s = 0.0);
        self.pulls.iter_mut().for_each(|p| *p = 0);
    }
}

impl Player for KnownGap {
    fn name(&self) -> &'static str {
        "known_gap"
    }

    fn select_arm(&mut self, rng: &mut RngStream) -> usize {
        draw_from_counts(&self.remaining, self.remaining_total, rng)
    }

    fn observe(&mut self, arm: usize, reward: f64) {
        self.remaining[arm] -= 1;
        self.remaining_total -= 1;
        self.sums[arm] += reward;
        self.pulls[arm] += 1;
        if self.remaining_total == 0 {
            self.close_epoch();
        }
    }

    fn epoch_records(&self) -> Vec<EpochRecord> {
        let mut out = self.records.clone();
        if self.remaining_total < self.plan.total {
            out.push(self.open_record());
        }
        out
    }

    fn epoch_family(&self) -> Option<EpochFamily> {
        Some(EpochFamily::KnownGap)
    }

    fn lambda(&self) -> Option<f64> {
        Some(self.lambda)
    }
}
