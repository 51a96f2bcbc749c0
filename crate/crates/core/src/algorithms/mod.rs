// SPDX-License-Identifier: Apache-2.0

//! Bandit algorithms behind the [`Player`] interface.

mod aae;
mod barbar;
mod exp3;
mod known_gap;
mod ucb;

pub use aae::{aae_log_term, Aae, RestartAae};
pub use barbar::{
    barbar_lambda, close_gaps, close_gaps_known_mu_star, epoch_plan, Barbar, BarbarParams, BarbarState,
    EpochPlan, GapRule, GapUpdate,
};
pub use exp3::Exp3;
pub use known_gap::{known_gap_plan, KnownGap};
pub use ucb::Ucb;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::Player;
use crate::rng::RngStream;

/// Which epoch semantics an [`EpochRecord`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpochFamily {
    Barbar,
    BarbarKnownMuStar,
    KnownGap,
}

impl EpochFamily {
    /// Families whose estimates follow BARBAR's sampling scheme, for which
    /// the event-E tail bounds apply.
    pub fn is_barbar(self) -> bool {
        matches!(self, EpochFamily::Barbar | EpochFamily::BarbarKnownMuStar)
    }
}

/// One epoch of an epoch-based player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub m: u32,
    /// First round of the epoch (`T_{m-1} + 1`).
    pub start: u64,
    /// Last round actually played.
    pub end: u64,
    /// `T_m`; exceeds `end` when the horizon truncated the epoch.
    pub planned_end: u64,
    /// `n_i^m`.
    pub planned: Vec<u64>,
    /// `N_m`.
    pub planned_total: u64,
    /// Realized pulls.
    pub pulls: Vec<u64>,
    /// Reward sums `S_i`.
    pub sums: Vec<f64>,
    /// Gap estimates going into the epoch. For `known_gap` this is the
    /// per-arm confidence scale `min(1, sqrt(lambda / n_i))`.
    pub gaps_prev: Vec<f64>,
    pub means: Option<Vec<f64>>,
    pub r_star: Option<f64>,
    /// Arm attaining `r*` (the next winner for `known_gap`).
    pub leader: Option<usize>,
    pub gaps: Option<Vec<f64>>,
    pub completed: bool,
    /// Per-arm corruption `C_m^i = sum |R~ - R|` over the epoch's rounds.
    pub corruption: Vec<f64>,
    /// `C_m = max_i C_m^i`.
    pub corruption_max: f64,
}

impl EpochRecord {
    /// Rounds actually played in this epoch.
    pub fn rounds(&self) -> u64 {
        self.end + 1 - self.start
    }
}

/// Always pulls the same arm.
#[derive(Debug, Clone)]
pub struct ConstantArm {
    arm: usize,
}

impl ConstantArm {
    pub fn new(arm: usize) -> Self {
        Self { arm }
    }
}

impl Player for ConstantArm {
    fn name(&self) -> &'static str {
        "constant"
    }

    fn select_arm(&mut self, _rng: &mut RngStream) -> usize {
        self.arm
    }

    fn observe(&mut self, _arm: usize, _reward: f64) {}
}

/// A fully parameterized algorithm choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum AlgoSpec {
    Barbar { lambda_scale: f64 },
    BarbarKnownMustar { lambda_scale: f64, mu_star: f64 },
    Aae,
    AaeKnownC { corruption_budget: f64 },
    RestartAae,
    KnownGap { lambda_scale: f64, min_gap: f64 },
    Ucb,
    Exp3,
}

impl AlgoSpec {
    pub const KEYS: [&'static str; 8] = [
        "barbar",
        "barbar_known_mustar",
        "aae",
        "aae_known_c",
        "restart_aae",
        "known_gap",
        "ucb",
        "exp3",
    ];

    pub fn key(&self) -> &'static str {
        match self {
            AlgoSpec::Barbar { .. } => "barbar",
            AlgoSpec::BarbarKnownMustar { .. } => "barbar_known_mustar",
            AlgoSpec::Aae => "aae",
            AlgoSpec::AaeKnownC { .. } => "aae_known_c",
            AlgoSpec::RestartAae => "restart_aae",
            AlgoSpec::KnownGap { .. } => "known_gap",
            AlgoSpec::Ucb => "ucb",
            AlgoSpec::Exp3 => "exp3",
        }
    }

    /// BARBAR parameters, for specs that run BARBAR.
    pub fn barbar_params(&self, k: usize, delta: f64, horizon: u64) -> Option<BarbarParams> {
        match *self {
            AlgoSpec::Barbar { lambda_scale } => {
                Some(BarbarParams::new(k, delta, horizon).with_lambda_scale(lambda_scale))
            }
            AlgoSpec::BarbarKnownMustar { lambda_scale, mu_star } => Some(
                BarbarParams::new(k, delta, horizon)
                    .with_lambda_scale(lambda_scale)
                    .with_known_mu_star(mu_star),
            ),
            _ => None,
        }
    }

    pub fn build(&self, k: usize, delta: f64, horizon: u64) -> Result<Box<dyn Player>> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::param("delta", format!("{delta} is not in (0, 1)")));
        }
        if horizon < 2 {
            return Err(Error::param("horizon", format!("{horizon} < 2")));
        }
        if let Some(params) = self.barbar_params(k, delta, horizon) {
            return Ok(Box::new(Barbar::new(params)?));
        }
        Ok(match *self {
            AlgoSpec::Aae => Box::new(Aae::new(k, delta, horizon, 0.0)?),
            AlgoSpec::AaeKnownC { corruption_budget } => Box::new(Aae::new(k, delta, horizon, corruption_budget)?),
            AlgoSpec::RestartAae => Box::new(RestartAae::new(k, delta, horizon)?),
            AlgoSpec::KnownGap { lambda_scale, min_gap } => {
                Box::new(KnownGap::new(k, delta, horizon, lambda_scale, min_gap)?)
            }
            AlgoSpec::Ucb => Box::new(Ucb::new(k)),
            AlgoSpec::Exp3 => Box::new(Exp3::new(k, horizon)),
            AlgoSpec::Barbar { .. } | AlgoSpec::BarbarKnownMustar { .. } => unreachable!(),
        })
    }
}

/// Exact categorical draw over integer counts; returns the arm index.
pub(crate) fn draw_from_counts(counts: &[u64], total: u64, rng: &mut RngStream) -> usize {
    use rand::Rng;
    let mut u = rng.random_range(0..total);
    for (i, &c) in counts.iter().enumerate() {
        if u < c {
            return i;
        }
        u -= c;
    }
    unreachable!("total exceeds the sum of counts")
}
