// SPDX-License-Identifier: Apache-2.0

//! Corruption strategies.

mod epoch_target;
mod script;

pub use epoch_target::{default_target_epoch, EpochTarget};
pub use script::ScriptTable;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algorithms::BarbarParams;
use crate::error::{Error, Result};
use crate::protocol::{clamp_rewards, Adversary, RoundView};
use crate::rng::RngStream;

/// How a contaminated round rewrites the reward vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContaminationRule {
    /// `R~_i = 1 - R_i` for every arm.
    Flip,
    /// Every arm pays 0.
    Zero,
    /// Every arm pays 1.
    One,
    /// Only the given arm is set to 0.
    ZeroArm(usize),
}

impl ContaminationRule {
    pub fn apply(&self, out: &mut [f64]) {
        match *self {
            ContaminationRule::Flip => out.iter_mut().for_each(|r| *r = 1.0 - *r),
            ContaminationRule::Zero => out.iter_mut().for_each(|r| *r = 0.0),
            ContaminationRule::One => out.iter_mut().for_each(|r| *r = 1.0),
            ContaminationRule::ZeroArm(arm) => {
                if let Some(r) = out.get_mut(arm) {
                    *r = 0.0;
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum AdversaryKind {
    Null,
    FixedRate { eta: f64, rule: ContaminationRule },
    Prefix { budget: f64, rule: ContaminationRule },
    EpochTarget(Box<EpochTarget>),
    /// Swaps the two rewards with probability 1/2 on rounds `t <= window`.
    Swap { window: Option<u64> },
    Scripted(ScriptTable),
}

/// An adversary together with its running corruption accounting.
#[derive(Debug, Clone)]
pub struct AdversaryState {
    kind: AdversaryKind,
    spent: f64,
    contaminated_rounds: u64,
    last_contaminated: bool,
}

impl AdversaryState {
    fn from_kind(kind: AdversaryKind) -> Self {
        Self {
            kind,
            spent: 0.0,
            contaminated_rounds: 0,
            last_contaminated: false,
        }
    }

    pub fn null() -> Self {
        Self::from_kind(AdversaryKind::Null)
    }

    /// Contaminates each round independently with probability `eta`.
    pub fn fixed_rate(eta: f64, rule: ContaminationRule) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::param("eta", format!("{eta} is not in (0, 1]")));
        }
        Ok(Self::from_kind(AdversaryKind::FixedRate { eta, rule }))
    }

    /// Contaminates every round `t <= budget`.
    pub fn prefix(budget: f64, rule: ContaminationRule) -> Result<Self> {
        if !(budget.is_finite() && budget >= 0.0) {
            return Err(Error::param("budget", format!("{budget} must be finite and >= 0")));
        }
        Ok(Self::from_kind(AdversaryKind::Prefix { budget, rule }))
    }

    pub fn epoch_target(target: EpochTarget) -> Self {
        Self::from_kind(AdversaryKind::EpochTarget(Box::new(target)))
    }

    pub fn swap(k: usize) -> Result<Self> {
        Self::swap_prefix(k, None)
    }

    /// Swap attack limited to the first `window` rounds.
    pub fn swap_prefix(k: usize, window: Option<u64>) -> Result<Self> {
        if k != 2 {
            return Err(Error::param("k", format!("swap needs exactly 2 arms, got {k}")));
        }
        Ok(Self::from_kind(AdversaryKind::Swap { window }))
    }

    pub fn scripted(table: ScriptTable) -> Self {
        Self::from_kind(AdversaryKind::Scripted(table))
    }

    pub fn kind(&self) -> &AdversaryKind {
        &self.kind
    }

    /// `sum_t ||R~^t - R^t||_inf` over the rounds emitted so far.
    pub fn spent(&self) -> f64 {
        self.spent
    }

    /// Rounds on which the adversary's rule fired (whether or not it
    /// changed any value).
    pub fn contaminated_rounds(&self) -> u64 {
        self.contaminated_rounds
    }

    pub fn last_contaminated(&self) -> bool {
        self.last_contaminated
    }

    /// Upper bound on the total corruption, when the variant has one.
    pub fn declared_budget(&self) -> Option<f64> {
        match &self.kind {
            AdversaryKind::Null => Some(0.0),
            AdversaryKind::Prefix { budget, .. } => Some(budget.floor()),
            AdversaryKind::Swap { window: Some(w) } => Some(*w as f64),
            AdversaryKind::Scripted(table) => Some(table.rounds() as f64),
            _ => None,
        }
    }
}

impl Adversary for AdversaryState {
    fn name(&self) -> &'static str {
        match self.kind {
            AdversaryKind::Null => "null",
            AdversaryKind::FixedRate { .. } => "fixed_rate",
            AdversaryKind::Prefix { .. } => "prefix",
            AdversaryKind::EpochTarget(_) => "epoch_target",
            AdversaryKind::Swap { .. } => "swap",
            AdversaryKind::Scripted(_) => "scripted",
        }
    }

    fn corrupt(&mut self, view: &RoundView<'_>, rng: &mut RngStream, out: &mut [f64]) {
        let fired = match &mut self.kind {
            AdversaryKind::Null => false,
            AdversaryKind::FixedRate { eta, rule } => {
                let hit = rng.random::<f64>() < *eta;
                if hit {
                    rule.apply(out);
                }
                hit
            }
            AdversaryKind::Prefix { budget, rule } => {
                let hit = (view.t as f64) <= *budget;
                if hit {
                    rule.apply(out);
                }
                hit
            }
            AdversaryKind::EpochTarget(target) => target.corrupt(view, out),
            AdversaryKind::Swap { window } => {
                let coin = rng.random::<bool>();
                let hit = coin && window.is_none_or(|w| view.t <= w);
                if hit {
                    out.reverse();
                }
                hit
            }
            AdversaryKind::Scripted(table) => table.apply(view.t, out),
        };
        clamp_rewards(view.raw, out);
        if let AdversaryKind::EpochTarget(target) = &mut self.kind {
            target.remember(out);
        }
        let inf = out
            .iter()
            .zip(view.raw)
            .map(|(c, r)| (c - r).abs())
            .fold(0.0, f64::max);
        self.spent += inf;
        self.last_contaminated = fired;
        if fired {
            self.contaminated_rounds += 1;
        }
    }
}

/// Config-level adversary choice, resolved against the player's setup by
/// [`AdversarySpec::build`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum AdversarySpec {
    Null,
    FixedRate {
        eta: f64,
        rule: ContaminationRule,
    },
    Prefix {
        budget: f64,
        rule: ContaminationRule,
    },
    EpochTarget {
        epoch: u32,
        target_arm: usize,
        /// BARBAR schedule the attacker tracks; `None` means "the player's".
        lambda_scale: Option<f64>,
    },
    Swap {
        /// Swap only within the first `2 * budget` rounds.
        budget: Option<f64>,
    },
    Scripted {
        table: ScriptTable,
    },
}

impl AdversarySpec {
    pub const KEYS: [&'static str; 6] = ["null", "fixed_rate", "prefix", "epoch_target", "swap", "scripted"];

    pub fn key(&self) -> &'static str {
        match self {
            AdversarySpec::Null => "null",
            AdversarySpec::FixedRate { .. } => "fixed_rate",
            AdversarySpec::Prefix { .. } => "prefix",
            AdversarySpec::EpochTarget { .. } => "epoch_target",
            AdversarySpec::Swap { .. } => "swap",
            AdversarySpec::Scripted { .. } => "scripted",
        }
    }

    /// `player_schedule` is the BARBAR configuration of the player, if it
    /// runs BARBAR; the epoch-targeting attacker replays it.
    pub fn build(&self, k: usize, player_schedule: Option<BarbarParams>, delta: f64, horizon: u64) -> Result<AdversaryState> {
        match self {
            AdversarySpec::Null => Ok(AdversaryState::null()),
            AdversarySpec::FixedRate { eta, rule } => AdversaryState::fixed_rate(*eta, *rule),
            AdversarySpec::Prefix { budget, rule } => AdversaryState::prefix(*budget, *rule),
            AdversarySpec::EpochTarget {
                epoch,
                target_arm,
                lambda_scale,
            } => {
                let schedule = match (player_schedule, lambda_scale) {
                    (Some(p), None) => p,
                    (Some(p), Some(s)) => p.with_lambda_scale(*s),
                    (None, s) => BarbarParams::new(k, delta, horizon).with_lambda_scale(s.unwrap_or(1.0)),
                };
                Ok(AdversaryState::epoch_target(EpochTarget::new(schedule, *epoch, *target_arm)?))
            }
            AdversarySpec::Swap { budget } => {
                let window = match budget {
                    Some(c) if !(c.is_finite() && *c >= 0.0) => {
                        return Err(Error::param("budget", format!("{c} must be finite and >= 0")))
                    }
                    Some(c) => Some((2.0 * c).floor() as u64),
                    None => None,
                };
                AdversaryState::swap_prefix(k, window)
            }
            AdversarySpec::Scripted { table } => {
                if let Some(arm) = table.max_arm() {
                    if arm >= k {
                        return Err(Error::param("table", format!("references arm {arm} but K = {k}")));
                    }
                }
                Ok(AdversaryState::scripted(table.clone()))
            }
        }
    }
}
