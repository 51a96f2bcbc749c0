// SPDX-License-Identifier: Apache-2.0

//! TOML experiment configs.
//!
//! ```toml
//! horizon = 100000          # required, >= 2
//! seeds = 50                # count (replicates 0..50) or explicit list [0, 3, 7]
//! master_seed = 1           # default 0
//! delta = 0.05              # default 0.05
//! store_vectors = true      # default true; false drops R^t / R~^t storage
//! checkpoints = [1000, 100000]  # default: powers of two plus the horizon
//! out_dir = "results"       # optional, relative to the config file
//!
//! [instance]
//! bernoulli = [0.8, 0.5]    # or deterministic = [...], or arms = [{ kind = "clipped_gaussian", mean = 0.5, sd = 0.1 }]
//!
//! [algo]
//! name = "barbar"           # barbar | barbar_known_mustar | aae | aae_known_c | restart_aae | known_gap | ucb | exp3
//! lambda_scale = 1.0        # barbar, barbar_known_mustar, known_gap
//! mu_star = 0.8             # barbar_known_mustar
//! min_gap = 0.3             # known_gap
//! corruption_budget = 100.0 # aae_known_c
//!
//! [adversary]
//! name = "fixed_rate"       # null | fixed_rate | prefix | epoch_target | swap | scripted
//! eta = 0.01                # fixed_rate
//! budget = 500              # prefix (rounds), swap (optional, swaps within 2 * budget rounds)
//! rule = "flip"             # flip | zero | one | zero_arm (with arm = i)
//! epoch = 7                 # epoch_target, default floor(2 log2 K) + 1
//! target_arm = 0            # epoch_target, default the best arm
//! path = "attack.csv"       # scripted, relative to the config file
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adversaries::{default_target_epoch, AdversarySpec, ContaminationRule, ScriptTable};
use crate::algorithms::AlgoSpec;
use crate::error::{Error, Result};
use crate::instance::{ArmDistribution, BanditInstance};
use crate::metrics::default_checkpoints;

pub const DEFAULT_DELTA: f64 = 0.05;
pub const DEFAULT_LAMBDA_SCALE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub instance: BanditInstance,
    pub algo: AlgoSpec,
    pub adversary: AdversarySpec,
    pub horizon: u64,
    pub delta: f64,
    pub master_seed: u64,
    /// Replicate indices, strictly increasing.
    pub seeds: Vec<u64>,
    pub store_vectors: bool,
    pub checkpoints: Vec<u64>,
    /// Not echoed into reports so outputs do not depend on where they go.
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawSeeds {
    Count(u64),
    List(Vec<u64>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    horizon: Option<u64>,
    seeds: Option<RawSeeds>,
    master_seed: Option<u64>,
    delta: Option<f64>,
    store_vectors: Option<bool>,
    checkpoints: Option<Vec<u64>>,
    out_dir: Option<PathBuf>,
    instance: Option<RawInstance>,
    algo: Option<RawAlgo>,
    adversary: Option<RawAdversary>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    arms: Option<Vec<ArmDistribution>>,
    bernoulli: Option<Vec<f64>>,
    deterministic: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAlgo {
    name: String,
    lambda_scale: Option<f64>,
    mu_star: Option<f64>,
    min_gap: Option<f64>,
    corruption_budget: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAdversary {
    name: String,
    eta: Option<f64>,
    budget: Option<f64>,
    rule: Option<String>,
    arm: Option<usize>,
    epoch: Option<u32>,
    target_arm: Option<usize>,
    lambda_scale: Option<f64>,
    path: Option<PathBuf>,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// Rejects keys that were given but mean nothing for the chosen variant.
fn forbid(table: &str, name: &str, present: &[(&str, bool)]) -> Result<()> {
    match present.iter().find(|(_, p)| *p) {
        Some((key, _)) => Err(Error::validation(
            format!("{table}.{key}"),
            format!("not used by {table} \"{name}\""),
        )),
        None => Ok(()),
    }
}

fn need<T>(table: &str, key: &str, name: &str, value: Option<T>) -> Result<T> {
    value.ok_or_else(|| Error::validation(format!("{table}.{key}"), format!("required by {table} \"{name}\"")))
}

impl RawInstance {
    fn build(self) -> Result<BanditInstance> {
        let given = [self.arms.is_some(), self.bernoulli.is_some(), self.deterministic.is_some()];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(Error::validation(
                "instance",
                "give exactly one of arms, bernoulli, deterministic",
            ));
        }
        let result = if let Some(arms) = self.arms {
            BanditInstance::new(arms)
        } else if let Some(ps) = self.bernoulli {
            BanditInstance::bernoulli(&ps)
        } else {
            BanditInstance::deterministic(&self.deterministic.unwrap_or_default())
        };
        result.map_err(|e| Error::validation("instance", e.to_string()))
    }
}

impl RawAlgo {
    fn build(self) -> Result<AlgoSpec> {
        let name = self.name.as_str();
        let scale = self.lambda_scale.unwrap_or(DEFAULT_LAMBDA_SCALE);
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::validation("algo.lambda_scale", format!("{scale} must be finite and > 0")));
        }
        let has_scale = self.lambda_scale.is_some();
        let spec = match name {
            "barbar" => {
                forbid("algo", name, &[("mu_star", self.mu_star.is_some()), ("min_gap", self.min_gap.is_some()), ("corruption_budget", self.corruption_budget.is_some())])?;
                AlgoSpec::Barbar { lambda_scale: scale }
            }
            "barbar_known_mustar" => {
                forbid("algo", name, &[("min_gap", self.min_gap.is_some()), ("corruption_budget", self.corruption_budget.is_some())])?;
                let mu_star = need("algo", "mu_star", name, self.mu_star)?;
                if !(0.0..=1.0).contains(&mu_star) {
                    return Err(Error::validation("algo.mu_star", format!("{mu_star} is not in [0, 1]")));
                }
                AlgoSpec::BarbarKnownMustar { lambda_scale: scale, mu_star }
            }
            "known_gap" => {
                forbid("algo", name, &[("mu_star", self.mu_star.is_some()), ("corruption_budget", self.corruption_budget.is_some())])?;
                let min_gap = need("algo", "min_gap", name, self.min_gap)?;
                if !(min_gap > 0.0 && min_gap <= 1.0) {
                    return Err(Error::validation("algo.min_gap", format!("{min_gap} is not in (0, 1]")));
                }
                AlgoSpec::KnownGap { lambda_scale: scale, min_gap }
            }
            "aae_known_c" => {
                forbid("algo", name, &[("lambda_scale", has_scale), ("mu_star", self.mu_star.is_some()), ("min_gap", self.min_gap.is_some())])?;
                let budget = need("algo", "corruption_budget", name, self.corruption_budget)?;
                if !(budget.is_finite() && budget >= 0.0) {
                    return Err(Error::validation("algo.corruption_budget", format!("{budget} must be finite and >= 0")));
                }
                AlgoSpec::AaeKnownC { corruption_budget: budget }
            }
            "aae" | "restart_aae" | "ucb" | "exp3" => {
                forbid("algo", name, &[("lambda_scale", has_scale), ("mu_star", self.mu_star.is_some()), ("min_gap", self.min_gap.is_some()), ("corruption_budget", self.corruption_budget.is_some())])?;
                match name {
                    "aae" => AlgoSpec::Aae,
                    "restart_aae" => AlgoSpec::RestartAae,
                    "ucb" => AlgoSpec::Ucb,
                    _ => AlgoSpec::Exp3,
                }
            }
            other => {
                return Err(Error::validation(
                    "algo.name",
                    format!("unknown algorithm \"{other}\"; expected one of {}", AlgoSpec::KEYS.join(", ")),
                ))
            }
        };
        Ok(spec)
    }
}

impl RawAdversary {
    fn rule(&self, k: usize) -> Result<ContaminationRule> {
        let rule = match self.rule.as_deref().unwrap_or("flip") {
            "flip" => ContaminationRule::Flip,
            "zero" => ContaminationRule::Zero,
            "one" => ContaminationRule::One,
            "zero_arm" => {
                let arm = need("adversary", "arm", "zero_arm", self.arm)?;
                if arm >= k {
                    return Err(Error::validation("adversary.arm", format!("{arm} >= K = {k}")));
                }
                ContaminationRule::ZeroArm(arm)
            }
            other => {
                return Err(Error::validation(
                    "adversary.rule",
                    format!("unknown rule \"{other}\"; expected flip, zero, one or zero_arm"),
                ))
            }
        };
        if self.arm.is_some() && !matches!(rule, ContaminationRule::ZeroArm(_)) {
            return Err(Error::validation("adversary.arm", "only used with rule = \"zero_arm\""));
        }
        Ok(rule)
    }

    fn build(self, instance: &BanditInstance, base_dir: &Path) -> Result<AdversarySpec> {
        let name = self.name.as_str();
        let k = instance.k();
        let rule_keys = [("rule", self.rule.is_some()), ("arm", self.arm.is_some())];
        let target_keys = [
            ("epoch", self.epoch.is_some()),
            ("target_arm", self.target_arm.is_some()),
            ("lambda_scale", self.lambda_scale.is_some()),
        ];
        let spec = match name {
            "null" => {
                forbid("adversary", name, &[("eta", self.eta.is_some()), ("budget", self.budget.is_some()), ("path", self.path.is_some())])?;
                forbid("adversary", name, &rule_keys)?;
                forbid("adversary", name, &target_keys)?;
                AdversarySpec::Null
            }
            "fixed_rate" => {
                forbid("adversary", name, &[("budget", self.budget.is_some()), ("path", self.path.is_some())])?;
                forbid("adversary", name, &target_keys)?;
                let eta = need("adversary", "eta", name, self.eta)?;
                if !(eta > 0.0 && eta <= 1.0) {
                    return Err(Error::validation("adversary.eta", format!("{eta} is not in (0, 1]")));
                }
                AdversarySpec::FixedRate { eta, rule: self.rule(k)? }
            }
            "prefix" => {
                forbid("adversary", name, &[("eta", self.eta.is_some()), ("path", self.path.is_some())])?;
                forbid("adversary", name, &target_keys)?;
                let budget = need("adversary", "budget", name, self.budget)?;
                if !(budget.is_finite() && budget >= 0.0) {
                    return Err(Error::validation("adversary.budget", format!("{budget} must be finite and >= 0")));
                }
                AdversarySpec::Prefix { budget, rule: self.rule(k)? }
            }
            "epoch_target" => {
                forbid("adversary", name, &[("eta", self.eta.is_some()), ("budget", self.budget.is_some()), ("path", self.path.is_some())])?;
                forbid("adversary", name, &rule_keys)?;
                let epoch = self.epoch.unwrap_or_else(|| default_target_epoch(k));
                if epoch == 0 {
                    return Err(Error::validation("adversary.epoch", "epochs are numbered from 1"));
                }
                let target_arm = self.target_arm.unwrap_or_else(|| instance.best_arm());
                if target_arm >= k {
                    return Err(Error::validation("adversary.target_arm", format!("{target_arm} >= K = {k}")));
                }
                if let Some(s) = self.lambda_scale {
                    if !(s.is_finite() && s > 0.0) {
                        return Err(Error::validation("adversary.lambda_scale", format!("{s} must be finite and > 0")));
                    }
                }
                AdversarySpec::EpochTarget {
                    epoch,
                    target_arm,
                    lambda_scale: self.lambda_scale,
                }
            }
            "swap" => {
                forbid("adversary", name, &[("eta", self.eta.is_some()), ("path", self.path.is_some())])?;
                forbid("adversary", name, &rule_keys)?;
                forbid("adversary", name, &target_keys)?;
                if k != 2 {
                    return Err(Error::validation("adversary.name", format!("swap needs exactly 2 arms, got {k}")));
                }
                if let Some(b) = self.budget {
                    if !(b.is_finite() && b >= 0.0) {
                        return Err(Error::validation("adversary.budget", format!("{b} must be finite and >= 0")));
                    }
                }
                AdversarySpec::Swap { budget: self.budget }
            }
            "scripted" => {
                forbid("adversary", name, &[("eta", self.eta.is_some()), ("budget", self.budget.is_some())])?;
                forbid("adversary", name, &rule_keys)?;
                forbid("adversary", name, &target_keys)?;
                let path = need("adversary", "path", name, self.path)?;
                let table = ScriptTable::from_csv(&base_dir.join(path))?;
                if let Some(arm) = table.max_arm() {
                    if arm >= k {
                        return Err(Error::validation("adversary.path", format!("script references arm {arm} but K = {k}")));
                    }
                }
                AdversarySpec::Scripted { table }
            }
            other => {
                return Err(Error::validation(
                    "adversary.name",
                    format!("unknown adversary \"{other}\"; expected one of {}", AdversarySpec::KEYS.join(", ")),
                ))
            }
        };
        Ok(spec)
    }
}

impl ExperimentConfig {
    /// Parses and validates config text. Relative paths inside the config
    /// resolve against `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
            Error::ConfigParse {
                line,
                column,
                message: e.message().to_owned(),
            }
        })?;

        let horizon = raw.horizon.ok_or_else(|| Error::validation("horizon", "required"))?;
        if horizon < 2 {
            return Err(Error::validation("horizon", format!("{horizon} < 2")));
        }
        let delta = raw.delta.unwrap_or(DEFAULT_DELTA);
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::validation("delta", format!("{delta} is not in (0, 1)")));
        }
        let seeds = match raw.seeds.unwrap_or(RawSeeds::Count(1)) {
            RawSeeds::Count(n) => (0..n).collect(),
            RawSeeds::List(list) => list,
        };
        let seeds = normalize_seeds(seeds)?;
        let checkpoints = match raw.checkpoints {
            Some(list) => normalize_checkpoints(list, horizon)?,
            None => default_checkpoints(horizon),
        };
        let instance = raw
            .instance
            .ok_or_else(|| Error::validation("instance", "required"))?
            .build()?;
        let algo = raw.algo.ok_or_else(|| Error::validation("algo", "required"))?.build()?;
        let adversary = match raw.adversary {
            Some(adv) => adv.build(&instance, base_dir)?,
            None => AdversarySpec::Null,
        };
        let out_dir = raw.out_dir.map(|p| if p.is_relative() { base_dir.join(p) } else { p });

        let config = Self {
            instance,
            algo,
            adversary,
            horizon,
            delta,
            master_seed: raw.master_seed.unwrap_or(0),
            seeds,
            store_vectors: raw.store_vectors.unwrap_or(true),
            checkpoints,
            out_dir,
        };
        config.validate()?;
        Ok(config)
    }

    /// Cross-field checks that need the whole config, e.g. that the
    /// algorithm accepts this `K`.
    pub fn validate(&self) -> Result<()> {
        if self.horizon < 2 {
            return Err(Error::validation("horizon", format!("{} < 2", self.horizon)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::validation("delta", format!("{} is not in (0, 1)", self.delta)));
        }
        if self.seeds.is_empty() {
            return Err(Error::validation("seeds", "at least one seed is required"));
        }
        self.algo
            .build(self.instance.k(), self.delta, self.horizon)
            .map_err(|e| Error::validation("algo", e.to_string()))?;
        self.adversary
            .build(self.instance.k(), self.barbar_schedule(), self.delta, self.horizon)
            .map_err(|e| Error::validation("adversary", e.to_string()))?;
        Ok(())
    }

    pub fn barbar_schedule(&self) -> Option<crate::algorithms::BarbarParams> {
        self.algo.barbar_params(self.instance.k(), self.delta, self.horizon)
    }

    /// Replaces the seed list with replicates `0..n`.
    pub fn with_seed_count(mut self, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("seeds", "at least one seed is required"));
        }
        self.seeds = (0..n).collect();
        Ok(self)
    }
}

fn normalize_seeds(mut seeds: Vec<u64>) -> Result<Vec<u64>> {
    if seeds.is_empty() {
        return Err(Error::validation("seeds", "at least one seed is required"));
    }
    seeds.sort_unstable();
    if seeds.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::validation("seeds", "duplicate seed"));
    }
    Ok(seeds)
}

fn normalize_checkpoints(mut list: Vec<u64>, horizon: u64) -> Result<Vec<u64>> {
    list.sort_unstable();
    list.dedup();
    if list.first() == Some(&0) || list.last().is_some_and(|&c| c > horizon) {
        return Err(Error::validation("checkpoints", format!("checkpoints must lie in [1, {horizon}]")));
    }
    if list.last() != Some(&horizon) {
        list.push(horizon);
    }
    Ok(list)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    ExperimentConfig::from_toml_str(&text, base)
}
