// SPDX-License-Identifier: Apache-2.0

//! The epoch-targeting attack next to its uncorrupted baseline.
//!
//! With `mu = (1, 0, ..., 0)` BARBAR quickly learns that every other arm
//! has gap 1 and spends almost all of epoch `m` on the best arm. Zeroing
//! the best arm for all of epoch `c` makes every estimate equal, so epoch
//! `c + 1` pulls each arm about `lambda 4^c` times: roughly `(K - 1)` times
//! the corruption spent.

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::replicate::{replicate, AggregateReport};
use crate::adversaries::{default_target_epoch, AdversarySpec};
use crate::algorithms::AlgoSpec;
use crate::error::Result;
use crate::instance::BanditInstance;
use crate::metrics::{default_checkpoints, neumaier_sum};

pub const DEMO_ARMS: usize = 8;
pub const DEMO_LAMBDA_SCALE: f64 = 0.01;
pub const DEMO_HORIZON: u64 = 1 << 24;
pub const DEMO_SEEDS: u64 = 20;

/// The canned attack scenario: `K = 8`, `mu = (1, 0, ..., 0)`, BARBAR with
/// `lambda_scale = 0.01`, attack epoch `floor(2 log2 K) + 1`.
pub fn attack_demo_config(seeds: u64) -> ExperimentConfig {
    let mut means = vec![0.0; DEMO_ARMS];
    means[0] = 1.0;
    let instance = BanditInstance::deterministic(&means).expect("valid instance");
    ExperimentConfig {
        instance,
        algo: AlgoSpec::Barbar {
            lambda_scale: DEMO_LAMBDA_SCALE,
        },
        adversary: AdversarySpec::EpochTarget {
            epoch: default_target_epoch(DEMO_ARMS),
            target_arm: 0,
            lambda_scale: None,
        },
        horizon: DEMO_HORIZON,
        delta: 0.05,
        master_seed: 0,
        seeds: (0..seeds).collect(),
        store_vectors: false,
        checkpoints: default_checkpoints(DEMO_HORIZON),
        out_dir: None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSummary {
    pub k: usize,
    pub seeds: usize,
    pub mean_attacked_regret: f64,
    pub mean_baseline_regret: f64,
    /// `mean attacked / mean baseline`.
    pub inflation_factor: f64,
    /// Mean realized `C` of the attacked runs.
    pub mean_corruption: f64,
    /// Mean over seeds of attacked minus baseline pseudo-regret.
    pub mean_excess_regret: f64,
    /// `mean_excess_regret / ((K - 1) mean_corruption)`.
    pub excess_per_kc: f64,
    /// Whether `excess_per_kc` lies in `[1/4, 4]`.
    pub within_window: bool,
}

impl AttackSummary {
    pub fn compare(attacked: &AggregateReport, baseline: &AggregateReport) -> Self {
        let k = attacked.config.instance.k();
        let n = attacked.rows.len() as f64;
        let excess = neumaier_sum(
            attacked
                .rows
                .iter()
                .zip(&baseline.rows)
                .map(|(a, b)| a.final_pseudo_regret() - b.final_pseudo_regret()),
        ) / n;
        let a = attacked.aggregates.mean_final_pseudo_regret;
        let b = baseline.aggregates.mean_final_pseudo_regret;
        let c = attacked.aggregates.mean_realized_c;
        let per_kc = excess / ((k - 1) as f64 * c);
        Self {
            k,
            seeds: attacked.rows.len(),
            mean_attacked_regret: a,
            mean_baseline_regret: b,
            inflation_factor: a / b,
            mean_corruption: c,
            mean_excess_regret: excess,
            excess_per_kc: per_kc,
            within_window: (0.25..=4.0).contains(&per_kc),
        }
    }
}

/// Runs `config` and the same config with the null adversary.
pub fn attack_vs_baseline(
    config: &ExperimentConfig,
    workers: usize,
) -> Result<(AggregateReport, AggregateReport, AttackSummary)> {
    let attacked = replicate(config, workers)?;
    let mut clean = config.clone();
    clean.adversary = AdversarySpec::Null;
    let baseline = replicate(&clean, workers)?;
    let summary = AttackSummary::compare(&attacked, &baseline);
    Ok((attacked, baseline, summary))
}
