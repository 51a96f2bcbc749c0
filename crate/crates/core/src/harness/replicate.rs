// SPDX-License-Identifier: Apache-2.0

//! Seeded replication.
//!
//! Replicate `r` of a config with master seed `s` draws every random number
//! from the three streams keyed by `(s, r, role)`; see [`crate::rng`]. Runs
//! are independent, so the worker pool only changes wall time. Results are
//! collected in seed order and folded single-threaded.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::adversaries::AdversaryState;
use crate::algorithms::{EpochFamily, EpochRecord};
use crate::error::{Error, Result};
use crate::metrics::{approx_eq, neumaier_sum, regret_report, RegretReport};
use crate::protocol::{run_protocol, RunSettings, RunTrace};
use crate::stats::{check_epoch_lengths, check_event_e, EventEReport};

/// Builds the player and adversary for one replicate and plays it out.
pub fn run_seed(config: &ExperimentConfig, seed: u64) -> Result<(RunTrace, AdversaryState)> {
    let k = config.instance.k();
    let mut player = config.algo.build(k, config.delta, config.horizon)?;
    let mut adversary = config
        .adversary
        .build(k, config.barbar_schedule(), config.delta, config.horizon)?;
    let mut settings = RunSettings::new(config.horizon, config.delta, config.master_seed, seed);
    settings.store_vectors = config.store_vectors;
    let trace = run_protocol(&config.instance, player.as_mut(), &mut adversary, &settings)?;
    Ok((trace, adversary))
}

/// Everything kept from one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub report: RegretReport,
    pub event_e: Option<EventEReport>,
    pub epochs: Vec<EpochRecord>,
}

/// Computes the per-seed reports. Standard BARBAR traces must satisfy the
/// epoch-length bounds, otherwise the seed fails.
pub fn evaluate(config: &ExperimentConfig, seed: u64, trace: &RunTrace) -> Result<SeedOutcome> {
    if trace.epoch_family() == Some(EpochFamily::Barbar) {
        check_epoch_lengths(trace)?.into_result()?;
    }
    let event_e = match trace.epoch_family() {
        Some(f) if f.is_barbar() => Some(check_event_e(trace, &config.instance)?),
        _ => None,
    };
    Ok(SeedOutcome {
        seed,
        report: regret_report(trace, &config.checkpoints),
        event_e,
        epochs: trace.epochs().to_vec(),
    })
}

fn run_and_evaluate(config: &ExperimentConfig, seed: u64) -> Result<SeedOutcome> {
    let (trace, _) = run_seed(config, seed)?;
    evaluate(config, seed, &trace)
}

/// One row of `regret.csv` data plus the scalar metrics of a seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRow {
    pub seed: u64,
    /// Pseudo-regret at each checkpoint.
    pub pseudo_regret: Vec<f64>,
    /// Cumulative realized `C` at each checkpoint.
    pub realized_c: Vec<f64>,
    pub corrupted_rounds: u64,
    pub pull_counts: Vec<u64>,
    pub realized_regret: Option<f64>,
    pub inlier_regret: Option<f64>,
    pub best_arm_regret: Option<f64>,
    pub event_e_passed: Option<bool>,
    pub completed_epochs: usize,
    pub regret_bound: f64,
}

impl SeedRow {
    pub fn from_outcome(o: &SeedOutcome) -> Self {
        Self {
            seed: o.seed,
            pseudo_regret: o.report.pseudo_regret.values.clone(),
            realized_c: o.report.corruption_trajectory.values.clone(),
            corrupted_rounds: o.report.corruption.corrupted_rounds,
            pull_counts: o.report.pull_counts.clone(),
            realized_regret: o.report.realized_regret,
            inlier_regret: o.report.inlier_regret,
            best_arm_regret: o.report.best_arm_regret,
            event_e_passed: o.event_e.as_ref().map(|e| e.passed),
            completed_epochs: o.epochs.iter().filter(|e| e.completed).count(),
            regret_bound: o.report.bound,
        }
    }

    pub fn final_pseudo_regret(&self) -> f64 {
        self.pseudo_regret.last().copied().unwrap_or(0.0)
    }

    pub fn final_corruption(&self) -> f64 {
        self.realized_c.last().copied().unwrap_or(0.0)
    }
}

/// Linear-interpolation quantile of sorted data (type 7).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Cross-seed statistics. Every field is a deterministic function of the
/// seed-sorted rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub seeds: usize,
    pub checkpoints: Vec<u64>,
    pub mean: Vec<f64>,
    pub median: Vec<f64>,
    pub q10: Vec<f64>,
    pub q90: Vec<f64>,
    pub mean_final_pseudo_regret: f64,
    pub mean_realized_c: f64,
    pub mean_corrupted_rounds: f64,
    /// Fraction of seeds whose trace passes the event-E check; `None` for
    /// players without BARBAR epochs.
    pub event_e_pass_fraction: Option<f64>,
}

impl Aggregates {
    pub fn compute(checkpoints: &[u64], rows: &[SeedRow]) -> Self {
        let mut rows: Vec<&SeedRow> = rows.iter().collect();
        rows.sort_by_key(|r| r.seed);
        let n = rows.len() as f64;
        let mean_of = |f: &dyn Fn(&SeedRow) -> f64| neumaier_sum(rows.iter().map(|r| f(r))) / n;
        let mut mean = Vec::new();
        let mut median = Vec::new();
        let mut q10 = Vec::new();
        let mut q90 = Vec::new();
        for j in 0..checkpoints.len() {
            let mut column: Vec<f64> = rows.iter().map(|r| r.pseudo_regret[j]).collect();
            mean.push(neumaier_sum(column.iter().copied()) / n);
            column.sort_by(f64::total_cmp);
            median.push(quantile_sorted(&column, 0.5));
            q10.push(quantile_sorted(&column, 0.1));
            q90.push(quantile_sorted(&column, 0.9));
        }
        let flags: Vec<bool> = rows.iter().filter_map(|r| r.event_e_passed).collect();
        let event_e_pass_fraction =
            (!flags.is_empty()).then(|| flags.iter().filter(|&&p| p).count() as f64 / flags.len() as f64);
        Self {
            seeds: rows.len(),
            checkpoints: checkpoints.to_vec(),
            mean,
            median,
            q10,
            q90,
            mean_final_pseudo_regret: mean_of(&|r| r.final_pseudo_regret()),
            mean_realized_c: mean_of(&|r| r.final_corruption()),
            mean_corrupted_rounds: mean_of(&|r| r.corrupted_rounds as f64),
            event_e_pass_fraction,
        }
    }

    /// Field-wise comparison up to relative `rel`.
    pub fn approx_eq(&self, other: &Self, rel: f64) -> bool {
        let vec_eq = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| approx_eq(*x, *y, rel));
        self.seeds == other.seeds
            && self.checkpoints == other.checkpoints
            && vec_eq(&self.mean, &other.mean)
            && vec_eq(&self.median, &other.median)
            && vec_eq(&self.q10, &other.q10)
            && vec_eq(&self.q90, &other.q90)
            && approx_eq(self.mean_final_pseudo_regret, other.mean_final_pseudo_regret, rel)
            && approx_eq(self.mean_realized_c, other.mean_realized_c, rel)
            && approx_eq(self.mean_corrupted_rounds, other.mean_corrupted_rounds, rel)
            && self.event_e_pass_fraction == other.event_e_pass_fraction
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub config: ExperimentConfig,
    /// BARBAR's `lambda` when the player runs BARBAR.
    pub lambda: Option<f64>,
    pub aggregates: Aggregates,
    pub rows: Vec<SeedRow>,
    /// Per-seed epoch records, seed-sorted.
    #[serde(skip)]
    pub epochs: Vec<(u64, Vec<EpochRecord>)>,
}

impl AggregateReport {
    pub fn from_outcomes(config: &ExperimentConfig, outcomes: Vec<SeedOutcome>) -> Self {
        let rows: Vec<SeedRow> = outcomes.iter().map(SeedRow::from_outcome).collect();
        Self {
            config: config.clone(),
            lambda: config.barbar_schedule().map(|p| p.lambda()),
            aggregates: Aggregates::compute(&config.checkpoints, &rows),
            rows,
            epochs: outcomes.into_iter().map(|o| (o.seed, o.epochs)).collect(),
        }
    }
}

/// Runs every seed of `config` on `workers` threads (0 means one per core).
/// The first failing seed, in seed order, aborts the whole aggregate.
pub fn replicate(config: &ExperimentConfig, workers: usize) -> Result<AggregateReport> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::param("workers", e.to_string()))?;
    let results: Vec<Result<SeedOutcome>> =
        pool.install(|| config.seeds.par_iter().map(|&seed| run_and_evaluate(config, seed)).collect());
    let mut outcomes = Vec::with_capacity(results.len());
    for (result, &seed) in results.into_iter().zip(&config.seeds) {
        outcomes.push(result.map_err(|e| Error::Seed {
            seed,
            source: Box::new(e),
        })?);
    }
    Ok(AggregateReport::from_outcomes(config, outcomes))
}
