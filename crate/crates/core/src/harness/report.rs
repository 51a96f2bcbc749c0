// SPDX-License-Identifier: Apache-2.0

//! Report files and the offline bound checker.
//!
//! A run directory holds:
//! - `regret.csv`: `seed, checkpoint_t, pseudo_regret, realized_C`, one row
//!   per seed and checkpoint;
//! - `epochs.csv`: `seed, m, arm, n, n_tilde, r, delta_est, C_m`, one row
//!   per seed, epoch and arm (`r` and `delta_est` are empty for an epoch cut
//!   short by the horizon);
//! - `summary.json`: the serialized [`AggregateReport`] with top-level keys
//!   `config`, `lambda`, `aggregates`, `rows`.
//!
//! Floats are written in shortest round-trip form, so files parse back to
//! the exact values that produced them.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::replicate::{AggregateReport, Aggregates, SeedRow};
use crate::algorithms::{close_gaps, AlgoSpec, EpochFamily, EpochRecord};
use crate::error::{Error, Result};
use crate::stats::{check_epoch_lengths, check_event_e, check_gap_sandwich, check_known_mu_star, EpochView, EventEReport, InvariantReport};

pub const REGRET_CSV: &str = "regret.csv";
pub const EPOCHS_CSV: &str = "epochs.csv";
pub const SUMMARY_JSON: &str = "summary.json";

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes `regret.csv`, `epochs.csv` and `summary.json` into `dir`,
/// creating it if needed. Returns the written paths.
pub fn emit_reports(report: &AggregateReport, dir: &Path) -> Result<Vec<PathBuf>> {
    if report.rows.is_empty() {
        return Err(Error::validation("seeds", "no seeds to report"));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let regret_path = dir.join(REGRET_CSV);
    let mut w = csv::Writer::from_path(&regret_path).map_err(|e| csv_err(&regret_path, e))?;
    w.write_record(["seed", "checkpoint_t", "pseudo_regret", "realized_C"])
        .map_err(|e| csv_err(&regret_path, e))?;
    for row in &report.rows {
        for ((t, r), c) in report.aggregates.checkpoints.iter().zip(&row.pseudo_regret).zip(&row.realized_c) {
            w.write_record([row.seed.to_string(), t.to_string(), r.to_string(), c.to_string()])
                .map_err(|e| csv_err(&regret_path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(&regret_path, e))?;

    let epochs_path = dir.join(EPOCHS_CSV);
    let mut w = csv::Writer::from_path(&epochs_path).map_err(|e| csv_err(&epochs_path, e))?;
    w.write_record(["seed", "m", "arm", "n", "n_tilde", "r", "delta_est", "C_m"])
        .map_err(|e| csv_err(&epochs_path, e))?;
    for (seed, epochs) in &report.epochs {
        for e in epochs {
            for arm in 0..e.planned.len() {
                w.write_record([
                    seed.to_string(),
                    e.m.to_string(),
                    arm.to_string(),
                    e.planned[arm].to_string(),
                    e.pulls[arm].to_string(),
                    opt(e.means.as_ref().map(|v| v[arm])),
                    opt(e.gaps.as_ref().map(|v| v[arm])),
                    e.corruption_max.to_string(),
                ])
                .map_err(|e| csv_err(&epochs_path, e))?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(&epochs_path, e))?;

    let summary_path = dir.join(SUMMARY_JSON);
    let mut json = serde_json::to_string_pretty(report).map_err(|e| Error::Format {
        path: summary_path.clone(),
        message: e.to_string(),
    })?;
    json.push('\n');
    fs::write(&summary_path, json).map_err(|e| Error::io(&summary_path, e))?;

    Ok(vec![regret_path, epochs_path, summary_path])
}

#[derive(Debug, Clone, Deserialize)]
pub struct RegretCsvRow {
    pub seed: u64,
    pub checkpoint_t: u64,
    pub pseudo_regret: f64,
    #[serde(rename = "realized_C")]
    pub realized_c: f64,
}

pub fn read_regret_csv(path: &Path) -> Result<Vec<RegretCsvRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| csv_err(path, e))).collect()
}

#[derive(Debug, Clone, Deserialize)]
pub struct EpochCsvRow {
    pub seed: u64,
    pub m: u32,
    pub arm: usize,
    pub n: u64,
    pub n_tilde: u64,
    pub r: Option<f64>,
    pub delta_est: Option<f64>,
    #[serde(rename = "C_m")]
    pub c_m: f64,
}

pub fn read_epochs_csv(path: &Path) -> Result<Vec<EpochCsvRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| csv_err(path, e))).collect()
}

pub fn read_summary(path: &Path) -> Result<AggregateReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Recomputes the aggregates from `regret.csv` alone.
pub fn aggregates_from_regret_csv(rows: &[RegretCsvRow], reference: &AggregateReport) -> Aggregates {
    let mut by_seed: BTreeMap<u64, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for row in rows {
        let entry = by_seed.entry(row.seed).or_default();
        entry.0.push(row.pseudo_regret);
        entry.1.push(row.realized_c);
    }
    let seed_rows: Vec<SeedRow> = reference
        .rows
        .iter()
        .map(|r| {
            let (pseudo, c) = by_seed.remove(&r.seed).unwrap_or_default();
            SeedRow {
                pseudo_regret: pseudo,
                realized_c: c,
                ..r.clone()
            }
        })
        .collect();
    Aggregates::compute(&reference.aggregates.checkpoints, &seed_rows)
}

fn family_of(algo: &AlgoSpec) -> Option<EpochFamily> {
    match algo {
        AlgoSpec::Barbar { .. } => Some(EpochFamily::Barbar),
        AlgoSpec::BarbarKnownMustar { .. } => Some(EpochFamily::BarbarKnownMuStar),
        AlgoSpec::KnownGap { .. } => Some(EpochFamily::KnownGap),
        _ => None,
    }
}

/// Rebuilds per-seed epoch records from `epochs.csv` rows. Round ranges
/// follow from the realized pull counts, `gap^{m-1}` from the previous
/// epoch's estimates.
pub fn epochs_from_rows(rows: &[EpochCsvRow], k: usize, origin: &Path) -> Result<BTreeMap<u64, Vec<EpochRecord>>> {
    let bad = |msg: String| Error::Format {
        path: origin.to_path_buf(),
        message: msg,
    };
    let mut grouped: BTreeMap<u64, BTreeMap<u32, Vec<&EpochCsvRow>>> = BTreeMap::new();
    for row in rows {
        grouped.entry(row.seed).or_default().entry(row.m).or_default().push(row);
    }
    let mut out = BTreeMap::new();
    for (seed, by_epoch) in grouped {
        let mut records: Vec<EpochRecord> = Vec::new();
        let mut start = 1u64;
        for (m, mut arms) in by_epoch {
            arms.sort_by_key(|r| r.arm);
            if arms.len() != k || arms.iter().enumerate().any(|(i, r)| r.arm != i) {
                return Err(bad(format!("seed {seed} epoch {m}: expected one row for each of {k} arms")));
            }
            let planned: Vec<u64> = arms.iter().map(|r| r.n).collect();
            let pulls: Vec<u64> = arms.iter().map(|r| r.n_tilde).collect();
            let planned_total: u64 = planned.iter().sum();
            let rounds: u64 = pulls.iter().sum();
            let gaps_prev = match records.last() {
                None => vec![1.0; k],
                Some(prev) => prev
                    .gaps
                    .clone()
                    .ok_or_else(|| bad(format!("seed {seed}: epoch {m} follows an unfinished epoch")))?,
            };
            let means: Option<Vec<f64>> = arms.iter().map(|r| r.r).collect();
            let gaps: Option<Vec<f64>> = arms.iter().map(|r| r.delta_est).collect();
            let (r_star, leader) = match &means {
                Some(means) => {
                    let update = close_gaps(m, means, &gaps_prev);
                    (Some(update.r_star), Some(update.leader))
                }
                None => (None, None),
            };
            records.push(EpochRecord {
                m,
                start,
                end: start + rounds - 1,
                planned_end: start + planned_total - 1,
                sums: means
                    .as_ref()
                    .map(|v| v.iter().zip(&planned).map(|(r, &n)| r * n as f64).collect())
                    .unwrap_or_default(),
                planned,
                planned_total,
                pulls,
                gaps_prev,
                completed: means.is_some(),
                means,
                r_star,
                leader,
                gaps,
                corruption: Vec::new(),
                corruption_max: arms[0].c_m,
            });
            start += rounds;
        }
        out.insert(seed, records);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedBounds {
    pub seed: u64,
    pub epoch_lengths: InvariantReport,
    pub event_e: EventEReport,
    /// Gap sandwich (standard BARBAR) or known-mu* bounds; conditional
    /// parts are only evaluated when event E holds.
    pub gap_bounds: InvariantReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub seeds: Vec<SeedBounds>,
    pub event_e_pass_fraction: f64,
    pub violations: Vec<String>,
}

impl BoundsReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Runs the epoch-level invariant suite on a run directory.
pub fn check_run_dir(dir: &Path) -> Result<BoundsReport> {
    let summary = read_summary(&dir.join(SUMMARY_JSON))?;
    let config: &ExperimentConfig = &summary.config;
    let family = family_of(&config.algo)
        .filter(|f| f.is_barbar())
        .ok_or_else(|| Error::NotEpochTrace(format!("algorithm {} has no BARBAR epochs", config.algo.key())))?;
    let lambda = config.barbar_schedule().map(|p| p.lambda());
    let k = config.instance.k();
    let epochs_path = dir.join(EPOCHS_CSV);
    let per_seed = epochs_from_rows(&read_epochs_csv(&epochs_path)?, k, &epochs_path)?;

    let mut seeds = Vec::new();
    let mut violations = Vec::new();
    let mut passes = 0usize;
    for &seed in &config.seeds {
        let empty = Vec::new();
        let epochs = per_seed.get(&seed).unwrap_or(&empty);
        let view = EpochView {
            player: config.algo.key(),
            k,
            horizon: config.horizon,
            lambda,
            family: Some(family),
            epochs,
        };
        let epoch_lengths = if family == EpochFamily::Barbar {
            check_epoch_lengths(view)?
        } else {
            InvariantReport::default()
        };
        let event_e = check_event_e(view, &config.instance)?;
        let gap_bounds = match family {
            EpochFamily::Barbar if event_e.passed => check_gap_sandwich(view, &config.instance)?,
            EpochFamily::Barbar => InvariantReport::default(),
            _ => check_known_mu_star(view, &config.instance, event_e.passed)?,
        };
        if event_e.passed {
            passes += 1;
        }
        for v in epoch_lengths.violations.iter().chain(&gap_bounds.violations) {
            violations.push(format!("seed {seed}: {v}"));
        }
        seeds.push(SeedBounds {
            seed,
            epoch_lengths,
            event_e,
            gap_bounds,
        });
    }
    Ok(BoundsReport {
        event_e_pass_fraction: passes as f64 / seeds.len().max(1) as f64,
        seeds,
        violations,
    })
}
