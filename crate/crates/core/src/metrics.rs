// SPDX-License-Identifier: Apache-2.0

//! Regret notions, corruption accounting and reference bounds, all computed
//! from a [`RunTrace`].
//!
//! Every running sum uses Neumaier compensation so that algebraically equal
//! quantities computed along different paths agree to within an ulp or two.

use serde::{Deserialize, Serialize};

use crate::algorithms::{barbar_lambda, EpochRecord};
use crate::error::{Error, Result};
use crate::instance::BanditInstance;
use crate::protocol::RunTrace;

/// Constant on the `K * C` term of [`regret_bound`].
pub const BOUND_CORRUPTION_CONST: f64 = 512.0;
/// Constant on the gap-sum term of [`regret_bound`]: `2 * 32^2 * 1024`.
pub const BOUND_GAP_CONST: f64 = 2.0 * 32.0 * 32.0 * 1024.0;

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for Neumaier {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Neumaier::new();
        iter.into_iter().for_each(|x| acc.add(x));
        acc
    }
}

pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().collect::<Neumaier>().value()
}

/// `|a - b| <= rel * max(|a|, |b|, 1)`.
pub fn approx_eq(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Powers of two up to `horizon`, then `horizon` itself.
pub fn default_checkpoints(horizon: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (0..64).map(|j| 1u64 << j).take_while(|&c| c <= horizon).collect();
    if out.last() != Some(&horizon) {
        out.push(horizon);
    }
    out
}

/// Values of a cumulative quantity at a list of rounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub checkpoints: Vec<u64>,
    pub values: Vec<f64>,
}

impl Trajectory {
    pub fn last(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

fn cumulative_at(horizon: u64, checkpoints: &[u64], mut term: impl FnMut(u64) -> f64) -> (Trajectory, f64) {
    let mut acc = Neumaier::new();
    let mut values = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    for t in 1..=horizon {
        acc.add(term(t));
        while next.peek().is_some_and(|&&c| c == t) {
            values.push(acc.value());
            next.next();
        }
    }
    let kept = checkpoints[..values.len()].to_vec();
    (
        Trajectory {
            checkpoints: kept,
            values,
        },
        acc.value(),
    )
}

/// `R(t) = sum_{s <= t} (mu* - mu_{i_s})` at each checkpoint. Checkpoints
/// must be increasing; those beyond the horizon are dropped.
pub fn pseudo_regret(trace: &RunTrace, checkpoints: &[u64]) -> Trajectory {
    let gaps = trace.instance().gaps();
    let choices = trace.choices();
    cumulative_at(trace.len() as u64, checkpoints, |t| gaps[choices[(t - 1) as usize]]).0
}

/// Final pseudo-regret summed round by round.
pub fn pseudo_regret_total(trace: &RunTrace) -> f64 {
    let gaps = trace.instance().gaps();
    neumaier_sum(trace.choices().iter().map(|&c| gaps[c]))
}

/// Pull counts `T_i`.
pub fn pull_counts(trace: &RunTrace) -> Vec<u64> {
    let mut counts = vec![0u64; trace.instance().k()];
    for &c in trace.choices() {
        counts[c] += 1;
    }
    counts
}

/// Final pseudo-regret as `sum_i T_i * gap_i`.
pub fn pseudo_regret_by_counts(trace: &RunTrace) -> f64 {
    let gaps = trace.instance().gaps();
    neumaier_sum(pull_counts(trace).iter().zip(gaps).map(|(&n, &g)| n as f64 * g))
}

fn vectors_or_err(trace: &RunTrace) -> Result<()> {
    if trace.has_vectors() {
        Ok(())
    } else {
        Err(Error::VectorsNotStored)
    }
}

/// `max_i sum_t (v^t_i - v^t_{i_t})` over rounds accepted by `keep`,
/// evaluated as per-arm column sums minus the chosen-arm sum.
fn hindsight_regret(
    trace: &RunTrace,
    vector: impl Fn(&RunTrace, u64) -> &[f64],
    keep: impl Fn(u64) -> bool,
) -> f64 {
    let k = trace.instance().k();
    let mut columns = vec![Neumaier::new(); k];
    let mut chosen = Neumaier::new();
    let mut any = false;
    for (idx, &c) in trace.choices().iter().enumerate() {
        let t = idx as u64 + 1;
        if !keep(t) {
            continue;
        }
        any = true;
        let v = vector(trace, t);
        for (col, &x) in columns.iter_mut().zip(v) {
            col.add(x);
        }
        chosen.add(v[c]);
    }
    if !any {
        return 0.0;
    }
    let chosen = chosen.value();
    columns.iter().map(|c| c.value() - chosen).fold(f64::NEG_INFINITY, f64::max)
}

fn corrupted_vec(trace: &RunTrace, t: u64) -> &[f64] {
    trace.corrupted(t).expect("vectors checked")
}

fn raw_vec(trace: &RunTrace, t: u64) -> &[f64] {
    trace.raw(t).expect("vectors checked")
}

/// `R' = max_i sum_t (R~^t_i - R~^t_{i_t})`.
pub fn realized_regret(trace: &RunTrace) -> Result<f64> {
    vectors_or_err(trace)?;
    Ok(hindsight_regret(trace, corrupted_vec, |_| true))
}

/// `R'` accumulated online: the per-arm regret vector is updated every round.
pub fn realized_regret_incremental(trace: &RunTrace) -> Result<f64> {
    vectors_or_err(trace)?;
    let k = trace.instance().k();
    let mut running = vec![Neumaier::new(); k];
    for (idx, &c) in trace.choices().iter().enumerate() {
        let v = corrupted_vec(trace, idx as u64 + 1);
        for (acc, &x) in running.iter_mut().zip(v) {
            acc.add(x);
            acc.add(-v[c]);
        }
    }
    Ok(running.iter().map(Neumaier::value).fold(f64::NEG_INFINITY, f64::max))
}

/// `R'` on the uncorrupted rewards.
pub fn realized_regret_raw(trace: &RunTrace) -> Result<f64> {
    vectors_or_err(trace)?;
    Ok(hindsight_regret(trace, raw_vec, |_| true))
}

/// `R'_in`: `R'` restricted to rounds with zero corruption.
pub fn inlier_regret(trace: &RunTrace) -> Result<f64> {
    vectors_or_err(trace)?;
    Ok(hindsight_regret(trace, corrupted_vec, |t| trace.corruption_at(t) == 0.0))
}

/// `R* = sum_t (R^t_{i*} - R^t_{i_t})` on the uncorrupted rewards.
pub fn best_arm_regret(trace: &RunTrace) -> Result<f64> {
    vectors_or_err(trace)?;
    let best = trace.instance().best_arm();
    Ok(neumaier_sum(trace.choices().iter().enumerate().map(|(idx, &c)| {
        let v = raw_vec(trace, idx as u64 + 1);
        v[best] - v[c]
    })))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochCorruption {
    pub m: u32,
    /// `C_m^i`.
    pub per_arm: Vec<f64>,
    /// `C_m = max_i C_m^i`.
    pub max: f64,
    /// `sum_{t in epoch} ||R~^t - R^t||_inf`.
    pub inf_sum: f64,
    /// `N_m`.
    pub planned_total: u64,
    pub completed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptionLevel {
    /// `C = sum_t ||R~^t - R^t||_inf`.
    pub total: f64,
    /// Number of rounds with nonzero corruption.
    pub corrupted_rounds: u64,
    pub per_epoch: Vec<EpochCorruption>,
}

pub fn corruption_level(trace: &RunTrace) -> CorruptionLevel {
    let mut total = Neumaier::new();
    let mut count = 0u64;
    for (_, inf, _) in trace.corruption_events() {
        total.add(inf);
        count += 1;
    }
    let per_epoch = trace
        .epochs()
        .iter()
        .map(|e| EpochCorruption {
            m: e.m,
            per_arm: e.corruption.clone(),
            max: e.corruption_max,
            inf_sum: neumaier_sum(
                trace
                    .corruption_events()
                    .filter(|&(t, _, _)| t >= e.start && t <= e.end)
                    .map(|(_, inf, _)| inf),
            ),
            planned_total: e.planned_total,
            completed: e.completed,
        })
        .collect();
    CorruptionLevel {
        total: total.value(),
        corrupted_rounds: count,
        per_epoch,
    }
}

/// Cumulative `C` at each checkpoint.
pub fn corruption_trajectory(trace: &RunTrace, checkpoints: &[u64]) -> Trajectory {
    cumulative_at(trace.len() as u64, checkpoints, |t| trace.corruption_at(t)).0
}

/// `rho_m = sum_{s <= m} 2 C_s / (8^{m-s} N_s)`, one entry per epoch record.
pub fn discounted_corruption(epochs: &[EpochRecord]) -> Vec<f64> {
    (0..epochs.len())
        .map(|m| {
            neumaier_sum(
                epochs[..=m]
                    .iter()
                    .enumerate()
                    .map(|(s, e)| 2.0 * e.corruption_max / (8f64.powi((m - s) as i32) * e.planned_total as f64)),
            )
        })
        .collect()
}

/// The same sequence via `rho_m = rho_{m-1} / 8 + 2 C_m / N_m`.
pub fn discounted_corruption_recursive(epochs: &[EpochRecord]) -> Vec<f64> {
    let mut rho = 0.0;
    epochs
        .iter()
        .map(|e| {
            rho = rho / 8.0 + 2.0 * e.corruption_max / e.planned_total as f64;
            rho
        })
        .collect()
}

/// Reference value `a K C + b sum_{i != i*} (log2 T / gap_i) ln((8K/delta) log2 T)`
/// with `a =` [`BOUND_CORRUPTION_CONST`] and `b =` [`BOUND_GAP_CONST`].
pub fn regret_bound(instance: &BanditInstance, corruption: f64, delta: f64, horizon: u64) -> f64 {
    let k = instance.k() as f64;
    let log_t = (horizon as f64).log2().max(1.0);
    let log_term = barbar_lambda(instance.k(), delta, horizon) / 1024.0;
    let best = instance.best_arm();
    let gap_sum = neumaier_sum(
        instance
            .gaps()
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != best)
            .map(|(_, g)| log_t / g),
    );
    BOUND_CORRUPTION_CONST * k * corruption + BOUND_GAP_CONST * gap_sum * log_term
}

/// Converts a high-probability pseudo-regret bound `B` into one on `R'`:
/// `B (1 + sqrt(ln(1/delta)) + ln(K/delta))`, holding with probability
/// `1 - 3 delta`. Requires `B >= max_{i != i*} 1/gap_i`.
pub fn realized_regret_bound(instance: &BanditInstance, pseudo_bound: f64, delta: f64) -> Result<f64> {
    let needed = 1.0 / instance.min_gap();
    if pseudo_bound.is_nan() || pseudo_bound < needed {
        return Err(Error::param(
            "pseudo_bound",
            format!("{pseudo_bound} is below max 1/gap = {needed}"),
        ));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("{delta} is not in (0, 1)")));
    }
    let k = instance.k() as f64;
    Ok(pseudo_bound * (1.0 + (1.0 / delta).ln().sqrt() + (k / delta).ln()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub pseudo_regret: Trajectory,
    pub pseudo_regret_by_counts: f64,
    pub pull_counts: Vec<u64>,
    pub realized_regret: Option<f64>,
    pub realized_regret_raw: Option<f64>,
    pub best_arm_regret: Option<f64>,
    pub inlier_regret: Option<f64>,
    pub corruption: CorruptionLevel,
    pub corruption_trajectory: Trajectory,
    pub rho: Vec<f64>,
    pub bound: f64,
}

impl RegretReport {
    pub fn final_pseudo_regret(&self) -> f64 {
        self.pseudo_regret.last()
    }
}

/// Every metric at once. Vector-based regrets are `None` when the trace
/// was recorded without reward vectors.
pub fn regret_report(trace: &RunTrace, checkpoints: &[u64]) -> RegretReport {
    let corruption = corruption_level(trace);
    let bound = regret_bound(trace.instance(), corruption.total, trace.settings().delta, trace.horizon());
    RegretReport {
        pseudo_regret: pseudo_regret(trace, checkpoints),
        pseudo_regret_by_counts: pseudo_regret_by_counts(trace),
        pull_counts: pull_counts(trace),
        realized_regret: realized_regret(trace).ok(),
        realized_regret_raw: realized_regret_raw(trace).ok(),
        best_arm_regret: best_arm_regret(trace).ok(),
        inlier_regret: inlier_regret(trace).ok(),
        corruption_trajectory: corruption_trajectory(trace, checkpoints),
        corruption,
        rho: discounted_corruption(trace.epochs()),
        bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{RunSettings, TraceBuilder};

    fn fixed_trace(raw: &[[f64; 2]], corrupted: &[[f64; 2]], chosen: &[usize]) -> RunTrace {
        let inst = BanditInstance::deterministic(&[1.0, 0.7]).unwrap();
        let mut b = TraceBuilder::new(inst, RunSettings::new(raw.len() as u64, 0.05, 0, 0), "test", "test");
        for ((r, c), &i) in raw.iter().zip(corrupted).zip(chosen) {
            b.push(r, c, i);
        }
        b.finish(Vec::new(), None, None)
    }

    #[test]
    fn checkpoints_grid() {
        assert_eq!(default_checkpoints(10), vec![1, 2, 4, 8, 10]);
        assert_eq!(default_checkpoints(8), vec![1, 2, 4, 8]);
    }

    #[test]
    fn pseudo_regret_direct_sum() {
        let raw = vec![[1.0, 0.7]; 12];
        let mut chosen = vec![1usize; 10];
        chosen.extend([0, 0]);
        let trace = fixed_trace(&raw, &raw, &chosen);
        let traj = pseudo_regret(&trace, &default_checkpoints(12));
        assert!((traj.last() - 3.0).abs() < 1e-12);
        assert!((pseudo_regret_by_counts(&trace) - 3.0).abs() < 1e-12);
        assert!(traj.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn corruption_example() {
        let raw = [[0.5, 0.5], [0.5, 0.5]];
        let corrupted = [[0.7, 0.6], [0.5, 0.2]];
        let trace = fixed_trace(&raw, &corrupted, &[0, 0]);
        let level = corruption_level(&trace);
        assert!((level.total - 0.5).abs() < 1e-12);
        assert_eq!(level.corrupted_rounds, 2);
    }

    #[test]
    fn worst_policy_realized_regret() {
        let raw = vec![[1.0, 0.0]; 20];
        let trace = fixed_trace(&raw, &raw, &[1; 20]);
        assert_eq!(realized_regret(&trace).unwrap(), 20.0);
        assert_eq!(inlier_regret(&trace).unwrap(), 20.0);
        assert_eq!(best_arm_regret(&trace).unwrap(), 20.0);
    }

    #[test]
    fn all_rounds_corrupted_inlier_is_zero() {
        let raw = vec![[1.0, 0.0]; 5];
        let corrupted = vec![[0.0, 1.0]; 5];
        let trace = fixed_trace(&raw, &corrupted, &[0; 5]);
        assert_eq!(inlier_regret(&trace).unwrap(), 0.0);
        assert_eq!(realized_regret(&trace).unwrap(), 5.0);
    }

    #[test]
    fn rho_example() {
        let mk = |c: f64, n: u64| EpochRecord {
            m: 0,
            start: 1,
            end: 1,
            planned_end: 1,
            planned: vec![],
            planned_total: n,
            pulls: vec![],
            sums: vec![],
            gaps_prev: vec![],
            means: None,
            r_star: None,
            leader: None,
            gaps: None,
            completed: true,
            corruption: vec![],
            corruption_max: c,
        };
        let rho = discounted_corruption(&[mk(10.0, 100), mk(0.0, 400)]);
        assert!((rho[1] - 0.025).abs() < 1e-15);
        assert_eq!(rho, discounted_corruption_recursive(&[mk(10.0, 100), mk(0.0, 400)]));
    }

    #[test]
    fn bound_scaling() {
        let a = BanditInstance::bernoulli(&[0.9, 0.7, 0.5]).unwrap();
        let b = BanditInstance::bernoulli(&[0.9, 0.5, 0.1]).unwrap();
        let ra = regret_bound(&a, 0.0, 0.05, 1 << 20);
        let rb = regret_bound(&b, 0.0, 0.05, 1 << 20);
        assert!((ra / rb - 2.0).abs() < 1e-12);
        assert!(regret_bound(&a, 10.0, 0.05, 1 << 20) - ra > 0.0);
    }

    #[test]
    fn conversion_premise() {
        let inst = BanditInstance::bernoulli(&[0.9, 0.8]).unwrap();
        assert!(realized_regret_bound(&inst, 5.0, 0.05).is_err());
        assert!(realized_regret_bound(&inst, 100.0, 0.05).unwrap() > 100.0);
    }

    #[test]
    fn neumaier_beats_naive() {
        let vals = [1e16, 1.0, -1e16];
        assert_eq!(neumaier_sum(vals), 1.0);
    }
}
