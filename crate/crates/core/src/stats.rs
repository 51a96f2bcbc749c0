// SPDX-License-Identifier: Apache-2.0

//! Concentration bounds and trace-level invariant checkers.
//!
//! Inequalities are evaluated on stored quantities with a relative slack of
//! [`REL_EPS`] to absorb summation-order differences and nothing else.

use serde::{Deserialize, Serialize};

use crate::algorithms::{EpochFamily, EpochRecord};
use crate::error::{Error, Result};
use crate::instance::BanditInstance;
use crate::metrics::discounted_corruption;
use crate::protocol::RunTrace;

/// The epoch-level slice of a run that the checkers need. Built from a
/// [`RunTrace`] or reconstructed from `epochs.csv`.
#[derive(Debug, Clone, Copy)]
pub struct EpochView<'a> {
    pub player: &'a str,
    pub k: usize,
    pub horizon: u64,
    pub lambda: Option<f64>,
    pub family: Option<EpochFamily>,
    pub epochs: &'a [EpochRecord],
}

impl<'a> From<&'a RunTrace> for EpochView<'a> {
    fn from(trace: &'a RunTrace) -> Self {
        Self {
            player: trace.player(),
            k: trace.instance().k(),
            horizon: trace.horizon(),
            lambda: trace.lambda(),
            family: trace.epoch_family(),
            epochs: trace.epochs(),
        }
    }
}

pub const REL_EPS: f64 = 1e-12;

/// `a <= b` up to [`REL_EPS`].
pub fn le_eps(a: f64, b: f64) -> bool {
    a <= b + REL_EPS * a.abs().max(b.abs()).max(1.0)
}

/// `sqrt(3 E ln(2/delta))`: for a sum `X` of independent `[0,1]` variables
/// with mean `E`, `|X - E| <= radius` with probability at least `1 - delta`.
pub fn chernoff_radius(expectation: f64, delta: f64) -> Result<f64> {
    if !(expectation > 0.0 && expectation.is_finite()) {
        return Err(Error::param("expectation", format!("{expectation} must be > 0")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("{delta} is not in (0, 1)")));
    }
    Ok((3.0 * expectation * (2.0 / delta).ln()).sqrt())
}

/// `V / b + b ln(1/delta)`: for a martingale with differences bounded by `b`
/// and total conditional variance at most `V`, the sum stays below this
/// value with probability at least `1 - delta`.
pub fn freedman_bound(variance: f64, b: f64, delta: f64) -> Result<f64> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::param("b", format!("{b} must be > 0")));
    }
    if !(variance >= 0.0 && variance.is_finite()) {
        return Err(Error::param("variance", format!("{variance} must be >= 0")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", format!("{delta} is not in (0, 1)")));
    }
    Ok(variance / b + b * (1.0 / delta).ln())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventECheck {
    pub m: u32,
    pub arm: usize,
    /// `|r_i - mu_i|`.
    pub lhs: f64,
    /// `2 C_m / N_m + gap_i^{m-1} / 16`.
    pub rhs: f64,
    /// Realized pulls.
    pub pulls: u64,
    pub planned: u64,
    pub deviation_ok: bool,
    pub pulls_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventEReport {
    pub checks: Vec<EventECheck>,
    pub violations: Vec<String>,
    pub passed: bool,
}

fn require_epochs(trace: &EpochView<'_>) -> Result<EpochFamily> {
    match trace.family {
        Some(f) if f.is_barbar() => Ok(f),
        Some(f) => Err(Error::NotEpochTrace(format!("{:?} epochs do not follow BARBAR sampling", f))),
        None => Err(Error::NotEpochTrace(format!("player {} has no epoch structure", trace.player))),
    }
}

fn corruption_rate(e: &EpochRecord) -> f64 {
    2.0 * e.corruption_max / e.planned_total as f64
}

/// Evaluates event E on every completed epoch of a BARBAR trace, using the
/// true means of `instance`.
pub fn check_event_e<'a>(trace: impl Into<EpochView<'a>>, instance: &BanditInstance) -> Result<EventEReport> {
    let trace: EpochView<'a> = trace.into();
    require_epochs(&trace)?;
    let mu = instance.means();
    let mut checks = Vec::new();
    let mut violations = Vec::new();
    for e in trace.epochs.iter().filter(|e| e.completed) {
        let means = e
            .means
            .as_ref()
            .ok_or_else(|| Error::Invariant(format!("completed epoch {} has no estimates", e.m)))?;
        for arm in 0..mu.len() {
            let lhs = (means[arm] - mu[arm]).abs();
            let rhs = corruption_rate(e) + e.gaps_prev[arm] / 16.0;
            let deviation_ok = le_eps(lhs, rhs);
            let pulls_ok = e.pulls[arm] <= 2 * e.planned[arm];
            if !deviation_ok {
                violations.push(format!(
                    "epoch {} arm {arm}: |r - mu| = {lhs:.6} > {rhs:.6}",
                    e.m
                ));
            }
            if !pulls_ok {
                violations.push(format!(
                    "epoch {} arm {arm}: {} pulls > 2 * {} planned",
                    e.m, e.pulls[arm], e.planned[arm]
                ));
            }
            checks.push(EventECheck {
                m: e.m,
                arm,
                lhs,
                rhs,
                pulls: e.pulls[arm],
                planned: e.planned[arm],
                deviation_ok,
                pulls_ok,
            });
        }
    }
    Ok(EventEReport {
        passed: violations.is_empty(),
        checks,
        violations,
    })
}

/// Outcome of a deterministic invariant suite.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub checked: usize,
    pub violations: Vec<String>,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations.push(msg());
        }
    }

    pub fn into_result(self) -> Result<Self> {
        if self.passed() {
            Ok(self)
        } else {
            Err(Error::Invariant(self.violations.join("; ")))
        }
    }
}

/// Epoch length bounds `lambda 4^{m-1} <= N_m <= K ceil(lambda 4^{m-1})`
/// on completed epochs, at most `log2 T` started epochs, and epoch
/// boundaries that partition the played rounds.
pub fn check_epoch_lengths<'a>(trace: impl Into<EpochView<'a>>) -> Result<InvariantReport> {
    let trace: EpochView<'a> = trace.into();
    require_epochs(&trace)?;
    let lambda = trace
        .lambda
        .ok_or_else(|| Error::NotEpochTrace("trace does not record lambda".into()))?;
    let k = trace.k as f64;
    let mut report = InvariantReport::default();
    let epochs = trace.epochs;
    let log_t = (trace.horizon as f64).log2();
    report.check(epochs.len() as f64 <= log_t, || {
        format!("epoch count: {} epochs started, above log2 T = {log_t:.3}", epochs.len())
    });
    let mut next_start = 1u64;
    for (idx, e) in epochs.iter().enumerate() {
        report.check(e.m as usize == idx + 1, || format!("epoch {} listed at position {}", e.m, idx + 1));
        report.check(e.start == next_start, || {
            format!("epoch {} starts at {} instead of {next_start}", e.m, e.start)
        });
        let planned_sum: u64 = e.planned.iter().sum();
        report.check(planned_sum == e.planned_total, || {
            format!("epoch {}: planned counts sum to {planned_sum}, N_m = {}", e.m, e.planned_total)
        });
        let played: u64 = e.pulls.iter().sum();
        report.check(played == e.rounds(), || {
            format!("epoch {}: {played} pulls recorded over {} rounds", e.m, e.rounds())
        });
        if e.completed {
            let base = lambda * 4f64.powi(e.m as i32 - 1);
            let n = e.planned_total as f64;
            report.check(base <= n && n <= k * base.ceil(), || {
                format!(
                    "epoch length: epoch {} has N_m = {} outside [{base:.3}, {:.3}]",
                    e.m,
                    e.planned_total,
                    k * base.ceil()
                )
            });
            report.check(e.end == e.start + e.planned_total - 1, || {
                format!("epoch {} completed after {} of {} rounds", e.m, e.rounds(), e.planned_total)
            });
        } else {
            report.check(idx + 1 == epochs.len() && e.end == trace.horizon, || {
                format!("epoch {} is incomplete but not the final epoch", e.m)
            });
        }
        next_start = e.end + 1;
    }
    if !epochs.is_empty() {
        report.check(next_start == trace.horizon + 1, || {
            format!("epochs cover rounds 1..{} but T = {}", next_start - 1, trace.horizon)
        });
    }
    Ok(report)
}

/// Estimate sandwiches conditional on event E, with `rho_m` the discounted
/// corruption rate:
/// `-2C_m/N_m - gap_{i*}^{m-1}/8 <= r* - mu* <= 2C_m/N_m`,
/// `gap_i^m <= 2(gap_i + 2^-m + rho_m)` and
/// `gap_i^m >= gap_i/2 - 3 rho_m - (3/4) 2^-m`.
pub fn check_gap_sandwich<'a>(trace: impl Into<EpochView<'a>>, instance: &BanditInstance) -> Result<InvariantReport> {
    let trace: EpochView<'a> = trace.into();
    if require_epochs(&trace)? != EpochFamily::Barbar {
        return Err(Error::NotEpochTrace("gap sandwich applies to standard BARBAR".into()));
    }
    let gaps = instance.gaps();
    let best = instance.best_arm();
    let mu_star = instance.mu_star();
    let rho = discounted_corruption(trace.epochs);
    let mut report = InvariantReport::default();
    for (e, &rho_m) in trace.epochs.iter().zip(&rho).filter(|(e, _)| e.completed) {
        let (Some(r_star), Some(est)) = (e.r_star, e.gaps.as_ref()) else {
            return Err(Error::Invariant(format!("completed epoch {} has no gap estimates", e.m)));
        };
        let rate = corruption_rate(e);
        let diff = r_star - mu_star;
        report.check(le_eps(-rate - e.gaps_prev[best] / 8.0, diff) && le_eps(diff, rate), || {
            format!("r* band: epoch {}: r* - mu* = {diff:.6} outside the band (2C/N = {rate:.6})", e.m)
        });
        let scale = 0.5f64.powi(e.m as i32);
        for (arm, (&g, &d)) in est.iter().zip(gaps).enumerate() {
            let upper = 2.0 * (d + scale + rho_m);
            report.check(le_eps(g, upper), || {
                format!("gap upper bound: epoch {} arm {arm}: estimate {g:.6} > {upper:.6}", e.m)
            });
            let lower = d / 2.0 - 3.0 * rho_m - 0.75 * scale;
            report.check(le_eps(lower, g), || {
                format!("gap lower bound: epoch {} arm {arm}: estimate {g:.6} < {lower:.6}", e.m)
            });
        }
    }
    Ok(report)
}

/// Known-mu* variant: `gap_i^m >= gap_i/2 - 2C_m/N_m` (conditional on
/// event E) when `conditional` is set, and the halving rule
/// `gap_i^m >= gap_i^{m-1}/2` always.
pub fn check_known_mu_star<'a>(trace: impl Into<EpochView<'a>>, instance: &BanditInstance, conditional: bool) -> Result<InvariantReport> {
    let trace: EpochView<'a> = trace.into();
    if require_epochs(&trace)? != EpochFamily::BarbarKnownMuStar {
        return Err(Error::NotEpochTrace("trace is not from the known-mu* variant".into()));
    }
    let gaps = instance.gaps();
    let mut report = InvariantReport::default();
    for e in trace.epochs.iter().filter(|e| e.completed) {
        let Some(est) = e.gaps.as_ref() else {
            return Err(Error::Invariant(format!("completed epoch {} has no gap estimates", e.m)));
        };
        let rate = corruption_rate(e);
        for (arm, (&g, (&d, &prev))) in est.iter().zip(gaps.iter().zip(&e.gaps_prev)).enumerate() {
            report.check(le_eps(prev / 2.0, g), || {
                format!("halving: epoch {} arm {arm}: {g:.6} < {prev:.6} / 2", e.m)
            });
            if conditional {
                let lower = d / 2.0 - rate;
                report.check(le_eps(lower, g), || {
                    format!("known-mu* lower bound: epoch {} arm {arm}: estimate {g:.6} < {lower:.6}", e.m)
                });
            }
        }
    }
    Ok(report)
}
