// SPDX-License-Identifier: Apache-2.0

//! The corrupted-bandit round protocol and its trace.
//!
//! Each round `t = 1..=T` runs, in this order:
//! 1. draw `R^t` from the instance;
//! 2. the adversary maps `R^t` (plus past choices `i_1..i_{t-1}`) to `R~^t`;
//! 3. the player picks `i_t` and observes `R~^t[i_t]` only.
//!
//! The adversary never sees `i_t` before emitting `R~^t`.

use serde::{Deserialize, Serialize};

use crate::algorithms::{EpochFamily, EpochRecord};
use crate::error::{Error, Result};
use crate::instance::BanditInstance;
use crate::rng::{RngStream, RunStreams};

/// A bandit algorithm driven one round at a time.
pub trait Player: Send {
    fn name(&self) -> &'static str;

    fn select_arm(&mut self, rng: &mut RngStream) -> usize;

    fn observe(&mut self, arm: usize, reward: f64);

    /// Epoch bookkeeping, including a truncated final epoch if any.
    fn epoch_records(&self) -> Vec<EpochRecord> {
        Vec::new()
    }

    fn epoch_family(&self) -> Option<EpochFamily> {
        None
    }

    fn lambda(&self) -> Option<f64> {
        None
    }
}

/// What the adversary is shown on round `t`.
#[derive(Debug, Clone, Copy)]
pub struct RoundView<'a> {
    pub t: u64,
    /// The stochastic rewards `R^t`.
    pub raw: &'a [f64],
    /// `i_1, ..., i_{t-1}`.
    pub past_choices: &'a [usize],
}

/// A corruption strategy. Raw rewards are presented once per round, so an
/// adversary that needs the raw history keeps its own copy.
pub trait Adversary: Send {
    fn name(&self) -> &'static str;

    /// Writes `R~^t` into `out`, which holds a copy of `R^t` on entry.
    fn corrupt(&mut self, view: &RoundView<'_>, rng: &mut RngStream, out: &mut [f64]);
}

/// Clamps an adversary output into `[0, 1]`; NaN entries fall back to `raw`.
pub fn clamp_rewards(raw: &[f64], out: &mut [f64]) {
    for (o, &r) in out.iter_mut().zip(raw) {
        *o = if o.is_nan() { r } else { o.clamp(0.0, 1.0) };
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub horizon: u64,
    pub delta: f64,
    pub master_seed: u64,
    pub replicate: u64,
    /// Keep full `R^t` and `R~^t` vectors (needed for realized regret).
    pub store_vectors: bool,
}

impl RunSettings {
    pub fn new(horizon: u64, delta: f64, master_seed: u64, replicate: u64) -> Self {
        Self {
            horizon,
            delta,
            master_seed,
            replicate,
            store_vectors: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 2 {
            return Err(Error::param("horizon", format!("{} < 2", self.horizon)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::param("delta", format!("{} is not in (0, 1)", self.delta)));
        }
        Ok(())
    }
}

/// One round as stored in the trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord<'a> {
    pub t: u64,
    pub raw: Option<&'a [f64]>,
    pub corrupted: Option<&'a [f64]>,
    pub chosen: usize,
    pub corruption_inf: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct RewardVectors {
    raw: Vec<f64>,
    corrupted: Vec<f64>,
}

/// Everything that happened in one run. Corruption is stored sparsely: only
/// rounds where `R~^t != R^t` carry an entry.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    instance: BanditInstance,
    settings: RunSettings,
    player: String,
    adversary: String,
    lambda: Option<f64>,
    epoch_family: Option<EpochFamily>,
    chosen: Vec<usize>,
    corrupted_rounds: Vec<u64>,
    corruption_inf: Vec<f64>,
    corruption_abs: Vec<f64>,
    vectors: Option<RewardVectors>,
    epochs: Vec<EpochRecord>,
}

impl RunTrace {
    pub fn instance(&self) -> &BanditInstance {
        &self.instance
    }

    pub fn settings(&self) -> &RunSettings {
        &self.settings
    }

    pub fn horizon(&self) -> u64 {
        self.settings.horizon
    }

    pub fn player(&self) -> &str {
        &self.player
    }

    pub fn adversary(&self) -> &str {
        &self.adversary
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    pub fn epoch_family(&self) -> Option<EpochFamily> {
        self.epoch_family
    }

    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }

    pub fn choices(&self) -> &[usize] {
        &self.chosen
    }

    pub fn epochs(&self) -> &[EpochRecord] {
        &self.epochs
    }

    pub fn has_vectors(&self) -> bool {
        self.vectors.is_some()
    }

    /// `R^t` for round `t` (1-based).
    pub fn raw(&self, t: u64) -> Option<&[f64]> {
        let k = self.instance.k();
        let i = (t - 1) as usize * k;
        self.vectors.as_ref().map(|v| &v.raw[i..i + k])
    }

    /// `R~^t` for round `t` (1-based).
    pub fn corrupted(&self, t: u64) -> Option<&[f64]> {
        let k = self.instance.k();
        let i = (t - 1) as usize * k;
        self.vectors.as_ref().map(|v| &v.corrupted[i..i + k])
    }

    /// Rounds with nonzero corruption, as `(t, ||R~^t - R^t||_inf, |R~^t - R^t|)`.
    pub fn corruption_events(&self) -> impl Iterator<Item = (u64, f64, &[f64])> + '_ {
        let k = self.instance.k();
        self.corrupted_rounds
            .iter()
            .zip(&self.corruption_inf)
            .zip(self.corruption_abs.chunks_exact(k))
            .map(|((&t, &inf), abs)| (t, inf, abs))
    }

    pub fn corruption_at(&self, t: u64) -> f64 {
        match self.corrupted_rounds.binary_search(&t) {
            Ok(i) => self.corruption_inf[i],
            Err(_) => 0.0,
        }
    }

    pub fn round(&self, t: u64) -> RoundRecord<'_> {
        RoundRecord {
            t,
            raw: self.raw(t),
            corrupted: self.corrupted(t),
            chosen: self.chosen[(t - 1) as usize],
            corruption_inf: self.corruption_at(t),
        }
    }

    pub fn rounds(&self) -> impl Iterator<Item = RoundRecord<'_>> + '_ {
        let mut next_event = 0usize;
        (1..=self.chosen.len() as u64).map(move |t| {
            let corruption_inf = match self.corrupted_rounds.get(next_event) {
                Some(&ct) if ct == t => {
                    next_event += 1;
                    self.corruption_inf[next_event - 1]
                }
                _ => 0.0,
            };
            RoundRecord {
                t,
                raw: self.raw(t),
                corrupted: self.corrupted(t),
                chosen: self.chosen[(t - 1) as usize],
                corruption_inf,
            }
        })
    }

    /// Overwrites the epoch list. Used by tests that forge traces and by
    /// loaders that rebuild traces from files.
    pub fn with_epochs(mut self, epochs: Vec<EpochRecord>) -> Self {
        self.epochs = epochs;
        self.fill_epoch_corruption();
        self
    }

    fn fill_epoch_corruption(&mut self) {
        let k = self.instance.k();
        for epoch in &mut self.epochs {
            let mut per_arm = vec![0.0; k];
            let lo = self.corrupted_rounds.partition_point(|&t| t < epoch.start);
            let hi = self.corrupted_rounds.partition_point(|&t| t <= epoch.end);
            for e in lo..hi {
                for (acc, &c) in per_arm.iter_mut().zip(&self.corruption_abs[e * k..(e + 1) * k]) {
                    *acc += c;
                }
            }
            epoch.corruption_max = per_arm.iter().copied().fold(0.0, f64::max);
            epoch.corruption = per_arm;
        }
    }
}

/// Incrementally builds a [`RunTrace`]; used by [`run_protocol`] and by
/// tests that need hand-made traces.
#[derive(Debug)]
pub struct TraceBuilder {
    trace: RunTrace,
}

impl TraceBuilder {
    pub fn new(instance: BanditInstance, settings: RunSettings, player: &str, adversary: &str) -> Self {
        let k = instance.k();
        let cap = settings.horizon as usize;
        let vectors = settings.store_vectors.then(|| RewardVectors {
            raw: Vec::with_capacity(cap * k),
            corrupted: Vec::with_capacity(cap * k),
        });
        Self {
            trace: RunTrace {
                instance,
                settings,
                player: player.to_owned(),
                adversary: adversary.to_owned(),
                lambda: None,
                epoch_family: None,
                chosen: Vec::with_capacity(cap),
                corrupted_rounds: Vec::new(),
                corruption_inf: Vec::new(),
                corruption_abs: Vec::new(),
                vectors,
                epochs: Vec::new(),
            },
        }
    }

    /// Appends round `len + 1`. `corrupted` must already be clamped.
    pub fn push(&mut self, raw: &[f64], corrupted: &[f64], chosen: usize) {
        let t = self.trace.chosen.len() as u64 + 1;
        let mut inf = 0.0f64;
        for (&c, &r) in corrupted.iter().zip(raw) {
            inf = inf.max((c - r).abs());
        }
        if inf > 0.0 {
            self.trace.corrupted_rounds.push(t);
            self.trace.corruption_inf.push(inf);
            self.trace
                .corruption_abs
                .extend(corrupted.iter().zip(raw).map(|(&c, &r)| (c - r).abs()));
        }
        if let Some(v) = self.trace.vectors.as_mut() {
            v.raw.extend_from_slice(raw);
            v.corrupted.extend_from_slice(corrupted);
        }
        self.trace.chosen.push(chosen);
    }

    pub fn finish(
        mut self,
        epochs: Vec<EpochRecord>,
        family: Option<EpochFamily>,
        lambda: Option<f64>,
    ) -> RunTrace {
        self.trace.lambda = lambda;
        self.trace.epoch_family = family;
        self.trace.epochs = epochs;
        self.trace.fill_epoch_corruption();
        self.trace
    }
}

/// Runs `settings.horizon` rounds of the protocol.
pub fn run_protocol(
    instance: &BanditInstance,
    player: &mut dyn Player,
    adversary: &mut dyn Adversary,
    settings: &RunSettings,
) -> Result<RunTrace> {
    settings.validate()?;
    let k = instance.k();
    let mut streams = RunStreams::new(settings.master_seed, settings.replicate);
    let mut builder = TraceBuilder::new(instance.clone(), settings.clone(), player.name(), adversary.name());
    let mut raw = vec![0.0; k];
    let mut corrupted = vec![0.0; k];

    for t in 1..=settings.horizon {
        instance.sample_rewards_into(&mut streams.rewards, &mut raw);
        corrupted.copy_from_slice(&raw);
        let view = RoundView {
            t,
            raw: &raw,
            past_choices: &builder.trace.chosen,
        };
        adversary.corrupt(&view, &mut streams.adversary, &mut corrupted);
        clamp_rewards(&raw, &mut corrupted);

        let arm = player.select_arm(&mut streams.player);
        if arm >= k {
            return Err(Error::ArmOutOfRange { arm, k });
        }
        player.observe(arm, corrupted[arm]);
        builder.push(&raw, &corrupted, arm);
    }

    Ok(builder.finish(player.epoch_records(), player.epoch_family(), player.lambda()))
}
