// SPDX-License-Identifier: Apache-2.0

//! Attacker that zeroes one arm for the whole of a chosen BARBAR epoch.
//!
//! The player's epoch boundaries depend on its own noisy estimates, so the
//! attacker replays them: it feeds a shadow [`BarbarState`] with
//! `(i_{t-1}, R~^{t-1}[i_{t-1}])`, which is exactly what the player saw.

use crate::algorithms::{BarbarParams, BarbarState};
use crate::error::{Error, Result};
use crate::protocol::RoundView;

/// `floor(2 log2 K) + 1`, the first epoch whose length outgrows the
/// sub-`1/K` sampling weight of a suboptimal target.
pub fn default_target_epoch(k: usize) -> u32 {
    (2.0 * (k as f64).log2()).floor() as u32 + 1
}

#[derive(Debug, Clone)]
pub struct EpochTarget {
    shadow: BarbarState,
    epoch: u32,
    target_arm: usize,
    last_output: Vec<f64>,
    window: Option<(u64, u64)>,
}

impl EpochTarget {
    pub fn new(schedule: BarbarParams, epoch: u32, target_arm: usize) -> Result<Self> {
        let k = schedule.k;
        if target_arm >= k {
            return Err(Error::ArmOutOfRange { arm: target_arm, k });
        }
        if epoch == 0 {
            return Err(Error::param("epoch", "epochs are numbered from 1"));
        }
        if (epoch as f64) <= 2.0 * (k as f64).log2() {
            log::warn!(
                "epoch_target: epoch {epoch} <= 2 log2 K = {:.2}; the attack may not be recoverable in one epoch",
                2.0 * (k as f64).log2()
            );
        }
        Ok(Self {
            shadow: BarbarState::new(schedule)?,
            epoch,
            target_arm,
            last_output: vec![0.0; k],
            window: None,
        })
    }

    pub fn epoch(&self) -> u32 {
        self.epoch
    }

    pub fn target_arm(&self) -> usize {
        self.target_arm
    }

    /// First and last attacked rounds so far.
    pub fn window(&self) -> Option<(u64, u64)> {
        self.window
    }

    pub fn shadow(&self) -> &BarbarState {
        &self.shadow
    }

    pub(crate) fn corrupt(&mut self, view: &RoundView<'_>, out: &mut [f64]) -> bool {
        if self.shadow.epoch() > self.epoch {
            return false;
        }
        if view.t >= 2 {
            if let Some(&arm) = view.past_choices.get(view.t as usize - 2) {
                self.shadow.record(arm, self.last_output[arm]);
            }
        }
        if self.shadow.epoch() != self.epoch {
            return false;
        }
        out[self.target_arm] = 0.0;
        self.window = Some(match self.window {
            Some((start, _)) => (start, view.t),
            None => (view.t, view.t),
        });
        true
    }

    pub(crate) fn remember(&mut self, out: &[f64]) {
        self.last_output.copy_from_slice(out);
    }
}
