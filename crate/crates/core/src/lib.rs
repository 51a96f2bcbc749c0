// SPDX-License-Identifier: Apache-2.0

//! Stochastic multi-armed bandits with adversarial reward corruption.
//!
//! The crate simulates the corrupted-bandit protocol, implements BARBAR and
//! its variants next to classical baselines, and measures regret and
//! corruption on the resulting traces. [`harness`] drives replicated
//! experiments from TOML configs and backs the `robust-bandits` CLI.

pub mod adversaries;
pub mod algorithms;
pub mod error;
pub mod harness;
pub mod instance;
pub mod metrics;
pub mod protocol;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use instance::{ArmDistribution, BanditInstance};
pub use protocol::{run_protocol, Adversary, Player, RunSettings, RunTrace};
pub use rng::{Role, RngStream};
