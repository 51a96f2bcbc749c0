// SPDX-License-Identifier: Apache-2.0

//! Seeded, role-separated random streams.
//!
//! Every run draws from three independent streams: stochastic rewards, the
//! player's internal randomization and the adversary's coin flips. A stream
//! is a ChaCha8 generator whose 256-bit key is
//!
//! ```text
//! master_seed (u64 LE) || replicate (u64 LE) || "rbandits" || 0u64
//! ```
//!
//! and whose ChaCha stream id is the role id. Distinct `(master_seed,
//! replicate, role)` triples therefore address disjoint keystreams, and the
//! same triple replays the same sequence regardless of which worker thread
//! runs it.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const DOMAIN_TAG: &[u8; 8] = b"rbandits";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Rewards,
    Player,
    Adversary,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::Rewards, Role::Player, Role::Adversary];

    fn stream_id(self) -> u64 {
        match self {
            Role::Rewards => 1,
            Role::Player => 2,
            Role::Adversary => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    replicate: u64,
    role: Role,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, replicate: u64, role: Role) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&replicate.to_le_bytes());
        key[16..24].copy_from_slice(DOMAIN_TAG);
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(role.stream_id());
        Self {
            master_seed,
            replicate,
            role,
            inner,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn replicate(&self) -> u64 {
        self.replicate
    }

    pub fn role(&self) -> Role {
        self.role
    }

    /// Number of 32-bit words consumed so far.
    pub fn counter(&self) -> u128 {
        self.inner.get_word_pos()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// The three streams used by one replicate.
#[derive(Debug, Clone)]
pub struct RunStreams {
    pub rewards: RngStream,
    pub player: RngStream,
    pub adversary: RngStream,
}

impl RunStreams {
    pub fn new(master_seed: u64, replicate: u64) -> Self {
        Self {
            rewards: RngStream::new(master_seed, replicate, Role::Rewards),
            player: RngStream::new(master_seed, replicate, Role::Player),
            adversary: RngStream::new(master_seed, replicate, Role::Adversary),
        }
    }
}
