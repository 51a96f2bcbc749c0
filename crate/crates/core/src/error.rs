// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

/// Errors raised by the simulation library and harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("config parse error at line {line}, column {column}: {message}")]
    ConfigParse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("config validation failed for `{key}`: {reason}")]
    ConfigValidation { key: String, reason: String },

    #[error("player chose arm {arm} but the instance has {k} arms")]
    ArmOutOfRange { arm: usize, k: usize },

    #[error("trace does not store reward vectors (store_vectors = false)")]
    VectorsNotStored,

    #[error("no BARBAR epoch structure: {0}")]
    NotEpochTrace(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("seed {seed} failed: {source}")]
    Seed {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn validation(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::ConfigValidation {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
