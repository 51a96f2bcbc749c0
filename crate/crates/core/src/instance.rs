// SPDX-License-Identifier: Apache-2.0

//! Reward distributions and bandit instances.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// A reward distribution supported on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ArmDistribution {
    Bernoulli { p: f64 },
    Deterministic { value: f64 },
    /// Gaussian draw clamped into `[0, 1]`.
    ClippedGaussian { mean: f64, sd: f64 },
}

impl ArmDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ArmDistribution::Bernoulli { p } if !(0.0..=1.0).contains(&p) => {
                Err(Error::param("p", format!("{p} is not in [0, 1]")))
            }
            ArmDistribution::Deterministic { value } if !(0.0..=1.0).contains(&value) => {
                Err(Error::param("value", format!("{value} is not in [0, 1]")))
            }
            ArmDistribution::ClippedGaussian { mean, sd } => {
                if !mean.is_finite() {
                    return Err(Error::param("mean", "must be finite"));
                }
                if !(sd.is_finite() && sd >= 0.0) {
                    return Err(Error::param("sd", format!("{sd} must be finite and >= 0")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match *self {
            ArmDistribution::Bernoulli { p } => {
                if rng.random::<f64>() < p {
                    1.0
                } else {
                    0.0
                }
            }
            ArmDistribution::Deterministic { value } => value,
            ArmDistribution::ClippedGaussian { mean, sd } => {
                let z: f64 = rng.sample(StandardNormal);
                (mean + sd * z).clamp(0.0, 1.0)
            }
        }
    }

    /// Expected reward after clamping.
    ///
    /// Exact for Bernoulli and deterministic arms. For the clipped Gaussian
    /// this is the closed form
    /// `P(X >= 1) + mean * (Phi(b) - Phi(a)) + sd * (phi(a) - phi(b))`
    /// with `a = -mean / sd`, `b = (1 - mean) / sd`, evaluated through
    /// `libm::erfc`, so it carries erfc's ~1e-15 approximation error.
    pub fn mean(&self) -> f64 {
        match *self {
            ArmDistribution::Bernoulli { p } => p,
            ArmDistribution::Deterministic { value } => value,
            ArmDistribution::ClippedGaussian { mean, sd } => {
                if sd == 0.0 {
                    return mean.clamp(0.0, 1.0);
                }
                let a = -mean / sd;
                let b = (1.0 - mean) / sd;
                let inner = mean * (normal_cdf(b) - normal_cdf(a)) + sd * (normal_pdf(a) - normal_pdf(b));
                (1.0 - normal_cdf(b)) + inner
            }
        }
    }
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// A K-armed instance with a unique best arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceSpec", into = "InstanceSpec")]
pub struct BanditInstance {
    arms: Vec<ArmDistribution>,
    mu: Vec<f64>,
    best_arm: usize,
    gaps: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub arms: Vec<ArmDistribution>,
}

impl TryFrom<InstanceSpec> for BanditInstance {
    type Error = Error;

    fn try_from(spec: InstanceSpec) -> Result<Self> {
        BanditInstance::new(spec.arms)
    }
}

impl From<BanditInstance> for InstanceSpec {
    fn from(instance: BanditInstance) -> Self {
        InstanceSpec { arms: instance.arms }
    }
}

impl BanditInstance {
    pub fn new(arms: Vec<ArmDistribution>) -> Result<Self> {
        if arms.len() < 2 {
            return Err(Error::InvalidInstance(format!(
                "need at least 2 arms, got {}",
                arms.len()
            )));
        }
        for arm in &arms {
            arm.validate()?;
        }
        let mu: Vec<f64> = arms.iter().map(ArmDistribution::mean).collect();
        let best_arm = argmax(&mu);
        let mu_star = mu[best_arm];
        if let Some(tie) = mu
            .iter()
            .enumerate()
            .position(|(i, &m)| i != best_arm && m == mu_star)
        {
            return Err(Error::InvalidInstance(format!(
                "best arm is not unique: arms {best_arm} and {tie} share mean {mu_star}"
            )));
        }
        let gaps = mu.iter().map(|&m| mu_star - m).collect();
        Ok(Self {
            arms,
            mu,
            best_arm,
            gaps,
        })
    }

    /// One Bernoulli arm per success probability.
    pub fn bernoulli(ps: &[f64]) -> Result<Self> {
        Self::new(ps.iter().map(|&p| ArmDistribution::Bernoulli { p }).collect())
    }

    pub fn deterministic(values: &[f64]) -> Result<Self> {
        Self::new(
            values
                .iter()
                .map(|&value| ArmDistribution::Deterministic { value })
                .collect(),
        )
    }

    pub fn k(&self) -> usize {
        self.arms.len()
    }

    pub fn arms(&self) -> &[ArmDistribution] {
        &self.arms
    }

    pub fn means(&self) -> &[f64] {
        &self.mu
    }

    pub fn best_arm(&self) -> usize {
        self.best_arm
    }

    pub fn mu_star(&self) -> f64 {
        self.mu[self.best_arm]
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    /// Smallest positive gap.
    pub fn min_gap(&self) -> f64 {
        self.gaps
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != self.best_arm)
            .map(|(_, &g)| g)
            .fold(f64::INFINITY, f64::min)
    }

    /// Draws one stochastic reward vector `R^t` into `out`.
    pub fn sample_rewards_into(&self, rng: &mut RngStream, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.k());
        for (slot, arm) in out.iter_mut().zip(&self.arms) {
            *slot = arm.sample(rng);
        }
    }

    pub fn sample_rewards(&self, rng: &mut RngStream) -> Vec<f64> {
        let mut out = vec![0.0; self.k()];
        self.sample_rewards_into(rng, &mut out);
        out
    }
}

/// Index of the maximum; ties go to the lowest index.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
