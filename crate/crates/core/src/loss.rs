// SPDX-License-Identifier: Apache-2.0

//! Loss functions and their analytic gradients with respect to predictions.
//!
//! Reductions differ per kind:
//!
//! | kind | value |
//! |------|-------|
//! | `cross_entropy`, `max_likelihood` | `-Σ t·ln(clamp p)` |
//! | `kl` | `Σ_{t>0} t·(ln clamp t − ln clamp p)` |
//! | `hinge` | mean of `max(0, 1 − t·s)` |
//! | `huber` | mean of `½r²` if `|r| ≤ δ`, else `δ(|r| − ½δ)` |
//! | `l1` | mean of `|r|` |
//! | `l2` | sum of `r²` |
//! | `mse` | mean of `r²` |
//!
//! where `r = prediction − target` and `clamp` maps into `[1e-12, 1]`.
//! Probability losses take post-softmax probabilities, not logits.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::tensor::Matrix;

/// Lower bound applied to probabilities before taking a logarithm.
pub const PROB_CLAMP: f64 = 1e-12;

/// Allowed deviation of a target distribution's sum from 1.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

pub const DEFAULT_HUBER_DELTA: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LossKind {
    CrossEntropy,
    Hinge,
    Huber { delta: f64 },
    KullbackLeibler,
    L1,
    L2,
    /// Categorical negative log-likelihood; evaluates through the exact same
    /// code path as [`LossKind::CrossEntropy`].
    MaxLikelihood,
    MeanSquaredError,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LossError {
    #[error("dimension mismatch: prediction has {prediction} entries, target has {target}")]
    DimensionMismatch { prediction: usize, target: usize },
    #[error("loss input is empty")]
    EmptyInput,
    #[error("target is not a probability distribution: {0}")]
    InvalidProbability(String),
    #[error("hinge targets must be -1 or +1, got {0}")]
    InvalidLabel(f64),
    #[error("huber delta must be positive, got {0}")]
    NonPositiveDelta(f64),
    #[error("non-finite value in loss input")]
    NonFiniteInput,
    #[error("unknown loss `{0}`")]
    UnknownLoss(String),
}

impl LossKind {
    pub const ALL_NAMES: [&'static str; 8] =
        ["cross_entropy", "hinge", "huber", "kl", "l1", "l2", "max_likelihood", "mse"];

    pub fn huber(delta: f64) -> Result<Self, LossError> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(LossError::NonPositiveDelta(delta));
        }
        Ok(LossKind::Huber { delta })
    }

    pub fn name(&self) -> &'static str {
        match self {
            LossKind::CrossEntropy => "cross_entropy",
            LossKind::Hinge => "hinge",
            LossKind::Huber { .. } => "huber",
            LossKind::KullbackLeibler => "kl",
            LossKind::L1 => "l1",
            LossKind::L2 => "l2",
            LossKind::MaxLikelihood => "max_likelihood",
            LossKind::MeanSquaredError => "mse",
        }
    }

    /// Losses whose predictions must be probabilities.
    pub fn expects_probabilities(&self) -> bool {
        matches!(self, LossKind::CrossEntropy | LossKind::MaxLikelihood | LossKind::KullbackLeibler)
    }

    /// Parses a name, using `huber_delta` when the name is `huber`.
    pub fn parse_with_delta(name: &str, huber_delta: f64) -> Result<Self, LossError> {
        match name {
            "huber" => LossKind::huber(huber_delta),
            other => other.parse(),
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = LossError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "cross_entropy" => LossKind::CrossEntropy,
            "hinge" => LossKind::Hinge,
            "huber" => LossKind::Huber { delta: DEFAULT_HUBER_DELTA },
            "kl" => LossKind::KullbackLeibler,
            "l1" => LossKind::L1,
            "l2" => LossKind::L2,
            "max_likelihood" => LossKind::MaxLikelihood,
            "mse" => LossKind::MeanSquaredError,
            other => return Err(LossError::UnknownLoss(other.to_string())),
        })
    }
}

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0)
}

fn validate(kind: LossKind, prediction: &[f64], target: &[f64]) -> Result<(), LossError> {
    if prediction.len() != target.len() {
        return Err(LossError::DimensionMismatch { prediction: prediction.len(), target: target.len() });
    }
    if prediction.is_empty() {
        return Err(LossError::EmptyInput);
    }
    if prediction.iter().chain(target).any(|v| !v.is_finite()) {
        return Err(LossError::NonFiniteInput);
    }
    match kind {
        LossKind::Huber { delta } if !(delta > 0.0 && delta.is_finite()) => {
            return Err(LossError::NonPositiveDelta(delta));
        }
        LossKind::Hinge => {
            if let Some(&bad) = target.iter().find(|&&t| t != 1.0 && t != -1.0) {
                return Err(LossError::InvalidLabel(bad));
            }
        }
        k if k.expects_probabilities() => {
            if let Some(&neg) = target.iter().find(|&&t| t < 0.0) {
                return Err(LossError::InvalidProbability(format!("negative entry {neg}")));
            }
            let sum: f64 = target.iter().sum();
            if (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE {
                return Err(LossError::InvalidProbability(format!("entries sum to {sum}")));
            }
        }
        _ => {}
    }
    Ok(())
}

fn negative_log_likelihood(prediction: &[f64], target: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&p, &t) in prediction.iter().zip(target) {
        acc -= t * clamp_prob(p).ln();
    }
    // -0.0 from an all-zero sum is reported as 0.0
    acc + 0.0
}

/// Evaluates one sample's loss.
pub fn eval_loss(kind: LossKind, prediction: &[f64], target: &[f64]) -> Result<f64, LossError> {
    validate(kind, prediction, target)?;
    let n = prediction.len() as f64;
    let residuals = prediction.iter().zip(target).map(|(&p, &t)| p - t);
    let value = match kind {
        LossKind::CrossEntropy | LossKind::MaxLikelihood => negative_log_likelihood(prediction, target),
        LossKind::KullbackLeibler => {
            let mut acc = 0.0;
            for (&p, &t) in prediction.iter().zip(target) {
                if t > 0.0 {
                    acc += t * (clamp_prob(t).ln() - clamp_prob(p).ln());
                }
            }
            // float noise can push a zero divergence a hair below 0
            acc.max(0.0)
        }
        LossKind::Hinge => {
            let mut acc = 0.0;
            for (&s, &t) in prediction.iter().zip(target) {
                acc += (1.0 - t * s).max(0.0);
            }
            acc / n
        }
        LossKind::Huber { delta } => {
            let mut acc = 0.0;
            for r in residuals {
                let a = r.abs();
                acc += if a <= delta { 0.5 * r * r } else { delta * (a - 0.5 * delta) };
            }
            acc / n
        }
        LossKind::L1 => residuals.map(f64::abs).sum::<f64>() / n,
        LossKind::L2 => residuals.map(|r| r * r).sum::<f64>(),
        LossKind::MeanSquaredError => residuals.map(|r| r * r).sum::<f64>() / n,
    };
    Ok(value)
}

/// Gradient of [`eval_loss`] with respect to `prediction`.
///
/// Kinks use fixed subgradients: `l1` at `r = 0` and `hinge` at the exact
/// margin both yield 0. Probability entries outside the clamp range have
/// zero gradient.
pub fn eval_loss_gradient(kind: LossKind, prediction: &[f64], target: &[f64]) -> Result<Vec<f64>, LossError> {
    validate(kind, prediction, target)?;
    let n = prediction.len() as f64;
    let grad = prediction
        .iter()
        .zip(target)
        .map(|(&p, &t)| {
            let r = p - t;
            match kind {
                LossKind::CrossEntropy | LossKind::MaxLikelihood | LossKind::KullbackLeibler => {
                    if (PROB_CLAMP..=1.0).contains(&p) {
                        -t / p
                    } else {
                        0.0
                    }
                }
                LossKind::Hinge => {
                    if 1.0 - t * p > 0.0 {
                        -t / n
                    } else {
                        0.0
                    }
                }
                LossKind::Huber { delta } => {
                    if r.abs() <= delta {
                        r / n
                    } else {
                        delta * r.signum() / n
                    }
                }
                LossKind::L1 => {
                    if r == 0.0 {
                        0.0
                    } else {
                        r.signum() / n
                    }
                }
                LossKind::L2 => 2.0 * r,
                LossKind::MeanSquaredError => 2.0 * r / n,
            }
        })
        .collect();
    Ok(grad)
}

/// Arithmetic mean of per-row losses.
pub fn batch_mean_loss(kind: LossKind, predictions: &Matrix, targets: &Matrix) -> Result<f64, LossError> {
    if predictions.shape() != targets.shape() {
        return Err(LossError::DimensionMismatch {
            prediction: predictions.as_slice().len(),
            target: targets.as_slice().len(),
        });
    }
    if predictions.rows() == 0 {
        return Err(LossError::EmptyInput);
    }
    let mut acc = 0.0;
    for r in 0..predictions.rows() {
        acc += eval_loss(kind, predictions.row(r), targets.row(r))?;
    }
    Ok(acc / predictions.rows() as f64)
}
