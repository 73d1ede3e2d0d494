//! Collapses per-step rewards into a trajectory-level reward.
//!
//! The main detection rule is the risk-sensitive soft-min (softmax weights
//! with exponent `-r/tau`, so low-reward steps dominate); the remaining
//! methods are its ablation variants: weighted minimum, hard min, last
//! position, average, and the two binary indicators.
//!
//! One `sign` parameter unifies the risk-emphasizing (`-1`) and
//! reward-emphasizing (`+1`) softmax readings.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AggregationError {
    #[error("reward list must be non-empty")]
    EmptyRewards,
    #[error("temperature must be positive, got {0}")]
    NonPositiveTau(f64),
    #[error("sign must be +1 or -1, got {0}")]
    BadSign(i8),
}

/// Aggregation rule selector; names match the CLI `--agg-method` values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationMethod {
    SoftWeighted,
    SoftWeightedMin,
    Min,
    Last,
    Average,
    Binary,
    WeightedBinary,
}

impl AggregationMethod {
    pub fn name(self) -> &'static str {
        match self {
            Self::SoftWeighted => "soft_weighted",
            Self::SoftWeightedMin => "soft_weighted_min",
            Self::Min => "min",
            Self::Last => "last",
            Self::Average => "average",
            Self::Binary => "binary",
            Self::WeightedBinary => "weighted_binary",
        }
    }
}

impl std::str::FromStr for AggregationMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "soft_weighted" => Ok(Self::SoftWeighted),
            "soft_weighted_min" => Ok(Self::SoftWeightedMin),
            "min" => Ok(Self::Min),
            "last" => Ok(Self::Last),
            "average" => Ok(Self::Average),
            "binary" => Ok(Self::Binary),
            "weighted_binary" => Ok(Self::WeightedBinary),
            other => Err(format!("unknown aggregation method {other:?}")),
        }
    }
}

/// Method plus its temperature, softmax sign, and binary threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AggregationConfig {
    pub method: AggregationMethod,
    pub tau: f64,
    pub sign: i8,
    pub binary_threshold: f64,
}

impl Default for AggregationConfig {
    fn default() -> Self {
        Self {
            method: AggregationMethod::SoftWeighted,
            tau: 1.0,
            sign: -1,
            binary_threshold: 0.0,
        }
    }
}

impl AggregationConfig {
    pub fn validate(&self) -> Result<(), AggregationError> {
        if self.tau.is_nan() || self.tau <= 0.0 {
            return Err(AggregationError::NonPositiveTau(self.tau));
        }
        if self.sign != 1 && self.sign != -1 {
            return Err(AggregationError::BadSign(self.sign));
        }
        Ok(())
    }
}

/// Softmax weights `w_i = exp(sign * r_i / tau) / sum_j exp(sign * r_j / tau)`,
/// computed with max-subtraction for overflow safety.
pub fn softmax_weights(rewards: &[f64], tau: f64, sign: i8) -> Result<Vec<f64>, AggregationError> {
    if rewards.is_empty() {
        return Err(AggregationError::EmptyRewards);
    }
    if tau.is_nan() || tau <= 0.0 {
        return Err(AggregationError::NonPositiveTau(tau));
    }
    if sign != 1 && sign != -1 {
        return Err(AggregationError::BadSign(sign));
    }
    let sign = f64::from(sign);
    let scaled: Vec<f64> = rewards.iter().map(|&r| sign * r / tau).collect();
    let max = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scaled.iter().map(|&s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

/// Softmax-weighted sum of rewards; sign -1 is the risk-sensitive soft-min,
/// sign +1 the reward-weighted average.
pub fn soft_weighted(rewards: &[f64], tau: f64, sign: i8) -> Result<f64, AggregationError> {
    let weights = softmax_weights(rewards, tau, sign)?;
    Ok(weights.iter().zip(rewards).map(|(w, r)| w * r).sum())
}

/// Weighted minimum: `min_t (w_t * r_t)` with softmax weights over `+r/tau`.
pub fn soft_weighted_min(rewards: &[f64], tau: f64) -> Result<f64, AggregationError> {
    let weights = softmax_weights(rewards, tau, 1)?;
    Ok(weights
        .iter()
        .zip(rewards)
        .map(|(w, r)| w * r)
        .fold(f64::INFINITY, f64::min))
}

pub fn hard_min(rewards: &[f64]) -> Result<f64, AggregationError> {
    if rewards.is_empty() {
        return Err(AggregationError::EmptyRewards);
    }
    Ok(rewards.iter().cloned().fold(f64::INFINITY, f64::min))
}

pub fn last_pos(rewards: &[f64]) -> Result<f64, AggregationError> {
    rewards
        .last()
        .copied()
        .ok_or(AggregationError::EmptyRewards)
}

pub fn average(rewards: &[f64]) -> Result<f64, AggregationError> {
    if rewards.is_empty() {
        return Err(AggregationError::EmptyRewards);
    }
    Ok(rewards.iter().sum::<f64>() / rewards.len() as f64)
}

/// Indicator of `min_t r_t >= threshold`.
pub fn binary(rewards: &[f64], threshold: f64) -> Result<f64, AggregationError> {
    Ok(if hard_min(rewards)? >= threshold {
        1.0
    } else {
        0.0
    })
}

/// Indicator of the softmax-weighted sum clearing the threshold.
pub fn weighted_binary(
    rewards: &[f64],
    tau: f64,
    sign: i8,
    threshold: f64,
) -> Result<f64, AggregationError> {
    Ok(if soft_weighted(rewards, tau, sign)? >= threshold {
        1.0
    } else {
        0.0
    })
}

/// Applies the configured aggregation rule.
pub fn aggregate(rewards: &[f64], config: &AggregationConfig) -> Result<f64, AggregationError> {
    config.validate()?;
    match config.method {
        AggregationMethod::SoftWeighted => soft_weighted(rewards, config.tau, config.sign),
        AggregationMethod::SoftWeightedMin => soft_weighted_min(rewards, config.tau),
        AggregationMethod::Min => hard_min(rewards),
        AggregationMethod::Last => last_pos(rewards),
        AggregationMethod::Average => average(rewards),
        AggregationMethod::Binary => binary(rewards, config.binary_threshold),
        AggregationMethod::WeightedBinary => {
            weighted_binary(rewards, config.tau, config.sign, config.binary_threshold)
        }
    }
}

/// Centers each reward by the batch mean: `A_t = r_t - mean(batch)`.
pub fn advantage(batch: &[f64]) -> Result<Vec<f64>, AggregationError> {
    let mean = average(batch)?;
    Ok(batch.iter().map(|&r| r - mean).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_rewards_are_a_fixed_point() {
        for sign in [1, -1] {
            for tau in [0.01, 1.0, 1000.0] {
                let r = soft_weighted(&[0.5, 0.5, 0.5], tau, sign).unwrap();
                assert!((r - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn soft_min_limit_at_small_tau() {
        let r = soft_weighted(&[0.9, -0.5], 0.01, -1).unwrap();
        assert!((r + 0.5).abs() < 1e-6);
    }

    #[test]
    fn soft_weighted_direct_evaluation() {
        // R = (0.8 e^{-0.8} - 0.6 e^{0.6}) / (e^{-0.8} + e^{0.6})
        let num = 0.8 * (-0.8f64).exp() + (-0.6) * 0.6f64.exp();
        let den = (-0.8f64).exp() + 0.6f64.exp();
        let r = soft_weighted(&[0.8, -0.6], 1.0, -1).unwrap();
        assert!((r - num / den).abs() < 1e-12);
    }

    #[test]
    fn soft_weighted_min_cases() {
        assert!((soft_weighted_min(&[0.7], 1.0).unwrap() - 0.7).abs() < 1e-12);
        assert!((soft_weighted_min(&[1.0, 1.0], 1.0).unwrap() - 0.5).abs() < 1e-12);
        // two weighted terms evaluated directly
        let w1 = (0.5f64).exp() / ((0.5f64).exp() + (-0.5f64).exp());
        let w2 = 1.0 - w1;
        let expected = (w1 * 0.5).min(w2 * -0.5);
        let r = soft_weighted_min(&[0.5, -0.5], 1.0).unwrap();
        assert!((r - expected).abs() < 1e-12);
    }

    #[test]
    fn named_statistics() {
        let r = [0.2, -0.4, 0.1];
        assert_eq!(hard_min(&r).unwrap(), -0.4);
        assert_eq!(last_pos(&r).unwrap(), 0.1);
        assert!((average(&r).unwrap() + 0.1 / 3.0).abs() < 1e-12);
        for f in [hard_min, last_pos, average] {
            assert_eq!(f(&[0.3]).unwrap(), 0.3);
        }
    }

    #[test]
    fn binary_indicators() {
        assert_eq!(binary(&[0.4, 0.2], 0.0).unwrap(), 1.0);
        assert_eq!(binary(&[0.4, -0.2], 0.0).unwrap(), 0.0);
        assert_eq!(weighted_binary(&[0.4, 0.2], 1.0, 1, 0.0).unwrap(), 1.0);
        let sum = soft_weighted(&[0.9, -0.1], 1.0, 1).unwrap();
        let expected = if sum >= 0.0 { 1.0 } else { 0.0 };
        assert_eq!(
            weighted_binary(&[0.9, -0.1], 1.0, 1, 0.0).unwrap(),
            expected
        );
    }

    #[test]
    fn empty_rewards_rejected_everywhere() {
        let cfg = AggregationConfig::default();
        assert!(aggregate(&[], &cfg).is_err());
        assert!(soft_weighted(&[], 1.0, -1).is_err());
        assert!(soft_weighted_min(&[], 1.0).is_err());
        assert!(hard_min(&[]).is_err());
        assert!(last_pos(&[]).is_err());
        assert!(average(&[]).is_err());
        assert!(advantage(&[]).is_err());
    }

    #[test]
    fn advantage_examples() {
        assert_eq!(advantage(&[1.0, 1.0, 1.0]).unwrap(), vec![0.0; 3]);
        assert_eq!(advantage(&[2.0, 0.0]).unwrap(), vec![1.0, -1.0]);
        let a = advantage(&[0.3, -0.7, 0.2, 0.9]).unwrap();
        assert!(a.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn weights_sum_to_one() {
        let w = softmax_weights(&[0.1, -0.9, 0.5, 0.0], 0.3, -1).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overflow_safe_near_extremes() {
        let big = [1e300_f64.ln(), -1e300_f64.ln()];
        let r = soft_weighted(&big, 1.0, -1).unwrap();
        assert!(r.is_finite());
    }

    #[test]
    #[allow(clippy::field_reassign_with_default)]
    fn config_validation() {
        let mut cfg = AggregationConfig::default();
        cfg.tau = 0.0;
        assert!(cfg.validate().is_err());
        cfg.tau = 1.0;
        cfg.sign = 2;
        assert!(cfg.validate().is_err());
    }
}
