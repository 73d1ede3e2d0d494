//! Inference-time scaling engine: scores candidate pools, ranks candidates
//! by aggregate reward or summed advantage, and selects top-k.
//!
//! Candidates are fully-materialized completions; this module does not
//! drive a generator. Per-step rewards are carried in the result trace so
//! an external generator can reuse them for step-level search.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregator::{self, AggregationConfig};
use crate::corpus::CandidatePool;
use crate::scorer::{score_batch, Scorer, ScorerError};

#[derive(Debug, Error)]
pub enum RankError {
    #[error(transparent)]
    Scorer(#[from] ScorerError),
    #[error(transparent)]
    Aggregation(#[from] aggregator::AggregationError),
    #[error("k = {k} out of range for pool of size {size}")]
    KOutOfRange { k: usize, size: usize },
}

/// Deterministic ranking of one candidate pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingResult {
    pub pool_id: String,
    /// Candidate indices, best first; ties broken by ascending index.
    pub order: Vec<usize>,
    /// Aggregate reward per candidate, aligned with `order`.
    pub scores: Vec<f64>,
    /// Per-step margin rewards per candidate, in original candidate order.
    pub step_rewards: Vec<Vec<f64>>,
    /// Name of the ranking rule that produced `scores`.
    pub method: String,
}

fn sort_descending(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

fn score_pool(pool: &CandidatePool, scorer: &dyn Scorer) -> Result<Vec<Vec<f64>>, RankError> {
    let items: Vec<(&str, &crate::corpus::Trajectory)> = pool
        .candidates
        .iter()
        .map(|c| (pool.prompt.as_str(), c))
        .collect();
    let scored = score_batch(&items, scorer)?;
    Ok(scored
        .into_iter()
        .map(|s| s.rewards.into_iter().map(|r| r.value()).collect())
        .collect())
}

/// Scores every candidate per-step, aggregates, and sorts descending by
/// aggregate reward.
pub fn rank_pool(
    pool_id: &str,
    pool: &CandidatePool,
    scorer: &dyn Scorer,
    agg: &AggregationConfig,
) -> Result<RankingResult, RankError> {
    let step_rewards = score_pool(pool, scorer)?;
    let aggregates = step_rewards
        .iter()
        .map(|rewards| aggregator::aggregate(rewards, agg))
        .collect::<Result<Vec<_>, _>>()?;
    let order = sort_descending(&aggregates);
    let scores = order.iter().map(|&i| aggregates[i]).collect();
    Ok(RankingResult {
        pool_id: pool_id.to_string(),
        order,
        scores,
        step_rewards,
        method: agg.method.name().to_string(),
    })
}

/// Ranks candidates by the sum of per-step advantages, with the batch mean
/// taken over all steps of all candidates in the pool.
pub fn rank_by_advantage(
    pool_id: &str,
    pool: &CandidatePool,
    scorer: &dyn Scorer,
) -> Result<RankingResult, RankError> {
    let step_rewards = score_pool(pool, scorer)?;
    let batch: Vec<f64> = step_rewards.iter().flatten().copied().collect();
    let mean = batch.iter().sum::<f64>() / batch.len().max(1) as f64;
    let aggregates: Vec<f64> = step_rewards
        .iter()
        .map(|rewards| rewards.iter().map(|r| r - mean).sum())
        .collect();
    let order = sort_descending(&aggregates);
    let scores = order.iter().map(|&i| aggregates[i]).collect();
    Ok(RankingResult {
        pool_id: pool_id.to_string(),
        order,
        scores,
        step_rewards,
        method: "advantage".to_string(),
    })
}

/// First k entries of the ranking order.
pub fn select_top_k(result: &RankingResult, k: usize) -> Result<Vec<usize>, RankError> {
    if k == 0 || k > result.order.len() {
        return Err(RankError::KOutOfRange {
            k,
            size: result.order.len(),
        });
    }
    Ok(result.order[..k].to_vec())
}
