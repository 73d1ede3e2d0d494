//! Per-step scoring: two-class logits, the margin reward, the weighted step
//! loss, and the pluggable scorer interface.
//!
//! Builtin scorers are deterministic (oracle, constant, lexical); the remote
//! scorer is the seam where a trained reward model plugs in over a single
//! `POST /score` endpoint.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use regex::RegexSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{StepLabel, Trajectory};

/// Logit magnitude used by the oracle scorer; near-saturated margins
/// (|r| = tanh(5) ~ 0.9999) that remain differentiable.
pub const ORACLE_LOGIT: f64 = 5.0;

#[derive(Debug, Error)]
pub enum ScorerError {
    #[error("non-finite logits ({safe}, {vulnerable})")]
    NonFiniteLogits { safe: f64, vulnerable: f64 },
    #[error("oracle scorer requires step labels")]
    MissingLabels,
    #[error("constant scorer value {0} outside [-1, 1]")]
    ConstantOutOfRange(f64),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("protocol error: server returned {got} logit pairs for {expected} steps")]
    Protocol { expected: usize, got: usize },
    #[error("probs length {probs} != labels length {labels}")]
    LossLengthMismatch { probs: usize, labels: usize },
    #[error("infinite loss: probability {value} contradicts label at step {index}")]
    InfiniteLoss { index: usize, value: f64 },
    #[error("probability {value} at step {index} outside (0, 1)")]
    InvalidProbability { index: usize, value: f64 },
    #[error("class weights must be positive, got w0={w0}, w1={w1}")]
    NonPositiveWeights { w0: f64, w1: f64 },
    #[error("invalid lexical pattern: {0}")]
    BadPattern(#[from] regex::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("candidate {candidate}: {source}")]
    Candidate {
        candidate: usize,
        #[source]
        source: Box<ScorerError>,
    },
}

/// Two-class logits for one step: safe (+) and vulnerable (-).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepLogits {
    pub safe: f64,
    pub vulnerable: f64,
}

impl StepLogits {
    pub fn new(safe: f64, vulnerable: f64) -> Self {
        Self { safe, vulnerable }
    }
}

/// Margin reward of one step, always in [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct StepReward(pub f64);

impl StepReward {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Softmaxed class-probability margin: `softmax(h)+ - softmax(h)-`,
/// equivalently `tanh((safe - vulnerable) / 2)`.
pub fn margin(logits: StepLogits) -> Result<StepReward, ScorerError> {
    if !logits.safe.is_finite() || !logits.vulnerable.is_finite() {
        return Err(ScorerError::NonFiniteLogits {
            safe: logits.safe,
            vulnerable: logits.vulnerable,
        });
    }
    Ok(StepReward(((logits.safe - logits.vulnerable) / 2.0).tanh()))
}

/// Class weights for balancing the minority vulnerable class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    /// Weight for the vulnerable (0) class.
    pub w0: f64,
    /// Weight for the secure (1) class.
    pub w1: f64,
}

impl Default for ClassWeights {
    fn default() -> Self {
        Self { w0: 1.0, w1: 1.0 }
    }
}

/// Weighted step cross-entropy: `L = -sum_t w_{y_t} * log P_t(y_t)` with
/// `P_t(1) = prob_t` and `P_t(0) = 1 - prob_t`.
///
/// The weight multiplies the log term, so doubling a class weight doubles
/// that class's contribution exactly and the loss stays non-negative.
pub fn weighted_step_loss(
    probs: &[f64],
    labels: &[StepLabel],
    weights: ClassWeights,
) -> Result<f64, ScorerError> {
    if weights.w0 <= 0.0 || weights.w1 <= 0.0 {
        return Err(ScorerError::NonPositiveWeights {
            w0: weights.w0,
            w1: weights.w1,
        });
    }
    if probs.len() != labels.len() {
        return Err(ScorerError::LossLengthMismatch {
            probs: probs.len(),
            labels: labels.len(),
        });
    }
    let mut loss = 0.0;
    for (index, (&prob, &label)) in probs.iter().zip(labels).enumerate() {
        let p_correct = match label {
            StepLabel::Secure => prob,
            StepLabel::Vulnerable => 1.0 - prob,
        };
        if p_correct <= 0.0 {
            return Err(ScorerError::InfiniteLoss { index, value: prob });
        }
        if !(0.0..=1.0).contains(&prob) || prob == 0.0 || prob == 1.0 {
            return Err(ScorerError::InvalidProbability { index, value: prob });
        }
        let weight = match label {
            StepLabel::Vulnerable => weights.w0,
            StepLabel::Secure => weights.w1,
        };
        loss -= weight * p_correct.ln();
    }
    Ok(loss)
}

/// Declarative scorer selection, loadable from the global configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ScorerSpec {
    /// Ground-truth scorer: logits (+L, -L) for secure steps, (-L, +L) for
    /// vulnerable, L = 5. Requires labeled trajectories.
    Oracle,
    /// Emits the same reward for every step.
    Constant { value: f64 },
    /// Demo sink/taint scorer: negative margins on steps matching a pattern
    /// table, mildly positive otherwise.
    Lexical {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pattern_file: Option<PathBuf>,
    },
    /// HTTP client for an external reward model.
    Remote {
        endpoint: String,
        #[serde(default = "default_timeout_secs")]
        timeout_secs: u64,
        #[serde(default = "default_in_flight")]
        max_in_flight: usize,
        #[serde(default)]
        retries: u32,
    },
}

fn default_timeout_secs() -> u64 {
    30
}

fn default_in_flight() -> usize {
    4
}

/// A scored trajectory: one logit pair and one margin reward per step.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredTrajectory {
    pub logits: Vec<StepLogits>,
    pub rewards: Vec<StepReward>,
}

/// Step scorer interface. Implementations must return exactly one logit
/// pair per step, in step order.
pub trait Scorer: Send + Sync {
    fn score_steps(
        &self,
        prompt: &str,
        trajectory: &Trajectory,
    ) -> Result<Vec<StepLogits>, ScorerError>;

    /// Bound on concurrent scoring requests; builtin scorers are pure and
    /// report 1.
    fn max_in_flight(&self) -> usize {
        1
    }
}

/// Instantiates the scorer named by a spec.
pub fn build_scorer(spec: &ScorerSpec) -> Result<Box<dyn Scorer>, ScorerError> {
    match spec {
        ScorerSpec::Oracle => Ok(Box::new(OracleScorer)),
        ScorerSpec::Constant { value } => Ok(Box::new(ConstantScorer::new(*value)?)),
        ScorerSpec::Lexical { pattern_file } => {
            let scorer = match pattern_file {
                Some(path) => LexicalScorer::from_file(path)?,
                None => LexicalScorer::builtin(),
            };
            Ok(Box::new(scorer))
        }
        ScorerSpec::Remote {
            endpoint,
            timeout_secs,
            max_in_flight,
            retries,
        } => Ok(Box::new(RemoteScorer::new(
            endpoint.clone(),
            Duration::from_secs(*timeout_secs),
            *max_in_flight,
            *retries,
        )?)),
    }
}

/// Scores a trajectory and derives margin rewards, verifying the per-step
/// count contract.
pub fn score_trajectory(
    trajectory: &Trajectory,
    scorer: &dyn Scorer,
    prompt: &str,
) -> Result<ScoredTrajectory, ScorerError> {
    let logits = scorer.score_steps(prompt, trajectory)?;
    if logits.len() != trajectory.len() {
        return Err(ScorerError::Protocol {
            expected: trajectory.len(),
            got: logits.len(),
        });
    }
    let rewards = logits
        .iter()
        .map(|&h| margin(h))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ScoredTrajectory { logits, rewards })
}

/// Scores many trajectories with the scorer's bounded in-flight contract;
/// results are reassembled in input order.
pub fn score_batch<'a>(
    items: &[(&'a str, &'a Trajectory)],
    scorer: &dyn Scorer,
) -> Result<Vec<ScoredTrajectory>, ScorerError> {
    let workers = scorer.max_in_flight().max(1).min(items.len().max(1));
    if workers <= 1 {
        return items
            .iter()
            .enumerate()
            .map(|(i, (prompt, t))| {
                score_trajectory(t, scorer, prompt).map_err(|source| ScorerError::Candidate {
                    candidate: i,
                    source: Box::new(source),
                })
            })
            .collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<ScoredTrajectory, ScorerError>>>> =
        items.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let (prompt, t) = items[i];
                let result = score_trajectory(t, scorer, prompt);
                *slots[i].lock().expect("slot") = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .enumerate()
        .map(|(i, slot)| {
            slot.into_inner()
                .expect("slot")
                .expect("worker filled slot")
                .map_err(|source| ScorerError::Candidate {
                    candidate: i,
                    source: Box::new(source),
                })
        })
        .collect()
}

/// Ground-truth scorer for tests and end-to-end oracle checks.
pub struct OracleScorer;

impl Scorer for OracleScorer {
    fn score_steps(
        &self,
        _prompt: &str,
        trajectory: &Trajectory,
    ) -> Result<Vec<StepLogits>, ScorerError> {
        let labels = trajectory
            .labels
            .as_ref()
            .ok_or(ScorerError::MissingLabels)?;
        Ok(labels
            .iter()
            .map(|label| match label {
                StepLabel::Secure => StepLogits::new(ORACLE_LOGIT, -ORACLE_LOGIT),
                StepLabel::Vulnerable => StepLogits::new(-ORACLE_LOGIT, ORACLE_LOGIT),
            })
            .collect())
    }
}

/// Emits a fixed margin for every step.
pub struct ConstantScorer {
    logit: f64,
}

impl ConstantScorer {
    pub fn new(value: f64) -> Result<Self, ScorerError> {
        if !(-1.0..=1.0).contains(&value) {
            return Err(ScorerError::ConstantOutOfRange(value));
        }
        // tanh saturates to exactly +-1.0 well before 1e3.
        let logit = if value.abs() < 1.0 {
            value.atanh()
        } else {
            value.signum() * 1e3
        };
        Ok(Self { logit })
    }
}

impl Scorer for ConstantScorer {
    fn score_steps(
        &self,
        _prompt: &str,
        trajectory: &Trajectory,
    ) -> Result<Vec<StepLogits>, ScorerError> {
        Ok(vec![
            StepLogits::new(self.logit, -self.logit);
            trajectory.len()
        ])
    }
}

/// Default sink/taint table for the lexical demo scorer.
const LEXICAL_SINKS: &[&str] = &[
    r"\bstrcpy\s*\(",
    r"\bstrcat\s*\(",
    r"\bsprintf\s*\(",
    r"\bgets\s*\(",
    r"\bsystem\s*\(",
    r"\bpopen\s*\(",
    r"\bexec[lv]p?e?\s*\(",
    r"\balloca\s*\(",
    r#"scanf\s*\(\s*"%s"#,
    r"\beval\s*\(",
    r"\bpickle\.loads\s*\(",
    r"\bos\.system\s*\(",
    r"\bsubprocess\..*shell\s*=\s*True",
    r"\bmemcpy\s*\([^,]+,[^,]+,\s*strlen",
];

const LEXICAL_LOGIT: f64 = 2.0;

/// Flags steps matching a sink pattern with a negative margin. A demo
/// scorer only; it makes no claim to real detection quality.
pub struct LexicalScorer {
    sinks: RegexSet,
}

impl LexicalScorer {
    pub fn builtin() -> Self {
        Self {
            sinks: RegexSet::new(LEXICAL_SINKS).expect("builtin sink patterns"),
        }
    }

    /// Loads a pattern table: one regular expression per line, matched as a
    /// substring of the step text.
    pub fn from_file(path: &std::path::Path) -> Result<Self, ScorerError> {
        let text = std::fs::read_to_string(path)?;
        let patterns: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        Ok(Self {
            sinks: RegexSet::new(patterns)?,
        })
    }
}

impl Scorer for LexicalScorer {
    fn score_steps(
        &self,
        _prompt: &str,
        trajectory: &Trajectory,
    ) -> Result<Vec<StepLogits>, ScorerError> {
        Ok(trajectory
            .steps
            .iter()
            .map(|step| {
                if self.sinks.is_match(&step.text) {
                    StepLogits::new(-LEXICAL_LOGIT, LEXICAL_LOGIT)
                } else {
                    StepLogits::new(LEXICAL_LOGIT, -LEXICAL_LOGIT)
                }
            })
            .collect())
    }
}

/// Request body for the remote wire protocol.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub prompt: String,
    pub steps: Vec<String>,
}

/// Response body: exactly one `[safe, vulnerable]` pair per step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub logits: Vec<[f64; 2]>,
}

/// HTTP client for an external reward model behind `POST /score`.
///
/// No retries by default; scoring must stay deterministic for evaluation
/// reproducibility, so retries only repeat an idempotent request.
pub struct RemoteScorer {
    endpoint: String,
    client: reqwest::blocking::Client,
    max_in_flight: usize,
    retries: u32,
}

impl RemoteScorer {
    pub fn new(
        endpoint: String,
        timeout: Duration,
        max_in_flight: usize,
        retries: u32,
    ) -> Result<Self, ScorerError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| ScorerError::Transport(e.to_string()))?;
        Ok(Self {
            endpoint,
            client,
            max_in_flight: max_in_flight.max(1),
            retries,
        })
    }

    fn post(&self, request: &ScoreRequest) -> Result<ScoreResponse, ScorerError> {
        let mut last_err = None;
        for _ in 0..=self.retries {
            let result = self
                .client
                .post(&self.endpoint)
                .json(request)
                .send()
                .and_then(|r| r.error_for_status())
                .and_then(|r| r.json::<ScoreResponse>());
            match result {
                Ok(response) => return Ok(response),
                Err(e) => last_err = Some(e),
            }
        }
        Err(ScorerError::Transport(
            last_err.expect("at least one attempt").to_string(),
        ))
    }
}

impl Scorer for RemoteScorer {
    fn score_steps(
        &self,
        prompt: &str,
        trajectory: &Trajectory,
    ) -> Result<Vec<StepLogits>, ScorerError> {
        let request = ScoreRequest {
            prompt: prompt.to_string(),
            steps: trajectory.steps.iter().map(|s| s.text.clone()).collect(),
        };
        let response = self.post(&request)?;
        if response.logits.len() != trajectory.len() {
            return Err(ScorerError::Protocol {
                expected: trajectory.len(),
                got: response.logits.len(),
            });
        }
        Ok(response
            .logits
            .into_iter()
            .map(|[safe, vulnerable]| StepLogits::new(safe, vulnerable))
            .collect())
    }

    fn max_in_flight(&self) -> usize {
        self.max_in_flight
    }
}
