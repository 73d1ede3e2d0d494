//! Detection decisions, metrics, and dataset analytics.
//!
//! Covers thresholded classification of aggregate rewards, the standard
//! accuracy/precision/recall/F1 suite with vulnerable as the positive
//! class, the pairwise outcome fractions over (vulnerable, patched) code
//! pairs, the unbiased pass@k estimator, best-of-N selection metrics with
//! their pool upper bound, dataset imbalance statistics, and length-binned
//! accuracy reports.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CandidatePool, DatasetRecord, StepLabel};

#[derive(Debug, Error)]
pub enum EvaluatorError {
    #[error("aggregate reward {0} outside [-1, 1]")]
    RewardOutOfRange(f64),
    #[error("predictions length {preds} != truths length {truths}")]
    LengthMismatch { preds: usize, truths: usize },
    #[error("metric input must be non-empty")]
    EmptyInput,
    #[error("pass@k requires k <= n, got n={n}, k={k}")]
    BudgetExceedsSamples { n: u64, k: u64 },
    #[error("pass@k requires c <= n, got n={n}, c={c}")]
    SuccessesExceedSamples { n: u64, c: u64 },
    #[error("ranking is not a permutation of pool indices")]
    BadRanking,
    #[error("pool is missing ground-truth {0} labels")]
    MissingGround(&'static str),
    #[error("length bins must be strictly increasing")]
    BadBins,
    #[error("detection threshold {0} outside [0, 1]")]
    BadThreshold(f64),
}

/// Token counting strategy; the whitespace default is the conventional
/// proxy, the character-quadgram variant is tokenizer-robust.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenCounter {
    #[default]
    Whitespace,
    CharacterQuadgram,
}

impl TokenCounter {
    pub fn count(self, text: &str) -> usize {
        match self {
            Self::Whitespace => text.split_whitespace().count(),
            Self::CharacterQuadgram => text.chars().count().div_ceil(4),
        }
    }
}

/// Detection and analytics configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub detection_threshold: f64,
    pub token_counter: TokenCounter,
    /// Bin edges for accuracy-vs-length, strictly increasing.
    pub length_bins: Vec<f64>,
    pub length_hack_ratio: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            detection_threshold: 0.5,
            token_counter: TokenCounter::Whitespace,
            length_bins: vec![0.0, 128.0, 256.0, 512.0, 1024.0, 2048.0],
            length_hack_ratio: 2.0,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), EvaluatorError> {
        if !(0.0..=1.0).contains(&self.detection_threshold) {
            return Err(EvaluatorError::BadThreshold(self.detection_threshold));
        }
        if self.length_bins.windows(2).any(|w| w[0] >= w[1]) {
            return Err(EvaluatorError::BadBins);
        }
        Ok(())
    }
}

/// Maps an aggregate reward to a binary prediction.
///
/// `p = (R + 1) / 2` lifts the margin scale onto [0, 1]; the prediction is
/// secure iff `p >= threshold` (inclusive), equivalent at the default 0.5
/// threshold to "vulnerable iff R < 0".
pub fn classify(aggregate: f64, config: &EvalConfig) -> Result<StepLabel, EvaluatorError> {
    if !(-1.0..=1.0).contains(&aggregate) {
        return Err(EvaluatorError::RewardOutOfRange(aggregate));
    }
    let p = (aggregate + 1.0) / 2.0;
    Ok(if p >= config.detection_threshold {
        StepLabel::Secure
    } else {
        StepLabel::Vulnerable
    })
}

/// Accuracy, precision, recall, and F1 with vulnerable (0) as the positive
/// class; F1 is 0 when precision + recall is 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn classification_metrics(
    preds: &[StepLabel],
    truths: &[StepLabel],
) -> Result<ClassificationMetrics, EvaluatorError> {
    if preds.len() != truths.len() {
        return Err(EvaluatorError::LengthMismatch {
            preds: preds.len(),
            truths: truths.len(),
        });
    }
    if preds.is_empty() {
        return Err(EvaluatorError::EmptyInput);
    }
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    let mut correct = 0usize;
    for (&pred, &truth) in preds.iter().zip(truths) {
        if pred == truth {
            correct += 1;
        }
        match (pred, truth) {
            (StepLabel::Vulnerable, StepLabel::Vulnerable) => tp += 1,
            (StepLabel::Vulnerable, StepLabel::Secure) => fp += 1,
            (StepLabel::Secure, StepLabel::Vulnerable) => fn_ += 1,
            (StepLabel::Secure, StepLabel::Secure) => {}
        }
    }
    let precision = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fn_ == 0 {
        0.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(ClassificationMetrics {
        accuracy: correct as f64 / preds.len() as f64,
        precision,
        recall,
        f1,
    })
}

/// Predictions on both elements of a (vulnerable, fixed) pair;
/// 1 = predicted secure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairPrediction {
    pub pred_on_vulnerable: StepLabel,
    pub pred_on_fixed: StepLabel,
}

/// The four pairwise outcome fractions; counts kept so the partition
/// identity holds exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairwiseMetrics {
    /// Both correct: vulnerable predicted 0, fixed predicted 1.
    pub pc_count: usize,
    /// Both predicted vulnerable.
    pub pv_count: usize,
    /// Both predicted benign.
    pub pb_count: usize,
    /// Labels reversed.
    pub pr_count: usize,
    pub total: usize,
}

impl PairwiseMetrics {
    pub fn pc(&self) -> f64 {
        self.pc_count as f64 / self.total as f64
    }
    pub fn pv(&self) -> f64 {
        self.pv_count as f64 / self.total as f64
    }
    pub fn pb(&self) -> f64 {
        self.pb_count as f64 / self.total as f64
    }
    pub fn pr(&self) -> f64 {
        self.pr_count as f64 / self.total as f64
    }
}

pub fn pairwise_metrics(pairs: &[PairPrediction]) -> Result<PairwiseMetrics, EvaluatorError> {
    if pairs.is_empty() {
        return Err(EvaluatorError::EmptyInput);
    }
    let mut metrics = PairwiseMetrics {
        pc_count: 0,
        pv_count: 0,
        pb_count: 0,
        pr_count: 0,
        total: pairs.len(),
    };
    for pair in pairs {
        match (pair.pred_on_vulnerable, pair.pred_on_fixed) {
            (StepLabel::Vulnerable, StepLabel::Secure) => metrics.pc_count += 1,
            (StepLabel::Vulnerable, StepLabel::Vulnerable) => metrics.pv_count += 1,
            (StepLabel::Secure, StepLabel::Secure) => metrics.pb_count += 1,
            (StepLabel::Secure, StepLabel::Vulnerable) => metrics.pr_count += 1,
        }
    }
    Ok(metrics)
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut result = BigUint::from(1u32);
    for i in 0..k {
        result = result * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    result
}

/// Unbiased pass@k estimator: `1 - C(n-c, k) / C(n, k)`, with the binomials
/// evaluated in exact integer arithmetic before the final division.
///
/// Applies identically to func@k and to SR@k / safe@k in the sampling
/// reading (swap in the corresponding success flag).
pub fn pass_at_k(n: u64, c: u64, k: u64) -> Result<f64, EvaluatorError> {
    if c > n {
        return Err(EvaluatorError::SuccessesExceedSamples { n, c });
    }
    if k == 0 || k > n {
        return Err(EvaluatorError::BudgetExceedsSamples { n, k });
    }
    let numerator = binomial(n - c, k);
    let denominator = binomial(n, k);
    let ratio = numerator
        .to_f64()
        .expect("binomial fits f64 for valid inputs")
        / denominator
            .to_f64()
            .expect("binomial fits f64 for valid inputs");
    Ok(1.0 - ratio)
}

/// Which ground-truth flag counts as success for best-of-N metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuccessFlag {
    Secure,
    Functional,
    /// Secure and functional simultaneously.
    Both,
}

/// Per-pool best-of-N outcome and the pool ceiling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestOfOutcome {
    /// 1 iff any of the top-k ranked candidates carries the success flag.
    pub selected_success: bool,
    /// 1 iff any candidate anywhere in the pool carries it.
    pub upper_bound: bool,
}

fn success_flags(pool: &CandidatePool, flag: SuccessFlag) -> Result<Vec<bool>, EvaluatorError> {
    let secure = || {
        pool.ground_secure
            .as_deref()
            .ok_or(EvaluatorError::MissingGround("secure"))
    };
    let functional = || {
        pool.ground_functional
            .as_deref()
            .ok_or(EvaluatorError::MissingGround("functional"))
    };
    Ok(match flag {
        SuccessFlag::Secure => secure()?.to_vec(),
        SuccessFlag::Functional => functional()?.to_vec(),
        SuccessFlag::Both => secure()?
            .iter()
            .zip(functional()?)
            .map(|(&s, &f)| s && f)
            .collect(),
    })
}

/// Top-k selection success and the any-candidate upper bound for one pool.
pub fn best_of_metrics(
    pool: &CandidatePool,
    ranking: &[usize],
    k: usize,
    flag: SuccessFlag,
) -> Result<BestOfOutcome, EvaluatorError> {
    let size = pool.size();
    if ranking.len() != size {
        return Err(EvaluatorError::BadRanking);
    }
    let mut seen = vec![false; size];
    for &i in ranking {
        if i >= size || seen[i] {
            return Err(EvaluatorError::BadRanking);
        }
        seen[i] = true;
    }
    let flags = success_flags(pool, flag)?;
    let k = k.min(size);
    Ok(BestOfOutcome {
        selected_success: ranking[..k].iter().any(|&i| flags[i]),
        upper_bound: flags.iter().any(|&f| f),
    })
}

/// The Table-5-style dataset imbalance statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    /// Vulnerable example count over secure example count.
    pub example_vs: f64,
    /// Ratio of per-example average token counts, vulnerable over secure.
    pub token_vs: f64,
    /// Same ratio over character counts.
    pub char_vs: f64,
    /// Same ratio over step counts.
    pub step_vs: f64,
    /// Mean vulnerable-step fraction within vulnerable examples.
    pub step_v_ratio: f64,
    /// Mean vulnerable-step fraction over all examples.
    pub step_a_ratio: f64,
    /// Set when the token ratio suggests length can stand in for the label.
    pub length_hack_flag: bool,
    /// False when one class is absent and the ratios are reported as 0.
    pub ratios_defined: bool,
    pub vulnerable_examples: usize,
    pub secure_examples: usize,
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

fn ratio(v: f64, s: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        v / s
    }
}

/// Computes the imbalance statistics of a labeled corpus.
///
/// An example is vulnerable iff any of its step labels is 0. With one class
/// absent the V:S ratios are undefined and reported as 0 with
/// `ratios_defined = false`.
pub fn dataset_stats(
    corpus: &[DatasetRecord],
    config: &EvalConfig,
) -> Result<DatasetStats, EvaluatorError> {
    if corpus.is_empty() {
        return Err(EvaluatorError::EmptyInput);
    }
    let mut vul_tokens = Vec::new();
    let mut sec_tokens = Vec::new();
    let mut vul_chars = Vec::new();
    let mut sec_chars = Vec::new();
    let mut vul_steps = Vec::new();
    let mut sec_steps = Vec::new();
    let mut vul_fracs = Vec::new();
    let mut all_fracs = Vec::new();

    for record in corpus {
        let tokens: usize = record
            .completions
            .iter()
            .map(|c| config.token_counter.count(c))
            .sum();
        let chars: usize = record.completions.iter().map(|c| c.chars().count()).sum();
        let steps = record.completions.len();
        let vulnerable_steps = record.labels.iter().filter(|l| !l.is_secure()).count();
        let frac = if steps == 0 {
            0.0
        } else {
            vulnerable_steps as f64 / steps as f64
        };
        all_fracs.push(frac);
        if vulnerable_steps > 0 {
            vul_tokens.push(tokens as f64);
            vul_chars.push(chars as f64);
            vul_steps.push(steps as f64);
            vul_fracs.push(frac);
        } else {
            sec_tokens.push(tokens as f64);
            sec_chars.push(chars as f64);
            sec_steps.push(steps as f64);
        }
    }

    let both_present = !vul_tokens.is_empty() && !sec_tokens.is_empty();
    let token_vs = ratio(mean(&vul_tokens), mean(&sec_tokens));
    let stats = DatasetStats {
        example_vs: ratio(vul_tokens.len() as f64, sec_tokens.len() as f64),
        token_vs,
        char_vs: ratio(mean(&vul_chars), mean(&sec_chars)),
        step_vs: ratio(mean(&vul_steps), mean(&sec_steps)),
        step_v_ratio: mean(&vul_fracs),
        step_a_ratio: mean(&all_fracs),
        length_hack_flag: both_present
            && (token_vs >= config.length_hack_ratio || token_vs <= 1.0 / config.length_hack_ratio),
        ratios_defined: both_present,
        vulnerable_examples: vul_tokens.len(),
        secure_examples: sec_tokens.len(),
    };
    Ok(stats)
}

/// One accuracy-vs-length bin; doubles as plot data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthBin {
    pub bin_low: f64,
    pub bin_high: f64,
    pub count: usize,
    /// None for empty bins.
    pub accuracy: Option<f64>,
}

/// Assigns each `(token_count, correct)` example to the half-open bin
/// `[low, high)` containing its token count.
///
/// Counts below the first edge land in an underflow bin; counts at or above
/// the last edge land in an overflow bin.
pub fn length_binned_accuracy(
    scored: &[(usize, bool)],
    bins: &[f64],
) -> Result<Vec<LengthBin>, EvaluatorError> {
    if bins.is_empty() || bins.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EvaluatorError::BadBins);
    }
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend_from_slice(bins);
    edges.push(f64::INFINITY);

    let mut counts = vec![0usize; edges.len() - 1];
    let mut correct = vec![0usize; edges.len() - 1];
    for &(tokens, ok) in scored {
        let t = tokens as f64;
        let bin = edges
            .windows(2)
            .position(|w| t >= w[0] && t < w[1])
            .expect("edges cover the real line");
        counts[bin] += 1;
        if ok {
            correct[bin] += 1;
        }
    }
    Ok(edges
        .windows(2)
        .enumerate()
        .map(|(i, w)| LengthBin {
            bin_low: w[0],
            bin_high: w[1],
            count: counts[i],
            accuracy: if counts[i] == 0 {
                None
            } else {
                Some(correct[i] as f64 / counts[i] as f64)
            },
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Trajectory;

    fn cfg() -> EvalConfig {
        EvalConfig::default()
    }

    #[test]
    fn classify_extremes_and_boundary() {
        assert_eq!(classify(1.0, &cfg()).unwrap(), StepLabel::Secure);
        assert_eq!(classify(-1.0, &cfg()).unwrap(), StepLabel::Vulnerable);
        // p = 0.5 at R = 0; >= is inclusive
        assert_eq!(classify(0.0, &cfg()).unwrap(), StepLabel::Secure);
        assert!(classify(1.5, &cfg()).is_err());
    }

    #[test]
    fn metrics_on_perfect_predictions() {
        let labels = vec![
            StepLabel::Vulnerable,
            StepLabel::Secure,
            StepLabel::Vulnerable,
        ];
        let m = classification_metrics(&labels, &labels).unwrap();
        assert_eq!(
            (m.accuracy, m.precision, m.recall, m.f1),
            (1.0, 1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn all_secure_predictor_has_zero_recall() {
        let preds = vec![StepLabel::Secure; 4];
        let truths = vec![
            StepLabel::Vulnerable,
            StepLabel::Secure,
            StepLabel::Vulnerable,
            StepLabel::Secure,
        ];
        let m = classification_metrics(&preds, &truths).unwrap();
        assert_eq!(m.recall, 0.0);
        assert_eq!(m.f1, 0.0);
    }

    #[test]
    fn metrics_from_confusion_counts() {
        let to = |bits: [u8; 4]| -> Vec<StepLabel> {
            bits.iter()
                .map(|&b| StepLabel::from_bit(b.into()).unwrap())
                .collect()
        };
        let m = classification_metrics(&to([0, 0, 1, 1]), &to([0, 1, 0, 1])).unwrap();
        assert_eq!(
            (m.accuracy, m.precision, m.recall, m.f1),
            (0.5, 0.5, 0.5, 0.5)
        );
    }

    #[test]
    fn pairwise_pure_and_mixed_sets() {
        let pair = |v: u8, f: u8| PairPrediction {
            pred_on_vulnerable: StepLabel::from_bit(v.into()).unwrap(),
            pred_on_fixed: StepLabel::from_bit(f.into()).unwrap(),
        };
        let all_pc = pairwise_metrics(&[pair(0, 1); 3]).unwrap();
        assert_eq!((all_pc.pc(), all_pc.pv()), (1.0, 0.0));
        let all_pv = pairwise_metrics(&[pair(0, 0); 2]).unwrap();
        assert_eq!(all_pv.pv(), 1.0);
        let mixed = pairwise_metrics(&[pair(0, 1), pair(0, 0), pair(1, 1), pair(1, 0)]).unwrap();
        assert_eq!(
            (mixed.pc(), mixed.pv(), mixed.pb(), mixed.pr()),
            (0.25, 0.25, 0.25, 0.25)
        );
        assert_eq!(
            mixed.pc_count + mixed.pv_count + mixed.pb_count + mixed.pr_count,
            mixed.total
        );
    }

    #[test]
    fn pass_at_k_examples() {
        assert_eq!(pass_at_k(5, 0, 1).unwrap(), 0.0);
        assert_eq!(pass_at_k(2, 1, 1).unwrap(), 0.5);
        // C(5,3) = 10 subsets, 9 contain a success
        assert!((pass_at_k(5, 2, 3).unwrap() - 0.9).abs() < 1e-15);
        assert!(pass_at_k(5, 2, 6).is_err());
        assert!(pass_at_k(5, 6, 1).is_err());
    }

    #[test]
    fn best_of_picks_top_k() {
        let pool = CandidatePool::new(
            "p",
            vec![Trajectory::from_texts(["a"]), Trajectory::from_texts(["b"])],
            Some(vec![true, false]),
            None,
        )
        .unwrap();
        let out = best_of_metrics(&pool, &[0, 1], 1, SuccessFlag::Secure).unwrap();
        assert!(out.selected_success && out.upper_bound);
        let out = best_of_metrics(&pool, &[1, 0], 1, SuccessFlag::Secure).unwrap();
        assert!(!out.selected_success && out.upper_bound);
    }

    #[test]
    fn best_of_without_secure_candidate() {
        let pool = CandidatePool::new(
            "p",
            vec![Trajectory::from_texts(["a"]), Trajectory::from_texts(["b"])],
            Some(vec![false, false]),
            None,
        )
        .unwrap();
        for k in 1..=2 {
            let out = best_of_metrics(&pool, &[0, 1], k, SuccessFlag::Secure).unwrap();
            assert!(!out.selected_success && !out.upper_bound);
        }
    }

    #[test]
    fn best_of_requires_ground_labels() {
        let pool =
            CandidatePool::new("p", vec![Trajectory::from_texts(["a"])], None, None).unwrap();
        assert!(matches!(
            best_of_metrics(&pool, &[0], 1, SuccessFlag::Secure),
            Err(EvaluatorError::MissingGround("secure"))
        ));
    }

    #[test]
    fn stats_hand_count() {
        let vul = DatasetRecord::new(
            "",
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            vec![
                StepLabel::Secure,
                StepLabel::Vulnerable,
                StepLabel::Secure,
                StepLabel::Secure,
            ],
        );
        let sec = DatasetRecord::new("", vec!["x".into()], vec![StepLabel::Secure]);
        let stats = dataset_stats(&[vul, sec], &cfg()).unwrap();
        assert_eq!(stats.example_vs, 1.0);
        assert_eq!(stats.step_v_ratio, 0.25);
        assert_eq!(stats.step_a_ratio, 0.125);
        assert!(stats.ratios_defined);
    }

    #[test]
    fn stats_all_secure_flagged_undefined() {
        let sec = DatasetRecord::new("", vec!["x".into()], vec![StepLabel::Secure]);
        let stats = dataset_stats(&[sec.clone(), sec], &cfg()).unwrap();
        assert_eq!(stats.example_vs, 0.0);
        assert_eq!(stats.step_v_ratio, 0.0);
        assert!(!stats.ratios_defined);
        assert!(!stats.length_hack_flag);
    }

    #[test]
    fn stats_length_hack_detection() {
        let long: String = "tok ".repeat(300);
        let short: String = "tok ".repeat(100);
        let vul = DatasetRecord::new("", vec![long], vec![StepLabel::Vulnerable]);
        let sec = DatasetRecord::new("", vec![short], vec![StepLabel::Secure]);
        let stats = dataset_stats(&[vul, sec], &cfg()).unwrap();
        assert!((stats.token_vs - 3.0).abs() < 1e-12);
        assert!(stats.length_hack_flag);
    }

    #[test]
    fn stats_empty_corpus_rejected() {
        assert!(matches!(
            dataset_stats(&[], &cfg()),
            Err(EvaluatorError::EmptyInput)
        ));
    }

    #[test]
    fn binning_places_examples_by_hand() {
        let scored: Vec<(usize, bool)> = vec![
            (5, true),   // underflow (< 10)
            (10, true),  // [10, 20)
            (15, false), // [10, 20)
            (20, true),  // [20, 30)
            (29, true),  // [20, 30)
            (30, false), // overflow (>= 30)
        ];
        let bins = length_binned_accuracy(&scored, &[10.0, 20.0, 30.0]).unwrap();
        let counts: Vec<usize> = bins.iter().map(|b| b.count).collect();
        assert_eq!(counts, vec![1, 2, 2, 1]);
        assert_eq!(bins[1].accuracy, Some(0.5));
        assert_eq!(bins[3].accuracy, Some(0.0));
    }

    #[test]
    fn binning_reports_empty_bins() {
        let bins = length_binned_accuracy(&[(5, true)], &[0.0, 10.0, 20.0]).unwrap();
        assert_eq!(bins[1].count, 1);
        assert_eq!(bins[2].count, 0);
        assert_eq!(bins[2].accuracy, None);
    }

    #[test]
    fn quadgram_counter() {
        assert_eq!(TokenCounter::CharacterQuadgram.count("abcdefgh"), 2);
        assert_eq!(TokenCounter::CharacterQuadgram.count("abcde"), 2);
        assert_eq!(TokenCounter::Whitespace.count("a b  c"), 3);
    }
}
