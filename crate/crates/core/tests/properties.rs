//! Property tests for the library's stated invariants.

use proptest::prelude::*;

use stepsec::aggregator::{self, AggregationConfig, AggregationMethod};
use stepsec::corpus::{DatasetRecord, StepLabel};
use stepsec::evaluator;
use stepsec::scorer::{self, StepLogits};
use stepsec::segmenter::{self, SegmenterConfig};

fn reward_vec() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..=1.0, 1..=24)
}

fn label() -> impl Strategy<Value = StepLabel> {
    prop_oneof![Just(StepLabel::Secure), Just(StepLabel::Vulnerable)]
}

proptest! {
    #[test]
    fn margin_is_bounded_and_antisymmetric(
        a in -50.0f64..50.0,
        b in -50.0f64..50.0,
    ) {
        let forward = scorer::margin(StepLogits::new(a, b)).unwrap().value();
        let backward = scorer::margin(StepLogits::new(b, a)).unwrap().value();
        prop_assert!((-1.0..=1.0).contains(&forward));
        prop_assert!((forward + backward).abs() <= 1e-12);
    }

    #[test]
    fn margin_is_monotone_in_the_gap(
        a in -20.0f64..20.0,
        b in -20.0f64..20.0,
        bump in 0.01f64..5.0,
    ) {
        let base = scorer::margin(StepLogits::new(a, b)).unwrap().value();
        let raised = scorer::margin(StepLogits::new(a + bump, b)).unwrap().value();
        prop_assert!(raised >= base);
        // Strict increase except in the saturated tails of tanh.
        if ((a - b) / 2.0).abs() < 15.0 {
            prop_assert!(raised > base);
        }
    }

    #[test]
    fn softmax_weights_are_a_distribution(
        rewards in reward_vec(),
        tau in 0.05f64..50.0,
        sign in prop_oneof![Just(-1i8), Just(1i8)],
    ) {
        let weights = aggregator::softmax_weights(&rewards, tau, sign).unwrap();
        prop_assert_eq!(weights.len(), rewards.len());
        prop_assert!(weights.iter().all(|w| *w >= 0.0));
        prop_assert!((weights.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn continuous_aggregates_stay_in_reward_hull(
        rewards in reward_vec(),
        tau in 0.05f64..50.0,
    ) {
        let min = rewards.iter().copied().fold(f64::INFINITY, f64::min);
        let max = rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for method in [
            AggregationMethod::SoftWeighted,
            AggregationMethod::Min,
            AggregationMethod::Last,
            AggregationMethod::Average,
        ] {
            let config = AggregationConfig {
                method,
                tau,
                sign: -1,
                binary_threshold: 0.0,
            };
            let value = aggregator::aggregate(&rewards, &config).unwrap();
            prop_assert!(
                value >= min - 1e-12 && value <= max + 1e-12,
                "{}: {} outside [{}, {}]", method.name(), value, min, max
            );
        }
    }

    #[test]
    fn soft_weighted_is_permutation_invariant(
        rewards in reward_vec(),
        tau in 0.05f64..50.0,
    ) {
        let mut reversed = rewards.clone();
        reversed.reverse();
        let a = aggregator::soft_weighted(&rewards, tau, -1).unwrap();
        let b = aggregator::soft_weighted(&reversed, tau, -1).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn binary_aggregate_is_an_indicator(rewards in reward_vec()) {
        let value = aggregator::binary(&rewards, 0.0).unwrap();
        prop_assert!(value == 1.0 || value == 0.0);
        let min = rewards.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(value == 1.0, min >= 0.0);
    }

    #[test]
    fn pass_at_k_is_a_probability_with_fixed_ends(
        n in 1u64..=30,
        c_frac in 0.0f64..=1.0,
        k_frac in 0.0f64..1.0,
    ) {
        let c = (c_frac * n as f64).round() as u64;
        let k = 1 + (k_frac * (n - 1) as f64).floor() as u64;
        let value = evaluator::pass_at_k(n, c, k).unwrap();
        prop_assert!((0.0..=1.0).contains(&value));
        if c == 0 {
            prop_assert_eq!(value, 0.0);
        }
        if c == n {
            prop_assert_eq!(value, 1.0);
        }
        let exhaustive = evaluator::pass_at_k(n, c, n).unwrap();
        prop_assert_eq!(exhaustive > 0.0, c > 0);
    }

    #[test]
    fn classification_metrics_are_bounded(
        bits in prop::collection::vec((label(), label()), 1..=64),
    ) {
        let preds: Vec<StepLabel> = bits.iter().map(|(p, _)| *p).collect();
        let truths: Vec<StepLabel> = bits.iter().map(|(_, t)| *t).collect();
        let m = evaluator::classification_metrics(&preds, &truths).unwrap();
        for value in [m.accuracy, m.precision, m.recall, m.f1] {
            prop_assert!((0.0..=1.0).contains(&value));
        }
    }

    #[test]
    fn filtered_steps_are_never_noop_and_contiguous(
        source in "[a-z;(){}\\n /]{0,200}",
    ) {
        let config = SegmenterConfig::default();
        let steps = segmenter::filter_noop(
            segmenter::split_steps(&source, &config),
            &config,
        );
        for (expected, step) in steps.iter().enumerate() {
            prop_assert_eq!(step.index, expected);
            prop_assert!(!config.noop_patterns.matches(&step.text));
        }
    }

    #[test]
    fn refinement_preserves_text_and_balances_interior(
        source in "[a-z;(){}\\n]{0,200}",
    ) {
        let config = SegmenterConfig::default();
        let steps = segmenter::filter_noop(
            segmenter::split_steps(&source, &config),
            &config,
        );
        let joined_before: Vec<String> = steps.iter().map(|s| s.text.clone()).collect();
        let refined = segmenter::refine_boundaries(steps, &config);
        let joined_after: String = refined
            .steps
            .iter()
            .map(|s| s.text.as_str())
            .collect::<Vec<_>>()
            .join(&config.separator);
        prop_assert_eq!(joined_before.join(&config.separator), joined_after);
    }

    #[test]
    fn merge_is_idempotent(
        source in "[a-z;(){}\\n /#]{0,200}",
        bit in any::<bool>(),
    ) {
        let config = SegmenterConfig::default();
        let label = if bit { StepLabel::Secure } else { StepLabel::Vulnerable };
        let steps: Vec<_> = segmenter::filter_noop(
            segmenter::split_steps(&source, &config),
            &config,
        )
        .into_iter()
        .map(|s| (s, label))
        .collect();
        let once = segmenter::merge_steps(steps, &config);
        let twice = segmenter::merge_steps(once.clone(), &config);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn record_round_trip_is_identity(
        prompt in "[ -~]{0,40}",
        steps in prop::collection::vec(("[ -~]{0,40}", label()), 1..=8),
    ) {
        let (completions, labels): (Vec<String>, Vec<StepLabel>) =
            steps.into_iter().unzip();
        let record = DatasetRecord::new(prompt, completions, labels);
        let mut bytes = Vec::new();
        stepsec::corpus::write_records(&mut bytes, std::slice::from_ref(&record)).unwrap();
        let reread = stepsec::corpus::read_records(bytes.as_slice()).unwrap();
        prop_assert_eq!(reread, vec![record]);
    }
}
