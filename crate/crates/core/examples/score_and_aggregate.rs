//! Turns per-step logits into margin rewards and compares the aggregation
//! rules on the same trajectory.
//!
//! The margin reward is the softmax probability gap, equal to
//! `tanh((safe - vulnerable) / 2)`, so one risky step drags the
//! risk-sensitive soft-min far below the plain average.
//!
//! Run with: `cargo run --example score_and_aggregate`

use stepsec::aggregator::{self, AggregationConfig, AggregationMethod};
use stepsec::scorer::{self, StepLogits};

fn main() {
    // Three confident-safe steps and one confident-vulnerable one.
    let logits = [
        StepLogits::new(4.0, -4.0),
        StepLogits::new(3.0, -3.0),
        StepLogits::new(-3.5, 3.5),
        StepLogits::new(4.5, -4.5),
    ];
    let rewards: Vec<f64> = logits
        .iter()
        .map(|&l| scorer::margin(l).expect("finite logits").value())
        .collect();
    println!("step rewards: {rewards:?}\n");

    let weights = aggregator::softmax_weights(&rewards, 1.0, -1).unwrap();
    println!("soft-min weights (tau = 1, sign = -1): {weights:?}\n");

    for method in [
        AggregationMethod::SoftWeighted,
        AggregationMethod::SoftWeightedMin,
        AggregationMethod::Min,
        AggregationMethod::Last,
        AggregationMethod::Average,
        AggregationMethod::Binary,
        AggregationMethod::WeightedBinary,
    ] {
        let config = AggregationConfig {
            method,
            ..AggregationConfig::default()
        };
        let value = aggregator::aggregate(&rewards, &config).unwrap();
        println!("{:<18} {value:+.4}", method.name());
    }

    // Lower temperature sharpens the soft-min toward the hard minimum.
    println!();
    for tau in [10.0, 1.0, 0.1, 0.01] {
        let value = aggregator::soft_weighted(&rewards, tau, -1).unwrap();
        println!("soft_weighted tau={tau:<5} {value:+.4}");
    }
}
