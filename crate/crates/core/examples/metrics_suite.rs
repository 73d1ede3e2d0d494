//! Tour of the evaluation metrics: unbiased pass@k, the pairwise outcome
//! partition, and dataset imbalance statistics.
//!
//! Run with: `cargo run --example metrics_suite`

use stepsec::corpus::{DatasetRecord, StepLabel};
use stepsec::evaluator::{self, EvalConfig, PairPrediction};

fn main() {
    // pass@k from (n samples, c successes): 1 - C(n-c, k) / C(n, k).
    println!("pass@k:");
    for (n, c) in [(5, 2), (10, 1), (10, 5)] {
        for k in [1, 3, 5] {
            let value = evaluator::pass_at_k(n, c, k).unwrap();
            println!("  n={n:<3} c={c:<3} k={k}: {value:.4}");
        }
    }

    // Pairwise predictions on (vulnerable, fixed) pairs partition into
    // correct / all-vulnerable / all-benign / reversed.
    let label = |bit: i64| StepLabel::from_bit(bit).unwrap();
    let pairs = vec![
        PairPrediction {
            pred_on_vulnerable: label(0),
            pred_on_fixed: label(1),
        },
        PairPrediction {
            pred_on_vulnerable: label(0),
            pred_on_fixed: label(1),
        },
        PairPrediction {
            pred_on_vulnerable: label(0),
            pred_on_fixed: label(0),
        },
        PairPrediction {
            pred_on_vulnerable: label(1),
            pred_on_fixed: label(0),
        },
    ];
    let m = evaluator::pairwise_metrics(&pairs).unwrap();
    println!(
        "\npairwise: P-C {:.2}%  P-V {:.2}%  P-B {:.2}%  P-R {:.2}%",
        100.0 * m.pc(),
        100.0 * m.pv(),
        100.0 * m.pb(),
        100.0 * m.pr()
    );

    // Imbalance statistics over a toy labeled corpus. The vulnerable
    // examples here are much longer than the secure ones, which trips the
    // length-hacking flag.
    let corpus = vec![
        DatasetRecord::new(
            "p0",
            vec!["a b c d e f g h".into(), "i j k l m n o p".into()],
            vec![label(0), label(1)],
        ),
        DatasetRecord::new("p1", vec!["a b".into()], vec![label(1)]),
        DatasetRecord::new("p2", vec!["c d".into()], vec![label(1)]),
    ];
    let stats = evaluator::dataset_stats(&corpus, &EvalConfig::default()).unwrap();
    println!(
        "\ndataset: {} vulnerable vs {} secure examples, token V:S = {:.2}, \
         length_hack_flag = {}",
        stats.vulnerable_examples, stats.secure_examples, stats.token_vs, stats.length_hack_flag
    );
}
