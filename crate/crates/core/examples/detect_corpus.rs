//! Detects vulnerable examples in a small labeled corpus with the builtin
//! lexical scorer and reports classification metrics.
//!
//! The lexical scorer flags well-known dangerous constructs (strcpy, gets,
//! system, ...) without any model behind it, which makes the example fully
//! self-contained.
//!
//! Run with: `cargo run --example detect_corpus`

use stepsec::aggregator::{self, AggregationConfig};
use stepsec::corpus::{DatasetRecord, StepLabel};
use stepsec::evaluator::{self, EvalConfig};
use stepsec::scorer::{self, LexicalScorer};

fn record(prompt: &str, steps: &[(&str, u8)]) -> DatasetRecord {
    DatasetRecord::new(
        prompt,
        steps.iter().map(|(s, _)| s.to_string()).collect(),
        steps
            .iter()
            .map(|&(_, bit)| StepLabel::from_bit(bit as i64).unwrap())
            .collect(),
    )
}

fn main() {
    let corpus = vec![
        record(
            "copy a string",
            &[("char buf[64];", 1), ("strcpy(buf, input);", 0)],
        ),
        record(
            "copy a string safely",
            &[
                ("char buf[64];", 1),
                ("strncpy(buf, input, sizeof buf - 1);", 1),
            ],
        ),
        record("run a command", &[("system(cmd);", 0)]),
        record("log a value", &[("log_info(value);", 1)]),
        record("read a line", &[("char line[128];", 1), ("gets(line);", 0)]),
    ];

    let scorer = LexicalScorer::builtin();
    let agg = AggregationConfig::default();
    let eval = EvalConfig::default();

    let mut preds = Vec::new();
    let mut truths = Vec::new();
    for rec in &corpus {
        let trajectory = rec.to_trajectory();
        let scored = scorer::score_trajectory(&trajectory, &scorer, &rec.prompt).unwrap();
        let rewards: Vec<f64> = scored.rewards.iter().map(|r| r.value()).collect();
        let aggregate = aggregator::aggregate(&rewards, &agg).unwrap();
        let pred = evaluator::classify(aggregate, &eval).unwrap();
        let truth = if rec.labels.iter().any(|l| !l.is_secure()) {
            StepLabel::Vulnerable
        } else {
            StepLabel::Secure
        };
        println!(
            "{:<24} R = {aggregate:+.4}  pred = {}  truth = {}",
            rec.prompt,
            pred.as_bit(),
            truth.as_bit()
        );
        preds.push(pred);
        truths.push(truth);
    }

    let m = evaluator::classification_metrics(&preds, &truths).unwrap();
    println!(
        "\nAcc {:.2}  Prec {:.2}  Rec {:.2}  F1 {:.2}",
        m.accuracy, m.precision, m.recall, m.f1
    );
}
