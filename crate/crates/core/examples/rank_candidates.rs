//! Best-of-N selection over a candidate pool.
//!
//! Each candidate is a step-labeled trajectory; the oracle scorer reads the
//! labels directly, so ranking puts the secure candidate first and the
//! selected top-1 hits the pool's upper bound.
//!
//! Run with: `cargo run --example rank_candidates`

use stepsec::aggregator::AggregationConfig;
use stepsec::corpus::{CandidatePool, StepLabel, Trajectory};
use stepsec::evaluator::{self, SuccessFlag};
use stepsec::rank;
use stepsec::scorer::OracleScorer;

fn candidate(steps: &[(&str, u8)]) -> Trajectory {
    let mut t = Trajectory::from_texts(steps.iter().map(|(s, _)| s.to_string()));
    t.labels = Some(
        steps
            .iter()
            .map(|&(_, bit)| StepLabel::from_bit(bit as i64).unwrap())
            .collect(),
    );
    t
}

fn main() {
    let candidates = vec![
        candidate(&[("char buf[64];", 1), ("strcpy(buf, s);", 0)]),
        candidate(&[
            ("char buf[64];", 1),
            ("strncpy(buf, s, sizeof buf - 1);", 1),
            ("buf[sizeof buf - 1] = '\\0';", 1),
        ]),
        candidate(&[("system(s);", 0)]),
    ];
    let secure = vec![false, true, false];
    let pool = CandidatePool::new("copy user input", candidates, Some(secure), None)
        .expect("consistent pool");

    let agg = AggregationConfig::default();
    let result = rank::rank_pool("demo-pool", &pool, &OracleScorer, &agg).unwrap();
    println!("ranking ({}):", result.method);
    for (rank_pos, (&index, score)) in result.order.iter().zip(&result.scores).enumerate() {
        println!("  #{rank_pos}: candidate {index} with aggregate {score:+.4}");
    }

    let selected = rank::select_top_k(&result, 1).unwrap();
    println!("\nselected top-1: candidate {}", selected[0]);

    let outcome = evaluator::best_of_metrics(&pool, &result.order, 1, SuccessFlag::Secure).unwrap();
    println!(
        "selected_success = {}, upper_bound = {}",
        outcome.selected_success, outcome.upper_bound
    );
    assert!(outcome.selected_success && outcome.upper_bound);
}
