//! Segments a raw C-like source into reasoning steps.
//!
//! Shows the full segmentation pipeline: blank-line splitting, no-op
//! filtering, and bracket-balance boundary refinement.
//!
//! Run with: `cargo run --example segment_source`

use stepsec::segmenter::{self, SegmenterConfig};

fn main() {
    let source = "\
// request handler

#include <string.h>

int handle(char *input) {
    char buf[64];

    if (strlen(input) < sizeof buf) {

        strcpy(buf, input);

    }

    return 0;
}";

    let config = SegmenterConfig::default();

    let raw = segmenter::split_steps(source, &config);
    println!("after split: {} steps", raw.len());

    let filtered = segmenter::filter_noop(raw, &config);
    println!("after no-op filter: {} steps", filtered.len());

    let refined = segmenter::refine_boundaries(filtered, &config);
    if let Some(warning) = &refined.warning {
        eprintln!("warning: {warning}");
    }
    println!("after refinement: {} steps\n", refined.steps.len());

    for step in &refined.steps {
        println!("--- step {} ---\n{}\n", step.index, step.text);
    }
}
