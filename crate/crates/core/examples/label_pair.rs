//! Derives step labels from a vulnerable/fixed code pair.
//!
//! The diff between the two sides marks the changed vulnerable lines; any
//! step containing one of them is labeled 0 (vulnerable), everything else 1.
//! The fixed side is labeled all-secure.
//!
//! Run with: `cargo run --example label_pair`

use stepsec::labeler;
use stepsec::segmenter::{self, SegmenterConfig};

fn main() {
    let vulnerable = "\
char buf[64];

strcpy(buf, user_input);

log_access(buf);

return process(buf);";

    let fixed = "\
char buf[64];

strncpy(buf, user_input, sizeof buf - 1);
buf[sizeof buf - 1] = '\\0';

log_access(buf);

return process(buf);";

    let config = SegmenterConfig::default();
    let diff = labeler::align_diff(vulnerable, fixed).expect("non-empty sources");
    println!("changed vulnerable lines:");
    for line in &diff.changed_lines {
        println!("  {}: {}", line.index, line.text);
    }

    let vul = segmenter::segment_source(vulnerable, &config);
    let labels = labeler::label_vulnerable(&vul, &diff).expect("consistent diff");
    println!("\nvulnerable side:");
    for (step, label) in vul.steps.iter().zip(&labels) {
        println!("  [{}] {}", label.as_bit(), step.text.replace('\n', " / "));
    }

    let fix = segmenter::segment_source(fixed, &config);
    let fix_labels = labeler::label_fixed(&fix).expect("non-empty");
    println!("\nfixed side:");
    for (step, label) in fix.steps.iter().zip(&fix_labels) {
        println!("  [{}] {}", label.as_bit(), step.text.replace('\n', " / "));
    }
}
