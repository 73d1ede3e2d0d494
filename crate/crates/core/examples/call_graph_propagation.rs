//! Propagates vulnerability through the caller closure.
//!
//! A function whose body contains a changed vulnerable line taints every
//! function that (transitively) calls it; steps inside tainted functions
//! are relabeled vulnerable.
//!
//! Run with: `cargo run --example call_graph_propagation`

use std::collections::BTreeSet;

use stepsec::labeler;

fn main() {
    let source = "\
void copy_input(char *dst, char *src) {
    strcpy(dst, src);
}

void handle_request(char *req) {
    char buf[64];
    copy_input(buf, req);
}

void main_loop(void) {
    handle_request(next());
}

void unrelated(void) {
    audit();
}";

    let spans = labeler::extract_functions(source);
    println!("functions:");
    for span in &spans {
        println!(
            "  {} (lines {}..{})",
            span.name, span.start_line, span.end_line
        );
    }

    let graph = labeler::extract_call_graph(source);
    println!("\ncall edges:");
    for (caller, callee) in &graph.edges {
        println!("  {caller} -> {callee}");
    }

    // The diff touched the strcpy line inside copy_input.
    let roots = BTreeSet::from(["copy_input".to_string()]);
    let closure = labeler::propagate_callers(&graph, &roots).expect("known root");
    println!("\ntainted closure from copy_input: {closure:?}");
    assert!(closure.contains("main_loop"));
    assert!(!closure.contains("unrelated"));
}
