//! Step-level security scoring toolkit for code trajectories.
//!
//! The pipeline decomposes source code into logical steps, derives per-step
//! security labels from vulnerable/fixed pairs, scores each step with a
//! pluggable scorer, aggregates step rewards into a trajectory-level reward,
//! and evaluates detection and best-of-N selection quality.
//!
//! The main entry points, in pipeline order:
//!
//! - [`segmenter`]: split source into steps, drop no-op blocks, merge
//!   boundary fragments, repair unbalanced brackets.
//! - [`labeler`]: line-level diff alignment against a fixed counterpart,
//!   call-graph extraction, and caller-closure label propagation.
//! - [`scorer`]: per-step two-class logits, the margin reward, and the
//!   weighted step loss; builtin scorers plus a remote HTTP client.
//! - [`aggregator`]: risk-sensitive soft-min and its ablation variants.
//! - [`evaluator`]: thresholded detection, classification and pairwise
//!   metrics, pass@k, best-of-N metrics, and dataset statistics.
//! - [`rank`]: candidate-pool ranking and top-k selection.
//! - [`corpus`]: shared domain types and newline-delimited serialization.

pub mod aggregator;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod evaluator;
pub mod labeler;
pub mod rank;
pub mod scorer;
pub mod segmenter;

pub use corpus::{CandidatePool, DatasetRecord, PairedSample, Step, StepLabel, Trajectory};
