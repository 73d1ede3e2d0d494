//! Decomposes raw source code into logical steps.
//!
//! Pipeline order: [`split_steps`] on the separator, [`filter_noop`] to drop
//! empty/whitespace/comment-only blocks, [`merge_steps`] for suffix/prefix
//! boundary fragments, and [`refine_boundaries`] to rejoin blocks split in
//! the middle of an unbalanced bracket region.

use std::fs;
use std::path::Path;

use regex::Regex;
use thiserror::Error;

use crate::corpus::{Step, StepLabel, Trajectory};

#[derive(Debug, Error)]
pub enum SegmenterError {
    #[error("invalid pattern {pattern:?}: {source}")]
    BadPattern {
        pattern: String,
        #[source]
        source: regex::Error,
    },
    #[error("separator must be non-empty")]
    EmptySeparator,
    #[error("io error reading pattern file: {0}")]
    Io(#[from] std::io::Error),
}

/// A step-matching pattern: exact text or an anchored regular expression.
///
/// Both forms match against the whole trimmed step text, so a merged
/// multi-block step no longer matches and merging is idempotent.
#[derive(Debug, Clone)]
pub enum Pattern {
    Exact(String),
    Regex(Regex),
}

impl Pattern {
    /// Parses one pattern-file line: prefix `re:` marks a regex, anything
    /// else is an exact match.
    pub fn parse(line: &str) -> Result<Self, SegmenterError> {
        if let Some(raw) = line.strip_prefix("re:") {
            let anchored = format!("^(?:{raw})$");
            let regex = Regex::new(&anchored).map_err(|source| SegmenterError::BadPattern {
                pattern: raw.to_string(),
                source,
            })?;
            Ok(Self::Regex(regex))
        } else {
            Ok(Self::Exact(line.to_string()))
        }
    }

    pub fn matches(&self, step_text: &str) -> bool {
        let trimmed = step_text.trim();
        match self {
            Self::Exact(text) => trimmed == text,
            Self::Regex(regex) => regex.is_match(trimmed),
        }
    }
}

/// An ordered list of patterns; a step matches the set if it matches any.
#[derive(Debug, Clone, Default)]
pub struct PatternSet {
    patterns: Vec<Pattern>,
}

impl PatternSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self, SegmenterError> {
        let patterns = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(Pattern::parse)
            .collect::<Result<_, _>>()?;
        Ok(Self { patterns })
    }

    /// Loads a pattern set from a plain-text file, one pattern per line.
    pub fn from_file(path: &Path) -> Result<Self, SegmenterError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn matches(&self, step_text: &str) -> bool {
        self.patterns.iter().any(|p| p.matches(step_text))
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }
}

const DEFAULT_SEPARATOR: &str = "\n\n";
const DEFAULT_NOOP: &str = include_str!("../data/noop_patterns.txt");
const DEFAULT_PREV: &str = include_str!("../data/prev_patterns.txt");
const DEFAULT_NEXT: &str = include_str!("../data/next_patterns.txt");

/// Segmentation configuration: separator, no-op filter, and merge patterns.
#[derive(Debug, Clone)]
pub struct SegmenterConfig {
    pub separator: String,
    pub noop_patterns: PatternSet,
    pub prev_patterns: PatternSet,
    pub next_patterns: PatternSet,
    pub refine_boundaries: bool,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        Self {
            separator: DEFAULT_SEPARATOR.to_string(),
            noop_patterns: PatternSet::parse(DEFAULT_NOOP).expect("builtin noop patterns"),
            prev_patterns: PatternSet::parse(DEFAULT_PREV).expect("builtin prev patterns"),
            next_patterns: PatternSet::parse(DEFAULT_NEXT).expect("builtin next patterns"),
            refine_boundaries: true,
        }
    }
}

impl SegmenterConfig {
    pub fn validate(&self) -> Result<(), SegmenterError> {
        if self.separator.is_empty() {
            return Err(SegmenterError::EmptySeparator);
        }
        Ok(())
    }
}

/// Splits source into the maximal substrings between separator occurrences.
///
/// Adjacent separators yield empty fragments, which are dropped here; no
/// returned step contains the separator.
pub fn split_steps(source: &str, config: &SegmenterConfig) -> Vec<Step> {
    source
        .split(&config.separator)
        .filter(|fragment| !fragment.is_empty())
        .enumerate()
        .map(|(index, text)| Step::new(text, index))
        .collect()
}

/// Removes steps matching a no-op pattern, re-indexing the survivors.
pub fn filter_noop(steps: Vec<Step>, config: &SegmenterConfig) -> Vec<Step> {
    steps
        .into_iter()
        .filter(|step| !config.noop_patterns.matches(&step.text))
        .enumerate()
        .map(|(index, step)| Step::new(step.text, index))
        .collect()
}

/// Merges boundary fragments with their neighbors when labels agree.
///
/// Two left-to-right passes: the suffix pass first (a step matching a suffix
/// pattern is appended to its predecessor), then the prefix pass (a step
/// matching a prefix pattern is prepended to its successor). The merged step
/// keeps the shared label; the separator is retained between the joined
/// texts so character statistics stay comparable.
pub fn merge_steps(
    steps: Vec<(Step, StepLabel)>,
    config: &SegmenterConfig,
) -> Vec<(Step, StepLabel)> {
    let after_suffix = suffix_pass(steps, config);
    let after_prefix = prefix_pass(after_suffix, config);
    reindex_labeled(after_prefix)
}

fn suffix_pass(steps: Vec<(Step, StepLabel)>, config: &SegmenterConfig) -> Vec<(Step, StepLabel)> {
    if config.prev_patterns.is_empty() {
        return steps;
    }
    let mut out: Vec<(Step, StepLabel)> = Vec::with_capacity(steps.len());
    for (step, label) in steps {
        match out.last_mut() {
            Some((prev, prev_label))
                if *prev_label == label && config.prev_patterns.matches(&step.text) =>
            {
                prev.text.push_str(&config.separator);
                prev.text.push_str(&step.text);
            }
            _ => out.push((step, label)),
        }
    }
    out
}

fn prefix_pass(steps: Vec<(Step, StepLabel)>, config: &SegmenterConfig) -> Vec<(Step, StepLabel)> {
    if config.next_patterns.is_empty() {
        return steps;
    }
    let mut out: Vec<(Step, StepLabel)> = Vec::with_capacity(steps.len());
    let mut iter = steps.into_iter().peekable();
    while let Some((step, label)) = iter.next() {
        let merge_forward = matches!(
            iter.peek(),
            Some((_, next_label))
                if *next_label == label && config.next_patterns.matches(&step.text)
        );
        if merge_forward {
            let (mut next, next_label) = iter.next().expect("peeked");
            next.text = format!("{}{}{}", step.text, config.separator, next.text);
            // The merged step may itself match a prefix pattern only if a
            // pattern spans the separator, which anchored matching forbids.
            out.push((next, next_label));
        } else {
            out.push((step, label));
        }
    }
    out
}

fn reindex_labeled(steps: Vec<(Step, StepLabel)>) -> Vec<(Step, StepLabel)> {
    steps
        .into_iter()
        .enumerate()
        .map(|(index, (step, label))| (Step::new(step.text, index), label))
        .collect()
}

/// Output of [`refine_boundaries`]: refined steps plus an optional warning
/// when an imbalance ran to the end of the trajectory.
#[derive(Debug, Clone)]
pub struct RefinedSteps {
    pub steps: Vec<Step>,
    pub warning: Option<String>,
}

/// Merges steps with unbalanced bracket/brace/parenthesis depth with the
/// following steps until depth returns to zero.
///
/// Brackets inside string/char literals and comments are ignored by the
/// lexical scan; scanner state (an open block comment or string) carries
/// across step boundaries. Already-balanced steps are untouched. An
/// imbalance that never closes merges the trailing steps into one final
/// step and attaches a warning rather than failing.
pub fn refine_boundaries(steps: Vec<Step>, config: &SegmenterConfig) -> RefinedSteps {
    let mut out: Vec<Step> = Vec::with_capacity(steps.len());
    let mut scanner = LexState::Normal;
    let mut group: Option<String> = None;
    let mut depth: i64 = 0;

    for step in steps {
        let delta = bracket_delta(&step.text, &mut scanner);
        match group.as_mut() {
            Some(text) => {
                text.push_str(&config.separator);
                text.push_str(&step.text);
            }
            None => group = Some(step.text),
        }
        depth += delta;
        if depth == 0 {
            let index = out.len();
            out.push(Step::new(group.take().expect("open group"), index));
        }
    }

    let mut warning = None;
    if let Some(text) = group {
        warning = Some(format!(
            "unterminated bracket imbalance (depth {depth}) at end of trajectory; \
             trailing steps merged"
        ));
        let index = out.len();
        out.push(Step::new(text, index));
    }
    RefinedSteps {
        steps: out,
        warning,
    }
}

/// Convenience wrapper: split, filter, and optionally refine an unlabeled
/// source into a trajectory.
pub fn segment_source(source: &str, config: &SegmenterConfig) -> Trajectory {
    let steps = filter_noop(split_steps(source, config), config);
    let steps = if config.refine_boundaries {
        refine_boundaries(steps, config).steps
    } else {
        steps
    };
    Trajectory {
        steps,
        labels: None,
        global_label: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LexState {
    Normal,
    LineComment,
    BlockComment,
    Str { escaped: bool },
    Char { escaped: bool },
}

/// Net bracket depth change of `text`, skipping literals and comments.
fn bracket_delta(text: &str, state: &mut LexState) -> i64 {
    let mut delta = 0i64;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match *state {
            LexState::Normal => match c {
                '(' | '[' | '{' => delta += 1,
                ')' | ']' | '}' => delta -= 1,
                '"' => *state = LexState::Str { escaped: false },
                '\'' => *state = LexState::Char { escaped: false },
                '/' => match chars.peek() {
                    Some('/') => {
                        chars.next();
                        *state = LexState::LineComment;
                    }
                    Some('*') => {
                        chars.next();
                        *state = LexState::BlockComment;
                    }
                    _ => {}
                },
                _ => {}
            },
            LexState::LineComment => {
                if c == '\n' {
                    *state = LexState::Normal;
                }
            }
            LexState::BlockComment => {
                if c == '*' && chars.peek() == Some(&'/') {
                    chars.next();
                    *state = LexState::Normal;
                }
            }
            LexState::Str { escaped } => {
                *state = match (escaped, c) {
                    (true, _) => LexState::Str { escaped: false },
                    (false, '\\') => LexState::Str { escaped: true },
                    (false, '"') => LexState::Normal,
                    (false, _) => LexState::Str { escaped: false },
                };
            }
            LexState::Char { escaped } => {
                *state = match (escaped, c) {
                    (true, _) => LexState::Char { escaped: false },
                    (false, '\\') => LexState::Char { escaped: true },
                    (false, '\'') => LexState::Normal,
                    (false, _) => LexState::Char { escaped: false },
                };
            }
        }
    }
    // A line comment never spans steps.
    if *state == LexState::LineComment {
        *state = LexState::Normal;
    }
    delta
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(steps: &[Step]) -> Vec<&str> {
        steps.iter().map(|s| s.text.as_str()).collect()
    }

    #[test]
    fn split_on_one_separator() {
        let cfg = SegmenterConfig::default();
        assert_eq!(texts(&split_steps("a=1\n\nb=2", &cfg)), vec!["a=1", "b=2"]);
    }

    #[test]
    fn split_without_separator() {
        let cfg = SegmenterConfig::default();
        assert_eq!(texts(&split_steps("a=1", &cfg)), vec!["a=1"]);
    }

    #[test]
    fn adjacent_separators_drop_empty_fragment() {
        let cfg = SegmenterConfig::default();
        assert_eq!(texts(&split_steps("a\n\n\n\nb", &cfg)), vec!["a", "b"]);
    }

    #[test]
    fn empty_source_yields_empty_list() {
        let cfg = SegmenterConfig::default();
        assert!(split_steps("", &cfg).is_empty());
    }

    #[test]
    fn filter_removes_empty_and_whitespace() {
        let cfg = SegmenterConfig::default();
        let steps = vec![Step::new("", 0), Step::new("  \t ", 1), Step::new("x=1", 2)];
        let out = filter_noop(steps, &cfg);
        assert_eq!(texts(&out), vec!["x=1"]);
        assert_eq!(out[0].index, 0);
    }

    #[test]
    fn filter_removes_comment_only_block() {
        let cfg = SegmenterConfig::default();
        assert!(filter_noop(vec![Step::new("// header only", 0)], &cfg).is_empty());
        assert!(filter_noop(vec![Step::new("/* block */", 0)], &cfg).is_empty());
        assert!(filter_noop(vec![Step::new("/**/", 0)], &cfg).is_empty());
        assert!(filter_noop(vec![Step::new("# py comment\n# more", 0)], &cfg).is_empty());
    }

    #[test]
    fn filter_keeps_mixed_comment_and_code() {
        let cfg = SegmenterConfig::default();
        let out = filter_noop(vec![Step::new("/* a */\nx=1", 0)], &cfg);
        assert_eq!(texts(&out), vec!["/* a */\nx=1"]);
    }

    #[test]
    fn suffix_merge_on_equal_labels() {
        let cfg = SegmenterConfig::default();
        let steps = vec![
            (Step::new("foo();", 0), StepLabel::Secure),
            (Step::new("return 0;", 1), StepLabel::Secure),
        ];
        let out = merge_steps(steps, &cfg);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].0.text, "foo();\n\nreturn 0;");
        assert_eq!(out[0].1, StepLabel::Secure);
    }

    #[test]
    fn suffix_merge_blocked_by_label_mismatch() {
        let cfg = SegmenterConfig::default();
        let steps = vec![
            (Step::new("foo();", 0), StepLabel::Secure),
            (Step::new("return 0;", 1), StepLabel::Vulnerable),
        ];
        let out = merge_steps(steps.clone(), &cfg);
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].0.text, "foo();");
        assert_eq!(out[1].0.text, "return 0;");
    }

    #[test]
    fn prefix_merge_of_declaration() {
        let cfg = SegmenterConfig::default();
        let steps = vec![
            (Step::new("register ssize_t i;", 0), StepLabel::Secure),
            (Step::new("i=0;", 1), StepLabel::Secure),
        ];
        let out = merge_steps(steps, &cfg);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].0.text, "register ssize_t i;\n\ni=0;");
    }

    #[test]
    fn merge_is_idempotent() {
        let cfg = SegmenterConfig::default();
        let steps = vec![
            (Step::new("#include <stdio.h>", 0), StepLabel::Secure),
            (Step::new("int x;", 1), StepLabel::Secure),
            (Step::new("foo();", 2), StepLabel::Secure),
            (Step::new("return 0;", 3), StepLabel::Secure),
            (Step::new("bar();", 4), StepLabel::Vulnerable),
        ];
        let once = merge_steps(steps, &cfg);
        let twice = merge_steps(once.clone(), &cfg);
        assert_eq!(once, twice);
    }

    #[test]
    fn refine_merges_unbalanced_block() {
        let cfg = SegmenterConfig::default();
        let steps = vec![
            Step::new("if (x) {", 0),
            Step::new("y();", 1),
            Step::new("}", 2),
        ];
        let out = refine_boundaries(steps, &cfg);
        assert_eq!(texts(&out.steps), vec!["if (x) {\n\ny();\n\n}"]);
        assert!(out.warning.is_none());
    }

    #[test]
    fn refine_leaves_balanced_steps_alone() {
        let cfg = SegmenterConfig::default();
        let steps = vec![Step::new("a=1;", 0), Step::new("b=2;", 1)];
        let out = refine_boundaries(steps, &cfg);
        assert_eq!(texts(&out.steps), vec!["a=1;", "b=2;"]);
        assert!(out.warning.is_none());
    }

    #[test]
    fn refine_ignores_brackets_in_string_literal() {
        let cfg = SegmenterConfig::default();
        let steps = vec![Step::new("s = \"}{\";", 0)];
        let out = refine_boundaries(steps, &cfg);
        assert_eq!(texts(&out.steps), vec!["s = \"}{\";"]);
        assert!(out.warning.is_none());
    }

    #[test]
    fn refine_ignores_brackets_in_comments() {
        let cfg = SegmenterConfig::default();
        let steps = vec![
            Step::new("// open { only", 0),
            Step::new("/* ( [ */ x=1;", 1),
        ];
        let out = refine_boundaries(steps, &cfg);
        assert_eq!(out.steps.len(), 2);
        assert!(out.warning.is_none());
    }

    #[test]
    fn refine_unterminated_imbalance_warns() {
        let cfg = SegmenterConfig::default();
        let steps = vec![Step::new("if (x) {", 0), Step::new("y();", 1)];
        let out = refine_boundaries(steps, &cfg);
        assert_eq!(out.steps.len(), 1);
        assert!(out.warning.is_some());
    }

    #[test]
    fn pattern_file_prefix_marks_regex() {
        let set = PatternSet::parse("re:^ret\\w+;$\nbreak;").unwrap();
        assert!(set.matches("return;"));
        assert!(set.matches("  break;  "));
        assert!(!set.matches("breaks;"));
    }

    #[test]
    fn rejoin_reproduces_source() {
        let cfg = SegmenterConfig::default();
        let source = "a=1;\n\nb=2;\n\nc=3;";
        let steps = split_steps(source, &cfg);
        let joined = texts(&steps).join(&cfg.separator);
        assert_eq!(joined, source);
    }
}
