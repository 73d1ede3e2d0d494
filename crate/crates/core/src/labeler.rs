//! Derives step-level security labels from paired vulnerable/fixed code.
//!
//! Line-level sequence alignment (Gestalt-style longest-matching-block
//! recursion) yields the set of changed lines; a step is labeled vulnerable
//! iff it contains at least one changed line. Vulnerability is then
//! propagated through the transitive closure of caller functions extracted
//! from a lexical call graph. Unpaired data falls back to uniform labels
//! from the example-level label.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use regex::Regex;
use thiserror::Error;

use crate::corpus::{StepLabel, Trajectory};

#[derive(Debug, Error)]
pub enum LabelerError {
    #[error("source must be non-empty")]
    EmptySource,
    #[error("trajectory must be non-empty")]
    EmptyTrajectory,
    #[error("diff line {line:?} not found in any step")]
    InconsistentDiff { line: String },
    #[error("unknown function identifier {name:?}")]
    UnknownFunction { name: String },
    #[error("trajectory has no global label")]
    MissingGlobalLabel,
}

/// A line of the vulnerable source that falls outside the common
/// subsequence with the fixed source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChangedLine {
    /// 0-based line index into the vulnerable source.
    pub index: usize,
    /// Line text with trailing whitespace stripped.
    pub text: String,
}

/// The set of identified differences between a vulnerable function and its
/// fixed counterpart.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiffSet {
    pub changed_lines: Vec<ChangedLine>,
}

impl DiffSet {
    pub fn is_empty(&self) -> bool {
        self.changed_lines.is_empty()
    }
}

/// Directed function-call relation: edges run caller -> callee.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CallGraph {
    pub functions: BTreeSet<String>,
    pub edges: BTreeSet<(String, String)>,
}

/// A detected function definition with its body's line extent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionSpan {
    pub name: String,
    /// 0-based line of the definition header.
    pub start_line: usize,
    /// One past the last body line.
    pub end_line: usize,
}

impl FunctionSpan {
    pub fn contains_line(&self, line: usize) -> bool {
        (self.start_line..self.end_line).contains(&line)
    }
}

fn normalized_lines(source: &str) -> Vec<String> {
    source.lines().map(|l| l.trim_end().to_string()).collect()
}

/// Longest matching block between `a[alo..ahi]` and `b[blo..bhi]`, ties
/// broken by the earliest start in `a`.
fn longest_match(
    a: &[String],
    b2j: &HashMap<&str, Vec<usize>>,
    alo: usize,
    ahi: usize,
    blo: usize,
    bhi: usize,
) -> (usize, usize, usize) {
    let (mut besti, mut bestj, mut bestsize) = (alo, blo, 0usize);
    let mut j2len: HashMap<usize, usize> = HashMap::new();
    for (i, line) in a.iter().enumerate().take(ahi).skip(alo) {
        let mut new_j2len: HashMap<usize, usize> = HashMap::new();
        if let Some(positions) = b2j.get(line.as_str()) {
            for &j in positions {
                if j < blo {
                    continue;
                }
                if j >= bhi {
                    break;
                }
                let k = if j == 0 {
                    1
                } else {
                    j2len.get(&(j - 1)).copied().unwrap_or(0) + 1
                };
                new_j2len.insert(j, k);
                if k > bestsize {
                    besti = i + 1 - k;
                    bestj = j + 1 - k;
                    bestsize = k;
                }
            }
        }
        j2len = new_j2len;
    }
    (besti, bestj, bestsize)
}

/// All matching blocks `(a_start, b_start, size)` via recursive splitting
/// around the longest match, in ascending `a` order.
fn matching_blocks(a: &[String], b: &[String]) -> Vec<(usize, usize, usize)> {
    let mut b2j: HashMap<&str, Vec<usize>> = HashMap::new();
    for (j, line) in b.iter().enumerate() {
        b2j.entry(line.as_str()).or_default().push(j);
    }
    let mut queue = VecDeque::from([(0usize, a.len(), 0usize, b.len())]);
    let mut blocks = Vec::new();
    while let Some((alo, ahi, blo, bhi)) = queue.pop_front() {
        let (i, j, k) = longest_match(a, &b2j, alo, ahi, blo, bhi);
        if k > 0 {
            blocks.push((i, j, k));
            if alo < i && blo < j {
                queue.push_back((alo, i, blo, j));
            }
            if i + k < ahi && j + k < bhi {
                queue.push_back((i + k, ahi, j + k, bhi));
            }
        }
    }
    blocks.sort_unstable();
    blocks
}

/// Lines of the vulnerable source outside the longest common subsequence
/// with the fixed source.
///
/// Trailing whitespace is stripped before alignment so cosmetic whitespace
/// churn is not flagged as changed.
pub fn align_diff(vul_source: &str, fix_source: &str) -> Result<DiffSet, LabelerError> {
    if vul_source.is_empty() || fix_source.is_empty() {
        return Err(LabelerError::EmptySource);
    }
    let vul_lines = normalized_lines(vul_source);
    let fix_lines = normalized_lines(fix_source);
    let mut matched = vec![false; vul_lines.len()];
    for (i, _, size) in matching_blocks(&vul_lines, &fix_lines) {
        for flag in matched.iter_mut().skip(i).take(size) {
            *flag = true;
        }
    }
    let changed_lines = vul_lines
        .into_iter()
        .enumerate()
        .filter(|(i, _)| !matched[*i])
        .map(|(index, text)| ChangedLine { index, text })
        .collect();
    Ok(DiffSet { changed_lines })
}

/// Labels each step of the vulnerable trajectory: 0 iff the step contains a
/// changed line, 1 otherwise.
///
/// Membership is by exact line text (trailing whitespace stripped). A
/// changed line absent from every step is an inconsistency error.
pub fn label_vulnerable(vul: &Trajectory, diff: &DiffSet) -> Result<Vec<StepLabel>, LabelerError> {
    if vul.is_empty() {
        return Err(LabelerError::EmptyTrajectory);
    }
    let step_lines: Vec<BTreeSet<String>> = vul
        .steps
        .iter()
        .map(|s| s.text.lines().map(|l| l.trim_end().to_string()).collect())
        .collect();
    for changed in &diff.changed_lines {
        if !step_lines.iter().any(|lines| lines.contains(&changed.text)) {
            return Err(LabelerError::InconsistentDiff {
                line: changed.text.clone(),
            });
        }
    }
    Ok(step_lines
        .iter()
        .map(|lines| {
            let hit = diff
                .changed_lines
                .iter()
                .any(|changed| lines.contains(&changed.text));
            if hit {
                StepLabel::Vulnerable
            } else {
                StepLabel::Secure
            }
        })
        .collect())
}

/// Labels every step of the fixed trajectory secure, including
/// patch-introduced steps.
pub fn label_fixed(fix: &Trajectory) -> Result<Vec<StepLabel>, LabelerError> {
    if fix.is_empty() {
        return Err(LabelerError::EmptyTrajectory);
    }
    Ok(vec![StepLabel::Secure; fix.len()])
}

const RESERVED: &[&str] = &[
    "if", "else", "while", "for", "switch", "return", "sizeof", "do", "case", "goto", "catch",
    "defined", "not", "and", "or", "in", "print", "assert", "lambda",
];

fn is_reserved(name: &str) -> bool {
    RESERVED.contains(&name)
}

/// Detects function definitions and their body line spans.
///
/// Best-effort lexical scan over C-like (`name(args) {` headers with brace
/// matching) and Python (`def name(...):` with indentation blocks);
/// undetected constructs simply yield no spans.
pub fn extract_functions(source: &str) -> Vec<FunctionSpan> {
    let mut spans = c_like_functions(source);
    spans.extend(python_functions(source));
    spans.sort_by_key(|s| s.start_line);
    spans
}

fn line_of_offset(offsets: &[usize], byte: usize) -> usize {
    match offsets.binary_search(&byte) {
        Ok(i) => i,
        Err(i) => i - 1,
    }
}

fn line_offsets(source: &str) -> Vec<usize> {
    let mut offsets = vec![0usize];
    for (i, b) in source.bytes().enumerate() {
        if b == b'\n' {
            offsets.push(i + 1);
        }
    }
    offsets
}

fn c_like_functions(source: &str) -> Vec<FunctionSpan> {
    c_like_functions_with_bodies(source)
        .into_iter()
        .map(|(span, _)| span)
        .collect()
}

/// C-like function spans together with the byte range of each body, brace
/// exclusive, so call-site scans never re-read the header.
fn c_like_functions_with_bodies(source: &str) -> Vec<(FunctionSpan, (usize, usize))> {
    let header = Regex::new(r"\b([A-Za-z_]\w*)\s*\(").expect("header regex");
    let offsets = line_offsets(source);
    let bytes = source.as_bytes();
    let mut spans = Vec::new();
    let mut scanned_until = 0usize;

    for caps in header.captures_iter(source) {
        let whole = caps.get(0).expect("match");
        if whole.start() < scanned_until {
            continue; // inside a previously found body
        }
        let name = caps.get(1).expect("name").as_str();
        if is_reserved(name) {
            continue;
        }
        // Find the matching close paren of the parameter list.
        let open = whole.end() - 1;
        let mut depth = 0i32;
        let mut close = None;
        for (i, &b) in bytes.iter().enumerate().skip(open) {
            match b {
                b'(' => depth += 1,
                b')' => {
                    depth -= 1;
                    if depth == 0 {
                        close = Some(i);
                        break;
                    }
                }
                b';' | b'{' => break,
                _ => {}
            }
        }
        let Some(close) = close else { continue };
        // A body brace must follow (whitespace only in between).
        let rest = &source[close + 1..];
        let trimmed = rest.trim_start();
        if !trimmed.starts_with('{') {
            continue;
        }
        let brace = close + 1 + (rest.len() - trimmed.len());
        let Some(end) = matching_brace(source, brace) else {
            let end_line = offsets.len();
            spans.push((
                FunctionSpan {
                    name: name.to_string(),
                    start_line: line_of_offset(&offsets, whole.start()),
                    end_line,
                },
                (brace + 1, source.len()),
            ));
            scanned_until = source.len();
            continue;
        };
        spans.push((
            FunctionSpan {
                name: name.to_string(),
                start_line: line_of_offset(&offsets, whole.start()),
                end_line: line_of_offset(&offsets, end) + 1,
            },
            (brace + 1, end),
        ));
        scanned_until = end + 1;
    }
    spans
}

/// Byte offset of the brace matching the one at `open`, skipping literals
/// and comments.
fn matching_brace(source: &str, open: usize) -> Option<usize> {
    let mut depth = 0i64;
    let mut in_str: Option<char> = None;
    let mut escaped = false;
    let mut in_line_comment = false;
    let mut in_block_comment = false;
    let mut prev = '\0';
    for (i, c) in source[open..].char_indices() {
        let pos = open + i;
        if in_line_comment {
            if c == '\n' {
                in_line_comment = false;
            }
        } else if in_block_comment {
            if prev == '*' && c == '/' {
                in_block_comment = false;
            }
        } else if let Some(quote) = in_str {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == quote {
                in_str = None;
            }
        } else {
            match c {
                '"' | '\'' => in_str = Some(c),
                '/' if prev == '/' => in_line_comment = true,
                '*' if prev == '/' => in_block_comment = true,
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(pos);
                    }
                }
                _ => {}
            }
        }
        prev = c;
    }
    None
}

fn indent_width(line: &str) -> usize {
    line.chars().take_while(|c| *c == ' ' || *c == '\t').count()
}

fn python_functions(source: &str) -> Vec<FunctionSpan> {
    let def = Regex::new(r"^([ \t]*)def\s+([A-Za-z_]\w*)\s*\(").expect("def regex");
    let lines: Vec<&str> = source.lines().collect();
    let mut spans = Vec::new();
    for (lineno, line) in lines.iter().enumerate() {
        let Some(caps) = def.captures(line) else {
            continue;
        };
        let indent = caps.get(1).expect("indent").as_str().len();
        let name = caps.get(2).expect("name").as_str().to_string();
        let mut end = lineno + 1;
        for (i, body_line) in lines.iter().enumerate().skip(lineno + 1) {
            if body_line.trim().is_empty() {
                continue;
            }
            if indent_width(body_line) <= indent {
                break;
            }
            end = i + 1;
        }
        spans.push(FunctionSpan {
            name,
            start_line: lineno,
            end_line: end,
        });
    }
    spans
}

/// Builds the directed call relation from function definitions and the call
/// sites inside their bodies.
pub fn extract_call_graph(source: &str) -> CallGraph {
    let lines: Vec<&str> = source.lines().collect();
    // (caller name, body text) pairs; C-like bodies are byte-delimited so a
    // definition and its calls may share one line, Python bodies are the
    // indented block below the header.
    let mut bodies: Vec<(String, String)> = c_like_functions_with_bodies(source)
        .into_iter()
        .map(|(span, (start, end))| (span.name, source[start..end].to_string()))
        .collect();
    for span in python_functions(source) {
        let body_start = (span.start_line + 1).min(span.end_line);
        bodies.push((span.name, lines[body_start..span.end_line].join("\n")));
    }
    let functions: BTreeSet<String> = bodies.iter().map(|(name, _)| name.clone()).collect();
    let call = Regex::new(r"\b([A-Za-z_]\w*)\s*\(").expect("call regex");
    let mut edges = BTreeSet::new();
    for (caller, body) in &bodies {
        for caps in call.captures_iter(body) {
            let callee = caps.get(1).expect("callee").as_str();
            if functions.contains(callee) {
                edges.insert((caller.clone(), callee.to_string()));
            }
        }
    }
    CallGraph { functions, edges }
}

/// The vulnerable set plus every function that reaches it via caller edges.
pub fn propagate_callers(
    graph: &CallGraph,
    vulnerable: &BTreeSet<String>,
) -> Result<BTreeSet<String>, LabelerError> {
    for name in vulnerable {
        if !graph.functions.contains(name) {
            return Err(LabelerError::UnknownFunction { name: name.clone() });
        }
    }
    // callee -> callers
    let mut callers: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (caller, callee) in &graph.edges {
        callers.entry(callee).or_default().push(caller);
    }
    let mut closure: BTreeSet<String> = vulnerable.clone();
    let mut queue: VecDeque<&str> = vulnerable.iter().map(String::as_str).collect();
    while let Some(current) = queue.pop_front() {
        if let Some(parents) = callers.get(current) {
            for &parent in parents {
                if closure.insert(parent.to_string()) {
                    queue.push_back(parent);
                }
            }
        }
    }
    Ok(closure)
}

/// Functions whose body span covers any of the given source line indices.
pub fn functions_containing_lines(
    spans: &[FunctionSpan],
    lines: impl IntoIterator<Item = usize>,
) -> BTreeSet<String> {
    let lines: Vec<usize> = lines.into_iter().collect();
    spans
        .iter()
        .filter(|span| lines.iter().any(|&l| span.contains_line(l)))
        .map(|span| span.name.clone())
        .collect()
}

/// Relabels as vulnerable every step whose first line lies within the body
/// span of a closure function. Steps outside any function are untouched.
pub fn propagate_labels(
    trajectory: &Trajectory,
    labels: &mut [StepLabel],
    source: &str,
    spans: &[FunctionSpan],
    closure: &BTreeSet<String>,
) {
    let source_lines: Vec<&str> = source.lines().map(|l| l.trim_end()).collect();
    for (step, label) in trajectory.steps.iter().zip(labels.iter_mut()) {
        let Some(first_line) = step.text.lines().next().map(|l| l.trim_end()) else {
            continue;
        };
        let owner = spans.iter().find(|span| {
            source_lines[span.start_line..span.end_line.min(source_lines.len())]
                .contains(&first_line)
        });
        if let Some(span) = owner {
            if closure.contains(&span.name) {
                *label = StepLabel::Vulnerable;
            }
        }
    }
}

/// Uniform fallback for unpaired data: every step takes the global label.
pub fn uniform_fallback(trajectory: &Trajectory) -> Result<Vec<StepLabel>, LabelerError> {
    let global = trajectory
        .global_label
        .ok_or(LabelerError::MissingGlobalLabel)?;
    Ok(vec![global; trajectory.len()])
}
