//! Shared domain types and the newline-delimited corpus serialization.
//!
//! A corpus file is UTF-8, one JSON object per line with fields
//! `prompt`, `completions`, `labels`. Unknown fields are preserved opaquely
//! on read and re-emitted on write so dataset-specific metadata (CWE id,
//! commit id) survives a round-trip.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while reading, writing, or constructing corpus types.
#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: malformed record: {source}")]
    Malformed {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("record {index}: completions length {completions} != labels length {labels}")]
    LengthMismatch {
        index: usize,
        completions: usize,
        labels: usize,
    },
    #[error("record {index}: label value {value} not in {{0, 1}}")]
    BadLabel { index: usize, value: i64 },
    #[error("trajectory has no steps")]
    EmptyTrajectory,
    #[error("trajectory has {steps} steps but {labels} labels")]
    LabelCount { steps: usize, labels: usize },
    #[error("candidate pool is empty")]
    EmptyPool,
    #[error("ground vector length {got} != pool size {expected}")]
    GroundLength { got: usize, expected: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Binary step-level security label: 0 = vulnerable, 1 = secure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepLabel {
    Vulnerable,
    Secure,
}

impl StepLabel {
    pub fn from_bit(value: i64) -> Option<Self> {
        match value {
            0 => Some(Self::Vulnerable),
            1 => Some(Self::Secure),
            _ => None,
        }
    }

    pub fn as_bit(self) -> u8 {
        match self {
            Self::Vulnerable => 0,
            Self::Secure => 1,
        }
    }

    pub fn is_secure(self) -> bool {
        matches!(self, Self::Secure)
    }
}

impl Serialize for StepLabel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u8(self.as_bit())
    }
}

impl<'de> Deserialize<'de> for StepLabel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = i64::deserialize(deserializer)?;
        StepLabel::from_bit(value)
            .ok_or_else(|| serde::de::Error::custom(format!("label value {value} not in {{0, 1}}")))
    }
}

/// One logical block of code within a trajectory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    /// Source text; may contain internal single newlines.
    pub text: String,
    /// 0-based position in the owning trajectory.
    pub index: usize,
}

impl Step {
    pub fn new(text: impl Into<String>, index: usize) -> Self {
        Self {
            text: text.into(),
            index,
        }
    }
}

/// An ordered sequence of code/reasoning steps, optionally labeled.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    pub labels: Option<Vec<StepLabel>>,
    pub global_label: Option<StepLabel>,
}

impl Trajectory {
    /// Builds a trajectory, checking `|labels| = |steps|` when labels are given.
    pub fn new(
        steps: Vec<Step>,
        labels: Option<Vec<StepLabel>>,
        global_label: Option<StepLabel>,
    ) -> Result<Self, CorpusError> {
        if let Some(labels) = &labels {
            if labels.len() != steps.len() {
                return Err(CorpusError::LabelCount {
                    steps: steps.len(),
                    labels: labels.len(),
                });
            }
        }
        Ok(Self {
            steps,
            labels,
            global_label,
        })
    }

    /// Builds a trajectory from step texts, re-indexing in order.
    pub fn from_texts<I, S>(texts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let steps = texts
            .into_iter()
            .enumerate()
            .map(|(i, t)| Step::new(t, i))
            .collect();
        Self {
            steps,
            labels: None,
            global_label: None,
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// A prompt with step-wise completions and their label vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub prompt: String,
    pub completions: Vec<String>,
    pub labels: Vec<StepLabel>,
    /// Dataset-specific metadata carried through unchanged.
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl DatasetRecord {
    pub fn new(
        prompt: impl Into<String>,
        completions: Vec<String>,
        labels: Vec<StepLabel>,
    ) -> Self {
        Self {
            prompt: prompt.into(),
            completions,
            labels,
            extra: serde_json::Map::new(),
        }
    }

    /// Labeled trajectory view of this record.
    pub fn to_trajectory(&self) -> Trajectory {
        let steps = self
            .completions
            .iter()
            .enumerate()
            .map(|(i, t)| Step::new(t.clone(), i))
            .collect();
        let global = if self.labels.iter().any(|l| !l.is_secure()) {
            StepLabel::Vulnerable
        } else {
            StepLabel::Secure
        };
        Trajectory {
            steps,
            labels: Some(self.labels.clone()),
            global_label: Some(global),
        }
    }
}

/// A vulnerable trajectory paired with its fixed counterpart.
#[derive(Debug, Clone)]
pub struct PairedSample {
    pub vulnerable: Trajectory,
    pub fixed: Trajectory,
    pub cwe: Option<String>,
}

/// On-disk form of a paired sample, before segmentation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedRecord {
    pub vulnerable_code: String,
    pub fixed_code: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cwe: Option<String>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

/// K candidate trajectories for one prompt, the best-of-N unit.
#[derive(Debug, Clone)]
pub struct CandidatePool {
    pub prompt: String,
    pub candidates: Vec<Trajectory>,
    pub ground_secure: Option<Vec<bool>>,
    pub ground_functional: Option<Vec<bool>>,
}

impl CandidatePool {
    pub fn new(
        prompt: impl Into<String>,
        candidates: Vec<Trajectory>,
        ground_secure: Option<Vec<bool>>,
        ground_functional: Option<Vec<bool>>,
    ) -> Result<Self, CorpusError> {
        if candidates.is_empty() {
            return Err(CorpusError::EmptyPool);
        }
        let k = candidates.len();
        for ground in [&ground_secure, &ground_functional].into_iter().flatten() {
            if ground.len() != k {
                return Err(CorpusError::GroundLength {
                    got: ground.len(),
                    expected: k,
                });
            }
        }
        Ok(Self {
            prompt: prompt.into(),
            candidates,
            ground_secure,
            ground_functional,
        })
    }

    pub fn size(&self) -> usize {
        self.candidates.len()
    }
}

/// On-disk form of a candidate pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolRecord {
    pub pool_id: String,
    pub prompt: String,
    pub candidates: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secure: Option<Vec<StepLabel>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<Vec<StepLabel>>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

/// Reads newline-delimited records, preserving line order.
///
/// Fails with the 1-based line number on malformed JSON and with the 0-based
/// record index when `|completions| != |labels|`.
pub fn read_records<R: BufRead>(reader: R) -> Result<Vec<DatasetRecord>, CorpusError> {
    let mut records = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: DatasetRecord =
            serde_json::from_str(&line).map_err(|source| CorpusError::Malformed {
                line: lineno + 1,
                source,
            })?;
        if record.completions.len() != record.labels.len() {
            return Err(CorpusError::LengthMismatch {
                index: records.len(),
                completions: record.completions.len(),
                labels: record.labels.len(),
            });
        }
        records.push(record);
    }
    Ok(records)
}

/// Writes records one JSON object per line, each line newline-terminated.
pub fn write_records<W: Write>(
    writer: &mut W,
    records: &[DatasetRecord],
) -> Result<(), CorpusError> {
    for record in records {
        serde_json::to_writer(&mut *writer, record)
            .map_err(|e| CorpusError::Io(std::io::Error::other(e)))?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads newline-delimited paired samples (`vulnerable_code`, `fixed_code`, `cwe`).
pub fn read_paired<R: BufRead>(reader: R) -> Result<Vec<PairedRecord>, CorpusError> {
    read_jsonl(reader)
}

/// Reads newline-delimited candidate pools.
pub fn read_pools<R: BufRead>(reader: R) -> Result<Vec<PoolRecord>, CorpusError> {
    read_jsonl(reader)
}

fn read_jsonl<R: BufRead, T: serde::de::DeserializeOwned>(
    reader: R,
) -> Result<Vec<T>, CorpusError> {
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|source| CorpusError::Malformed {
            line: lineno + 1,
            source,
        })?;
        out.push(record);
    }
    Ok(out)
}

impl PoolRecord {
    /// Converts the on-disk form into a segment-per-candidate pool using the
    /// provided segmentation function.
    pub fn to_pool<F>(&self, segment: F) -> Result<CandidatePool, CorpusError>
    where
        F: Fn(&str) -> Trajectory,
    {
        let candidates = self.candidates.iter().map(|c| segment(c)).collect();
        CandidatePool::new(
            self.prompt.clone(),
            candidates,
            self.secure
                .as_ref()
                .map(|v| v.iter().map(|l| l.is_secure()).collect()),
            self.functional
                .as_ref()
                .map(|v| v.iter().map(|l| l.is_secure()).collect()),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn read_single_record() {
        let line = r#"{"prompt":"p","completions":["a","b"],"labels":[1,0]}"#;
        let records = read_records(line.as_bytes()).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].prompt, "p");
        assert_eq!(records[0].completions, vec!["a", "b"]);
        assert_eq!(
            records[0].labels,
            vec![StepLabel::Secure, StepLabel::Vulnerable]
        );
    }

    #[test]
    fn empty_stream_yields_empty_list() {
        assert!(read_records(&b""[..]).unwrap().is_empty());
    }

    #[test]
    fn length_mismatch_rejected_with_index() {
        let line = r#"{"prompt":"p","completions":["a","b"],"labels":[1,0,1]}"#;
        let err = read_records(line.as_bytes()).unwrap_err();
        match err {
            CorpusError::LengthMismatch {
                index,
                completions,
                labels,
            } => {
                assert_eq!(index, 0);
                assert_eq!(completions, 2);
                assert_eq!(labels, 3);
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn bad_label_value_rejected() {
        let line = r#"{"prompt":"p","completions":["a"],"labels":[2]}"#;
        let err = read_records(line.as_bytes()).unwrap_err();
        assert!(matches!(err, CorpusError::Malformed { line: 1, .. }));
    }

    #[test]
    fn malformed_line_carries_line_number() {
        let text = "{\"prompt\":\"p\",\"completions\":[\"a\"],\"labels\":[1]}\nnot json\n";
        let err = read_records(text.as_bytes()).unwrap_err();
        assert!(matches!(err, CorpusError::Malformed { line: 2, .. }));
    }

    #[test]
    fn write_then_read_preserves_extra_fields() {
        let mut record = DatasetRecord::new("p", vec!["a".into()], vec![StepLabel::Secure]);
        record
            .extra
            .insert("cwe".into(), serde_json::json!("CWE-125"));
        let mut buf = Vec::new();
        write_records(&mut buf, &[record.clone()]).unwrap();
        assert!(buf.ends_with(b"\n"));
        let back = read_records(&buf[..]).unwrap();
        assert_eq!(back, vec![record]);
    }

    #[test]
    fn empty_record_list_writes_empty_stream() {
        let mut buf = Vec::new();
        write_records(&mut buf, &[]).unwrap();
        assert!(buf.is_empty());
    }

    #[test]
    fn trajectory_label_count_checked() {
        let steps = vec![Step::new("a", 0)];
        let err = Trajectory::new(steps, Some(vec![]), None).unwrap_err();
        assert!(matches!(err, CorpusError::LabelCount { .. }));
    }

    #[test]
    fn pool_ground_vector_length_checked() {
        let t = Trajectory::from_texts(["a"]);
        let err = CandidatePool::new("p", vec![t], Some(vec![true, false]), None).unwrap_err();
        assert!(matches!(err, CorpusError::GroundLength { .. }));
    }
}
