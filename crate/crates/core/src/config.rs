//! Global configuration file: one JSON object covering every pipeline
//! stage, with per-flag overrides applied on top by the CLI.
//!
//! Unknown keys are rejected with the offending key path.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregator::AggregationConfig;
use crate::evaluator::EvalConfig;
use crate::scorer::ScorerSpec;
use crate::segmenter::{PatternSet, SegmenterConfig, SegmenterError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("io error reading config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config key {path}: {message}")]
    Invalid { path: String, message: String },
    #[error(transparent)]
    Segmenter(#[from] SegmenterError),
}

/// Serialized form of the segmenter settings; pattern lists are referenced
/// as files (one pattern per line, `re:` prefix for regexes) and fall back
/// to the builtin defaults when absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SegmenterSettings {
    pub separator: String,
    pub noop_patterns_file: Option<PathBuf>,
    pub prev_patterns_file: Option<PathBuf>,
    pub next_patterns_file: Option<PathBuf>,
    pub refine_boundaries: bool,
}

impl Default for SegmenterSettings {
    fn default() -> Self {
        Self {
            separator: "\n\n".to_string(),
            noop_patterns_file: None,
            prev_patterns_file: None,
            next_patterns_file: None,
            refine_boundaries: true,
        }
    }
}

impl SegmenterSettings {
    pub fn build(&self) -> Result<SegmenterConfig, ConfigError> {
        let defaults = SegmenterConfig::default();
        let load =
            |file: &Option<PathBuf>, fallback: PatternSet| -> Result<PatternSet, ConfigError> {
                match file {
                    Some(path) => Ok(PatternSet::from_file(path)?),
                    None => Ok(fallback),
                }
            };
        let config = SegmenterConfig {
            separator: self.separator.clone(),
            noop_patterns: load(&self.noop_patterns_file, defaults.noop_patterns)?,
            prev_patterns: load(&self.prev_patterns_file, defaults.prev_patterns)?,
            next_patterns: load(&self.next_patterns_file, defaults.next_patterns)?,
            refine_boundaries: self.refine_boundaries,
        };
        config.validate()?;
        Ok(config)
    }
}

fn default_scorer() -> ScorerSpec {
    ScorerSpec::Oracle
}

/// The whole-pipeline configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GlobalConfig {
    pub segmenter: SegmenterSettings,
    pub scorer: ScorerSpec,
    pub aggregation: AggregationConfig,
    pub eval: EvalConfig,
    /// Named input/output paths for scripted runs.
    pub io: std::collections::BTreeMap<String, PathBuf>,
}

impl Default for GlobalConfig {
    fn default() -> Self {
        Self {
            segmenter: SegmenterSettings::default(),
            scorer: default_scorer(),
            aggregation: AggregationConfig::default(),
            eval: EvalConfig::default(),
            io: Default::default(),
        }
    }
}

impl GlobalConfig {
    /// Parses a config file, reporting unknown keys with their path.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let deserializer = &mut serde_json::Deserializer::from_str(text);
        let config: GlobalConfig =
            serde_path_to_error::deserialize(deserializer).map_err(|e| ConfigError::Invalid {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        config
            .aggregation
            .validate()
            .map_err(|e| ConfigError::Invalid {
                path: "aggregation".to_string(),
                message: e.to_string(),
            })?;
        config.eval.validate().map_err(|e| ConfigError::Invalid {
            path: "eval".to_string(),
            message: e.to_string(),
        })?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_all_defaults() {
        let config = GlobalConfig::from_json("{}").unwrap();
        assert_eq!(config, GlobalConfig::default());
    }

    #[test]
    fn unknown_key_reported_with_path() {
        let err = GlobalConfig::from_json(r#"{"aggregation": {"taw": 2.0}}"#).unwrap_err();
        match err {
            ConfigError::Invalid { path, .. } => assert!(path.contains("taw"), "path: {path}"),
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn nested_values_parse() {
        let config = GlobalConfig::from_json(
            r#"{
                "scorer": {"kind": "constant", "value": 0.25},
                "aggregation": {"method": "min", "tau": 0.5, "sign": 1, "binary_threshold": 0.0},
                "eval": {"detection_threshold": 0.7}
            }"#,
        )
        .unwrap();
        assert_eq!(config.scorer, ScorerSpec::Constant { value: 0.25 });
        assert_eq!(config.aggregation.tau, 0.5);
        assert_eq!(config.eval.detection_threshold, 0.7);
    }

    #[test]
    fn invalid_nested_value_rejected() {
        let err = GlobalConfig::from_json(r#"{"aggregation": {"tau": -1.0}}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { .. }));
    }

    #[test]
    fn builds_segmenter_with_defaults() {
        let config = GlobalConfig::default();
        let segmenter = config.segmenter.build().unwrap();
        assert_eq!(segmenter.separator, "\n\n");
        assert!(!segmenter.noop_patterns.is_empty());
    }
}
