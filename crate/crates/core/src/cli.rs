//! Command-line surface wiring the pipeline end-to-end.
//!
//! Every subcommand is a pure function of its inputs and configuration:
//! re-running produces byte-identical outputs (remote scoring excepted).
//! Exit codes are a fixed contract for harness scripting:
//! 0 ok, 1 validation, 2 I/O, 3 transport.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregator::{self, AggregationMethod};
use crate::config::{ConfigError, GlobalConfig};
use crate::corpus::{
    self, CorpusError, DatasetRecord, PairedRecord, PoolRecord, StepLabel, Trajectory,
};
use crate::evaluator::{self, EvaluatorError, PairPrediction, SuccessFlag};
use crate::labeler::{self, LabelerError};
use crate::rank::{self, RankError};
use crate::scorer::{self, ScorerError, ScorerSpec};
use crate::segmenter::{self, SegmenterConfig, SegmenterError};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_IO: u8 = 2;
pub const EXIT_TRANSPORT: u8 = 3;

/// CLI failure classified by exit code.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
    Transport(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Validation(m) => write!(f, "validation error: {m}"),
            Self::Io(m) => write!(f, "io error: {m}"),
            Self::Transport(m) => write!(f, "transport error: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Validation(_) => EXIT_VALIDATION,
            Self::Io(_) => EXIT_IO,
            Self::Transport(_) => EXIT_TRANSPORT,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Io(_) => Self::Io(e.to_string()),
            _ => Self::Validation(e.to_string()),
        }
    }
}

impl From<SegmenterError> for CliError {
    fn from(e: SegmenterError) -> Self {
        match e {
            SegmenterError::Io(_) => Self::Io(e.to_string()),
            _ => Self::Validation(e.to_string()),
        }
    }
}

impl From<LabelerError> for CliError {
    fn from(e: LabelerError) -> Self {
        Self::Validation(e.to_string())
    }
}

impl From<ScorerError> for CliError {
    fn from(e: ScorerError) -> Self {
        match &e {
            ScorerError::Transport(_) => Self::Transport(e.to_string()),
            ScorerError::Io(_) => Self::Io(e.to_string()),
            ScorerError::Candidate { source, .. } => match source.as_ref() {
                ScorerError::Transport(_) => Self::Transport(e.to_string()),
                _ => Self::Validation(e.to_string()),
            },
            _ => Self::Validation(e.to_string()),
        }
    }
}

impl From<aggregator::AggregationError> for CliError {
    fn from(e: aggregator::AggregationError) -> Self {
        Self::Validation(e.to_string())
    }
}

impl From<EvaluatorError> for CliError {
    fn from(e: EvaluatorError) -> Self {
        Self::Validation(e.to_string())
    }
}

impl From<RankError> for CliError {
    fn from(e: RankError) -> Self {
        match e {
            RankError::Scorer(inner) => inner.into(),
            _ => Self::Validation(e.to_string()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io(_) => Self::Io(e.to_string()),
            _ => Self::Validation(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "stepsec",
    about = "Step-level security scoring pipeline for code trajectories",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Global configuration file (JSON); flags win over config values.
    #[arg(long, global = false)]
    config: Option<PathBuf>,
    /// Input file, newline-delimited record objects.
    #[arg(long)]
    input: PathBuf,
    /// Output file, newline-delimited result objects.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct ScoringArgs {
    /// Scorer kind: oracle, constant:<value>, lexical, lexical:<file>,
    /// or remote:<endpoint>.
    #[arg(long)]
    scorer: Option<String>,
    /// Aggregation method: soft_weighted, soft_weighted_min, min, last,
    /// average, binary, weighted_binary.
    #[arg(long = "agg-method")]
    agg_method: Option<AggregationMethod>,
    /// Softmax temperature.
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<f64>,
    /// Softmax exponent direction, +1 or -1.
    #[arg(long, allow_hyphen_values = true)]
    sign: Option<i8>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Segment raw sources into step-structured records.
    Segment {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Derive step labels from vulnerable/fixed pairs.
    Label {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compute dataset imbalance statistics.
    Stats {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Score each record's steps and aggregate.
    Score {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        scoring: ScoringArgs,
    },
    /// Detect vulnerable examples and report classification metrics.
    Detect {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        scoring: ScoringArgs,
        /// Detection threshold on the [0, 1] probability scale.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Rank candidate pools and select top-k.
    Rank {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        scoring: ScoringArgs,
        /// Selection budget.
        #[arg(long, short, default_value_t = 1)]
        k: usize,
        /// Rank by summed advantage instead of aggregate reward.
        #[arg(long)]
        by_advantage: bool,
    },
    /// Evaluate stored predictions with a named metric set.
    Eval {
        #[command(flatten)]
        common: CommonArgs,
        /// Ground-truth file for the classification metric set.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Metric set: classification, pairwise, pass-at-k
        /// (alias: sr-at-k-sampled).
        #[arg(long)]
        metric: String,
    },
}

/// Parses arguments and runs; returns the process exit code.
pub fn main() -> u8 {
    let cli = Cli::parse();
    run(cli)
}

pub fn run(cli: Cli) -> u8 {
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("stepsec: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Segment { common } => {
            let config = load_config(common.config.as_deref())?;
            cmd_segment(&common.input, &common.output, &config)
        }
        Command::Label { common } => {
            let config = load_config(common.config.as_deref())?;
            cmd_label(&common.input, &common.output, &config)
        }
        Command::Stats { common } => {
            let config = load_config(common.config.as_deref())?;
            cmd_stats(&common.input, &common.output, &config)
        }
        Command::Score { common, scoring } => {
            let mut config = load_config(common.config.as_deref())?;
            apply_scoring_overrides(&mut config, &scoring)?;
            cmd_score(&common.input, &common.output, &config)
        }
        Command::Detect {
            common,
            scoring,
            threshold,
        } => {
            let mut config = load_config(common.config.as_deref())?;
            apply_scoring_overrides(&mut config, &scoring)?;
            if let Some(threshold) = threshold {
                config.eval.detection_threshold = threshold;
            }
            config.eval.validate()?;
            cmd_detect(&common.input, &common.output, &config)
        }
        Command::Rank {
            common,
            scoring,
            k,
            by_advantage,
        } => {
            let mut config = load_config(common.config.as_deref())?;
            apply_scoring_overrides(&mut config, &scoring)?;
            cmd_rank(&common.input, &common.output, &config, k, by_advantage)
        }
        Command::Eval {
            common,
            truth,
            metric,
        } => cmd_eval(&common.input, truth.as_deref(), &common.output, &metric),
    }
}

fn load_config(path: Option<&Path>) -> Result<GlobalConfig, CliError> {
    let mut config = match path {
        Some(path) => GlobalConfig::from_file(path)?,
        None => GlobalConfig::default(),
    };
    apply_env_overrides(&mut config)?;
    Ok(config)
}

/// Environment overrides, prefixed `SCPRM_`; flags still win over these.
fn apply_env_overrides(config: &mut GlobalConfig) -> Result<(), CliError> {
    fn parse<T: std::str::FromStr>(name: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match std::env::var(name) {
            Ok(value) => value
                .parse::<T>()
                .map(Some)
                .map_err(|e| CliError::Validation(format!("{name}={value}: {e}"))),
            Err(_) => Ok(None),
        }
    }
    if let Some(tau) = parse::<f64>("SCPRM_TAU")? {
        config.aggregation.tau = tau;
    }
    if let Some(sign) = parse::<i8>("SCPRM_SIGN")? {
        config.aggregation.sign = sign;
    }
    if let Some(threshold) = parse::<f64>("SCPRM_THRESHOLD")? {
        config.eval.detection_threshold = threshold;
    }
    if let Some(method) = parse::<AggregationMethod>("SCPRM_AGG_METHOD")? {
        config.aggregation.method = method;
    }
    if let Some(spec) = parse::<String>("SCPRM_SCORER")? {
        config.scorer = parse_scorer_flag(&spec)?;
    }
    Ok(())
}

fn parse_scorer_flag(value: &str) -> Result<ScorerSpec, CliError> {
    let (kind, rest) = match value.split_once(':') {
        Some((kind, rest)) => (kind, Some(rest)),
        None => (value, None),
    };
    match (kind, rest) {
        ("oracle", None) => Ok(ScorerSpec::Oracle),
        ("constant", Some(v)) => {
            let value: f64 = v
                .parse()
                .map_err(|e| CliError::Validation(format!("constant scorer value {v:?}: {e}")))?;
            Ok(ScorerSpec::Constant { value })
        }
        ("lexical", None) => Ok(ScorerSpec::Lexical { pattern_file: None }),
        ("lexical", Some(path)) => Ok(ScorerSpec::Lexical {
            pattern_file: Some(PathBuf::from(path)),
        }),
        ("remote", Some(endpoint)) => Ok(ScorerSpec::Remote {
            endpoint: endpoint.to_string(),
            timeout_secs: 30,
            max_in_flight: 4,
            retries: 0,
        }),
        _ => Err(CliError::Validation(format!(
            "unknown scorer {value:?}; expected oracle, constant:<v>, lexical[:<file>], \
             or remote:<endpoint>"
        ))),
    }
}

fn apply_scoring_overrides(
    config: &mut GlobalConfig,
    scoring: &ScoringArgs,
) -> Result<(), CliError> {
    if let Some(spec) = &scoring.scorer {
        config.scorer = parse_scorer_flag(spec)?;
    }
    if let Some(method) = scoring.agg_method {
        config.aggregation.method = method;
    }
    if let Some(tau) = scoring.tau {
        config.aggregation.tau = tau;
    }
    if let Some(sign) = scoring.sign {
        config.aggregation.sign = sign;
    }
    config.aggregation.validate()?;
    Ok(())
}

fn open_input(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn create_output(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_line<W: Write, T: Serialize>(writer: &mut W, value: &T) -> Result<(), CliError> {
    serde_json::to_writer(&mut *writer, value).map_err(|e| CliError::Io(e.to_string()))?;
    writer
        .write_all(b"\n")
        .map_err(|e| CliError::Io(e.to_string()))
}

/// Input line for `segment`: a raw source with an example-level label.
#[derive(Debug, Deserialize)]
struct SourceRecord {
    #[serde(default)]
    prompt: String,
    source: String,
    label: Option<StepLabel>,
    #[serde(flatten)]
    extra: serde_json::Map<String, serde_json::Value>,
}

fn read_source_records(path: &Path) -> Result<Vec<SourceRecord>, CliError> {
    let reader = open_input(path)?;
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CliError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: SourceRecord = serde_json::from_str(&line)
            .map_err(|e| CliError::Validation(format!("line {}: {e}", lineno + 1)))?;
        out.push(record);
    }
    Ok(out)
}

fn cmd_segment(input: &Path, output: &Path, config: &GlobalConfig) -> Result<(), CliError> {
    let segmenter_config = config.segmenter.build()?;
    let sources = read_source_records(input)?;
    let mut records = Vec::with_capacity(sources.len());
    let mut total_steps = 0usize;
    let mut zero_step = 0usize;
    for (index, source) in sources.iter().enumerate() {
        let label = source.label.ok_or_else(|| {
            CliError::Validation(format!("record {index}: missing example-level `label`"))
        })?;
        let trajectory = segmenter::segment_source(&source.source, &segmenter_config);
        if trajectory.is_empty() {
            zero_step += 1;
            eprintln!("warning: record {index} produced zero steps");
        }
        total_steps += trajectory.len();
        let completions: Vec<String> = trajectory.steps.into_iter().map(|s| s.text).collect();
        let labels = vec![label; completions.len()];
        let mut record = DatasetRecord::new(source.prompt.clone(), completions, labels);
        record.extra = source.extra.clone();
        records.push(record);
    }
    let mut writer = create_output(output)?;
    corpus::write_records(&mut writer, &records)?;
    writer.flush().map_err(|e| CliError::Io(e.to_string()))?;
    println!(
        "segmented {} trajectories, {} steps total{}",
        records.len(),
        total_steps,
        if zero_step > 0 {
            format!(" ({zero_step} with zero steps)")
        } else {
            String::new()
        }
    );
    Ok(())
}

/// Segments and labels one side of a paired sample, applying the full
/// labeling pipeline to the vulnerable side.
fn label_pair(
    pair: &PairedRecord,
    index: usize,
    config: &SegmenterConfig,
) -> Result<(DatasetRecord, DatasetRecord), CliError> {
    let map_err = |e: CliError| match e {
        CliError::Validation(m) => CliError::Validation(format!("record {index}: {m}")),
        other => other,
    };

    let segment = |source: &str| -> Vec<crate::corpus::Step> {
        let steps = segmenter::filter_noop(segmenter::split_steps(source, config), config);
        if config.refine_boundaries {
            segmenter::refine_boundaries(steps, config).steps
        } else {
            steps
        }
    };

    let vul_steps = segment(&pair.vulnerable_code);
    let fix_steps = segment(&pair.fixed_code);
    if vul_steps.is_empty() || fix_steps.is_empty() {
        return Err(map_err(CliError::Validation(
            "pair has an empty side after segmentation".to_string(),
        )));
    }
    let vul =
        Trajectory::new(vul_steps, None, Some(StepLabel::Vulnerable)).map_err(CliError::from)?;
    let fix = Trajectory::new(fix_steps, None, Some(StepLabel::Secure)).map_err(CliError::from)?;

    // Alignment, keeping only changed lines that are real code.
    let diff = labeler::align_diff(&pair.vulnerable_code, &pair.fixed_code)
        .map_err(CliError::from)
        .map_err(&map_err)?;
    let diff = labeler::DiffSet {
        changed_lines: diff
            .changed_lines
            .into_iter()
            .filter(|l| !config.noop_patterns.matches(&l.text))
            .collect(),
    };
    let mut vul_labels = labeler::label_vulnerable(&vul, &diff)
        .map_err(CliError::from)
        .map_err(&map_err)?;

    // Caller-closure propagation from the functions touched by the diff.
    let spans = labeler::extract_functions(&pair.vulnerable_code);
    let graph = labeler::extract_call_graph(&pair.vulnerable_code);
    let roots: BTreeSet<String> =
        labeler::functions_containing_lines(&spans, diff.changed_lines.iter().map(|l| l.index));
    if !roots.is_empty() {
        let closure = labeler::propagate_callers(&graph, &roots)
            .map_err(CliError::from)
            .map_err(&map_err)?;
        labeler::propagate_labels(
            &vul,
            &mut vul_labels,
            &pair.vulnerable_code,
            &spans,
            &closure,
        );
    }

    let fix_labels = labeler::label_fixed(&fix)
        .map_err(CliError::from)
        .map_err(&map_err)?;

    // Label first, then merge: the merge condition compares labels.
    let merged_vul =
        segmenter::merge_steps(vul.steps.into_iter().zip(vul_labels).collect(), config);
    let merged_fix =
        segmenter::merge_steps(fix.steps.into_iter().zip(fix_labels).collect(), config);

    let to_record = |merged: Vec<(crate::corpus::Step, StepLabel)>, side: &str| {
        let (completions, labels): (Vec<String>, Vec<StepLabel>) =
            merged.into_iter().map(|(s, l)| (s.text, l)).unzip();
        let mut record = DatasetRecord::new("", completions, labels);
        record.extra = pair.extra.clone();
        if let Some(cwe) = &pair.cwe {
            record
                .extra
                .insert("cwe".to_string(), serde_json::json!(cwe));
        }
        record
            .extra
            .insert("side".to_string(), serde_json::json!(side));
        record
    };
    Ok((
        to_record(merged_vul, "vulnerable"),
        to_record(merged_fix, "fixed"),
    ))
}

fn cmd_label(input: &Path, output: &Path, config: &GlobalConfig) -> Result<(), CliError> {
    let segmenter_config = config.segmenter.build()?;
    let pairs = corpus::read_paired(open_input(input)?)?;
    let results: Vec<Result<(DatasetRecord, DatasetRecord), CliError>> = pairs
        .par_iter()
        .enumerate()
        .map(|(index, pair)| label_pair(pair, index, &segmenter_config))
        .collect();
    let mut records = Vec::with_capacity(pairs.len() * 2);
    for result in results {
        let (vul, fix) = result?;
        records.push(vul);
        records.push(fix);
    }
    let vulnerable_steps: usize = records
        .iter()
        .map(|r| r.labels.iter().filter(|l| !l.is_secure()).count())
        .sum();
    let total_steps: usize = records.iter().map(|r| r.labels.len()).sum();
    let mut writer = create_output(output)?;
    corpus::write_records(&mut writer, &records)?;
    writer.flush().map_err(|e| CliError::Io(e.to_string()))?;
    println!(
        "labeled {} pairs: {} records, {}/{} vulnerable steps",
        pairs.len(),
        records.len(),
        vulnerable_steps,
        total_steps
    );
    Ok(())
}

fn cmd_stats(input: &Path, output: &Path, config: &GlobalConfig) -> Result<(), CliError> {
    let records = corpus::read_records(open_input(input)?)?;
    let stats = evaluator::dataset_stats(&records, &config.eval)?;
    let mut writer = create_output(output)?;
    write_line(&mut writer, &stats)?;
    writer.flush().map_err(|e| CliError::Io(e.to_string()))?;
    println!(
        "{:<14}{:<12}{:<12}{:<12}{:<12}{:<12}",
        "Example V:S", "Token V:S", "Char V:S", "Step V:S", "Step_v", "Step_a"
    );
    println!(
        "{:<14.4}{:<12.4}{:<12.4}{:<12.4}{:<12.4}{:<12.4}",
        stats.example_vs,
        stats.token_vs,
        stats.char_vs,
        stats.step_vs,
        stats.step_v_ratio,
        stats.step_a_ratio
    );
    if stats.length_hack_flag {
        println!("warning: token length ratio suggests length hacking");
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct ScoredRecord {
    rewards: Vec<f64>,
    aggregate: f64,
}

fn score_records(
    records: &[DatasetRecord],
    config: &GlobalConfig,
) -> Result<Vec<ScoredRecord>, CliError> {
    let scorer = scorer::build_scorer(&config.scorer)?;
    let results: Vec<Result<ScoredRecord, CliError>> = records
        .par_iter()
        .map(|record| {
            let trajectory = record.to_trajectory();
            if trajectory.is_empty() {
                return Err(CliError::Validation(
                    "record has zero steps; cannot score".to_string(),
                ));
            }
            let scored = scorer::score_trajectory(&trajectory, scorer.as_ref(), &record.prompt)?;
            let rewards: Vec<f64> = scored.rewards.iter().map(|r| r.value()).collect();
            let aggregate = aggregator::aggregate(&rewards, &config.aggregation)?;
            Ok(ScoredRecord { rewards, aggregate })
        })
        .collect();
    results.into_iter().collect()
}

fn cmd_score(input: &Path, output: &Path, config: &GlobalConfig) -> Result<(), CliError> {
    let records = corpus::read_records(open_input(input)?)?;
    let scored = score_records(&records, config)?;
    let mut writer = create_output(output)?;
    for s in &scored {
        write_line(&mut writer, s)?;
    }
    writer.flush().map_err(|e| CliError::Io(e.to_string()))?;
    let mean = scored.iter().map(|s| s.aggregate).sum::<f64>() / scored.len().max(1) as f64;
    println!(
        "scored {} records, mean aggregate reward {:.4}",
        scored.len(),
        mean
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct DetectionRecord {
    aggregate: f64,
    pred: StepLabel,
    truth: StepLabel,
}

fn cmd_detect(input: &Path, output: &Path, config: &GlobalConfig) -> Result<(), CliError> {
    let records = corpus::read_records(open_input(input)?)?;
    if records.is_empty() {
        return Err(CliError::Validation("empty corpus".to_string()));
    }
    let scored = score_records(&records, config)?;
    let mut detections = Vec::with_capacity(records.len());
    for (record, s) in records.iter().zip(&scored) {
        let pred = evaluator::classify(s.aggregate, &config.eval)?;
        let truth = if record.labels.iter().any(|l| !l.is_secure()) {
            StepLabel::Vulnerable
        } else {
            StepLabel::Secure
        };
        detections.push(DetectionRecord {
            aggregate: s.aggregate,
            pred,
            truth,
        });
    }
    let preds: Vec<StepLabel> = detections.iter().map(|d| d.pred).collect();
    let truths: Vec<StepLabel> = detections.iter().map(|d| d.truth).collect();
    let metrics = evaluator::classification_metrics(&preds, &truths)?;
    let mut writer = create_output(output)?;
    for d in &detections {
        write_line(&mut writer, d)?;
    }
    write_line(&mut writer, &metrics)?;
    writer.flush().map_err(|e| CliError::Io(e.to_string()))?;
    println!("{:<10}{:<10}{:<10}{:<10}", "Acc", "Prec", "Rec", "F1");
    println!(
        "{:<10.4}{:<10.4}{:<10.4}{:<10.4}",
        metrics.accuracy, metrics.precision, metrics.recall, metrics.f1
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct RankedPool {
    pool_id: String,
    order: Vec<usize>,
    scores: Vec<f64>,
    method: String,
    selected: Vec<usize>,
}

fn pool_from_record(
    record: &PoolRecord,
    config: &SegmenterConfig,
) -> Result<crate::corpus::CandidatePool, CliError> {
    let segment = |source: &str| -> Trajectory {
        let mut t = segmenter::segment_source(source, config);
        if t.is_empty() {
            // An all-no-op candidate still needs one step to be scored.
            t = Trajectory::from_texts([source]);
        }
        t
    };
    let mut pool = record.to_pool(segment)?;
    // Example-level flags become uniform step labels so the oracle scorer
    // can rank on ground truth.
    if let Some(secure) = &pool.ground_secure.clone() {
        for (candidate, &is_secure) in pool.candidates.iter_mut().zip(secure) {
            let label = if is_secure {
                StepLabel::Secure
            } else {
                StepLabel::Vulnerable
            };
            candidate.labels = Some(vec![label; candidate.len()]);
        }
    }
    Ok(pool)
}

fn cmd_rank(
    input: &Path,
    output: &Path,
    config: &GlobalConfig,
    k: usize,
    by_advantage: bool,
) -> Result<(), CliError> {
    let segmenter_config = config.segmenter.build()?;
    let pool_records = corpus::read_pools(open_input(input)?)?;
    let scorer = scorer::build_scorer(&config.scorer)?;
    let mut writer = create_output(output)?;
    let mut selected_success = 0usize;
    let mut upper_bound = 0usize;
    let mut with_ground = 0usize;
    for (index, record) in pool_records.iter().enumerate() {
        let pool = pool_from_record(record, &segmenter_config)?;
        if k == 0 || k > pool.size() {
            return Err(CliError::Validation(format!(
                "pool {index} ({}): k = {k} out of range for pool of size {}",
                record.pool_id,
                pool.size()
            )));
        }
        let result = if by_advantage {
            rank::rank_by_advantage(&record.pool_id, &pool, scorer.as_ref())?
        } else {
            rank::rank_pool(&record.pool_id, &pool, scorer.as_ref(), &config.aggregation)?
        };
        let selected = rank::select_top_k(&result, k)?;
        if pool.ground_secure.is_some() {
            let outcome = evaluator::best_of_metrics(&pool, &result.order, k, SuccessFlag::Secure)?;
            with_ground += 1;
            selected_success += usize::from(outcome.selected_success);
            upper_bound += usize::from(outcome.upper_bound);
        }
        write_line(
            &mut writer,
            &RankedPool {
                pool_id: result.pool_id.clone(),
                order: result.order.clone(),
                scores: result.scores.clone(),
                method: result.method.clone(),
                selected,
            },
        )?;
    }
    writer.flush().map_err(|e| CliError::Io(e.to_string()))?;
    println!("ranked {} pools (k = {k})", pool_records.len());
    if with_ground > 0 {
        println!("{:<20}{:<10}", format!("sr_at_{k}_selected"), "UB");
        println!(
            "{:<20.4}{:<10.4}",
            selected_success as f64 / with_ground as f64,
            upper_bound as f64 / with_ground as f64
        );
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
struct PredLine {
    pred: StepLabel,
}

#[derive(Debug, Deserialize)]
struct TruthLine {
    label: StepLabel,
}

#[derive(Debug, Deserialize)]
struct PairLine {
    pred_on_vulnerable: StepLabel,
    pred_on_fixed: StepLabel,
}

#[derive(Debug, Deserialize)]
struct PassAtKLine {
    n: u64,
    c: u64,
    k: u64,
}

fn read_lines<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let reader = open_input(path)?;
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CliError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: T = serde_json::from_str(&line)
            .map_err(|e| CliError::Validation(format!("line {}: {e}", lineno + 1)))?;
        out.push(value);
    }
    Ok(out)
}

fn cmd_eval(
    preds_in: &Path,
    truth_in: Option<&Path>,
    output: &Path,
    metric: &str,
) -> Result<(), CliError> {
    let mut writer = create_output(output)?;
    match metric {
        "classification" => {
            let truth_path = truth_in.ok_or_else(|| {
                CliError::Validation("classification metrics require --truth".to_string())
            })?;
            let preds: Vec<StepLabel> = read_lines::<PredLine>(preds_in)?
                .into_iter()
                .map(|l| l.pred)
                .collect();
            let truths: Vec<StepLabel> = read_lines::<TruthLine>(truth_path)?
                .into_iter()
                .map(|l| l.label)
                .collect();
            let metrics = evaluator::classification_metrics(&preds, &truths)?;
            write_line(&mut writer, &metrics)?;
            println!("{:<10}{:<10}{:<10}{:<10}", "Acc", "Prec", "Rec", "F1");
            println!(
                "{:<10.4}{:<10.4}{:<10.4}{:<10.4}",
                metrics.accuracy, metrics.precision, metrics.recall, metrics.f1
            );
        }
        "pairwise" => {
            let pairs: Vec<PairPrediction> = read_lines::<PairLine>(preds_in)?
                .into_iter()
                .map(|l| PairPrediction {
                    pred_on_vulnerable: l.pred_on_vulnerable,
                    pred_on_fixed: l.pred_on_fixed,
                })
                .collect();
            let metrics = evaluator::pairwise_metrics(&pairs)?;
            write_line(&mut writer, &metrics)?;
            println!("{:<10}{:<10}{:<10}{:<10}", "P-C", "P-V", "P-B", "P-R");
            println!(
                "{:<10.2}{:<10.2}{:<10.2}{:<10.2}",
                100.0 * metrics.pc(),
                100.0 * metrics.pv(),
                100.0 * metrics.pb(),
                100.0 * metrics.pr()
            );
        }
        "pass-at-k" | "sr-at-k-sampled" => {
            let lines = read_lines::<PassAtKLine>(preds_in)?;
            if lines.is_empty() {
                return Err(CliError::Validation("no pass@k inputs".to_string()));
            }
            let mut total = 0.0;
            for line in &lines {
                let value = evaluator::pass_at_k(line.n, line.c, line.k)?;
                total += value;
                write_line(
                    &mut writer,
                    &serde_json::json!({
                        "n": line.n, "c": line.c, "k": line.k, "pass_at_k": value
                    }),
                )?;
            }
            println!("{:<12}{:<12}", "tasks", "mean@k");
            println!("{:<12}{:<12.4}", lines.len(), total / lines.len() as f64);
        }
        other => {
            return Err(CliError::Validation(format!(
                "unknown metric set {other:?}; expected classification, pairwise, or pass-at-k"
            )));
        }
    }
    writer.flush().map_err(|e| CliError::Io(e.to_string()))
}
