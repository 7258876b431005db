//! Batch experiments over generated networks and batch statement
//! translation. Both write their artefacts into an output directory together
//! with a manifest that is enough to rerun them.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generators::{generate, load_network_file, GeneratorError, NetworkFileError, Topology, TopologySpec};
use crate::model::{same_network_up_to_relabelling, CreditNetwork};
use crate::operations::{enumerate_simple_cycles, CycleLimits};
use crate::seed::derive_seed;
use crate::statements::{
    aggregate_parsed, parse_record_syntax, translate_corpus, AggregationOptions, Anomaly, DelegatingMock,
    HttpClient, HttpSettings, LlmClient, LlmError, ScriptedMock, TranslateError,
};
use crate::strategies::{compare_strategies, OperationKind, StrategyConfig, StrategyError, StrategyName, ORACLE_CEILING};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Network(#[from] NetworkFileError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("{instance}: {source}")]
    Strategy {
        instance: String,
        #[source]
        source: StrategyError,
    },
    #[error("{instance}: no seed within {attempts} attempts keeps the oracle under its cap")]
    ResampleExhausted { instance: String, attempts: u32 },
    #[error("translation of {file} failed: {source}")]
    Translate {
        file: String,
        #[source]
        source: TranslateError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Where LLM replies come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LlmConfig {
    /// Scripted replies from a JSON file.
    Mock { script: PathBuf },
    /// Replies computed by another strategy.
    Delegate { strategy: StrategyName },
    /// OpenAI-compatible endpoint configured by `LLM_ENDPOINT`, `LLM_MODEL`
    /// and `LLM_API_KEY`.
    Http {
        #[serde(default)]
        settings: Option<PathBuf>,
    },
}

impl LlmConfig {
    pub fn build(&self, config: &StrategyConfig) -> Result<Box<dyn LlmClient>, LlmError> {
        Ok(match self {
            LlmConfig::Mock { script } => Box::new(ScriptedMock::from_file(script)?),
            LlmConfig::Delegate { strategy } => Box::new(DelegatingMock::new(*strategy, *config)?),
            LlmConfig::Http { settings } => {
                let settings = match settings {
                    Some(path) => HttpSettings::from_file(path)?,
                    None => HttpSettings::default(),
                };
                Box::new(HttpClient::from_env(settings)?)
            }
        })
    }

    fn paths(&self) -> Vec<&Path> {
        match self {
            LlmConfig::Mock { script } => vec![script],
            LlmConfig::Http { settings: Some(path) } => vec![path],
            _ => vec![],
        }
    }
}

/// A topology entry of an experiment. Seeds are derived per instance, so
/// none is given here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyEntry {
    #[serde(flatten)]
    pub topology: Topology,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_liability_range")]
    pub liability_range: [f64; 2],
    #[serde(default = "default_asset_range")]
    pub asset_range: [f64; 2],
    #[serde(default)]
    pub integer_amounts: bool,
}

fn default_n() -> usize {
    10
}
fn default_liability_range() -> [f64; 2] {
    [15.0, 40.0]
}
fn default_asset_range() -> [f64; 2] {
    [30.0, 50.0]
}

impl TopologyEntry {
    pub fn new(topology: Topology, n: usize) -> Self {
        Self {
            topology,
            n,
            liability_range: default_liability_range(),
            asset_range: default_asset_range(),
            integer_amounts: false,
        }
    }

    pub fn spec(&self, seed: u64) -> TopologySpec {
        TopologySpec {
            topology: self.topology.clone(),
            n: self.n,
            liability_range: self.liability_range,
            asset_range: self.asset_range,
            seed,
            integer_amounts: self.integer_amounts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub topologies: Vec<TopologyEntry>,
    #[serde(default = "default_instances")]
    pub instances: usize,
    pub operation: OperationKind,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<StrategyName>,
    #[serde(default)]
    pub seed: u64,
    /// Number of selection seeds the random strategy is averaged over.
    #[serde(default = "default_random_seeds")]
    pub random_seeds: usize,
    #[serde(default)]
    pub config: StrategyConfig,
    #[serde(default)]
    pub llm: Option<LlmConfig>,
    /// Redraw an instance until the oracle's candidate count fits
    /// `config.max_candidates`, instead of reporting the oracle as NA.
    #[serde(default)]
    pub resample_beyond_cap: bool,
    #[serde(default = "default_resample_attempts")]
    pub resample_attempts: u32,
}

fn default_instances() -> usize {
    10
}
fn default_strategies() -> Vec<StrategyName> {
    vec![StrategyName::None, StrategyName::Random, StrategyName::Greedy, StrategyName::Oracle]
}
fn default_random_seeds() -> usize {
    10
}
fn default_resample_attempts() -> u32 {
    10_000
}

impl ExperimentSpec {
    pub fn new(topologies: Vec<TopologyEntry>, operation: OperationKind, seed: u64) -> Self {
        Self {
            topologies,
            instances: default_instances(),
            operation,
            strategies: default_strategies(),
            seed,
            random_seeds: default_random_seeds(),
            config: StrategyConfig::default(),
            llm: None,
            resample_beyond_cap: false,
            resample_attempts: default_resample_attempts(),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let spec: Self = serde_json::from_str(&text)
            .map_err(|e| ExperimentError::InvalidSpec(format!("{}: {e}", path.display())))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Checks everything that can be checked before any work starts,
    /// including that referenced files exist.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |msg: String| Err(ExperimentError::InvalidSpec(msg));
        if self.topologies.is_empty() {
            return bad("no topologies".into());
        }
        if self.instances == 0 {
            return bad("instances must be positive".into());
        }
        if self.strategies.is_empty() {
            return bad("no strategies".into());
        }
        if self.strategies.contains(&StrategyName::Random) && self.random_seeds == 0 {
            return bad("the random strategy needs at least one seed".into());
        }
        if self.strategies.contains(&StrategyName::Llm) && self.llm.is_none() {
            return bad("the llm strategy needs an `llm` section".into());
        }
        if self.config.max_candidates > ORACLE_CEILING {
            return bad(format!("max_candidates above the ceiling of {ORACLE_CEILING}"));
        }
        if self.resample_beyond_cap && self.resample_attempts == 0 {
            return bad("resample_attempts must be positive".into());
        }
        for entry in &self.topologies {
            entry
                .spec(0)
                .validate()
                .map_err(|e| ExperimentError::InvalidSpec(e.to_string()))?;
            if let Topology::FromFile { path } = &entry.topology {
                if !path.is_file() {
                    return bad(format!("network file {} not found", path.display()));
                }
            }
        }
        for path in self.llm.iter().flat_map(LlmConfig::paths) {
            if !path.is_file() {
                return bad(format!("{} not found", path.display()));
            }
        }
        Ok(())
    }

    fn topology_labels(&self) -> Vec<String> {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for entry in &self.topologies {
            *counts.entry(entry.topology.short_name()).or_default() += 1;
        }
        let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
        self.topologies
            .iter()
            .map(|entry| {
                let short = entry.topology.short_name();
                let k = seen.entry(short).or_default();
                *k += 1;
                if counts[short] > 1 {
                    format!("{short}{}-", *k)
                } else {
                    short.to_string()
                }
            })
            .collect()
    }
}

/// Seeds used for one instance, recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceSeeds {
    pub instance: String,
    pub topology: String,
    pub network_seed: u64,
    pub attempts: u32,
    pub random_seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub instance: String,
    pub topology: String,
    pub strategy: StrategyName,
    pub post_total: Option<f64>,
    pub plan_size: f64,
    pub defaults: f64,
    pub seed: u64,
    pub min_total: Option<f64>,
    pub max_total: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub topology: String,
    pub strategy: StrategyName,
    /// Instances with a value; the rest were NA.
    pub instances: usize,
    pub mean_post_total: Option<f64>,
    pub mean_plan_size: f64,
    pub mean_defaults: f64,
}

#[derive(Debug, Clone)]
pub struct InstanceOutcome {
    pub seeds: InstanceSeeds,
    pub network: CreditNetwork,
    pub pre_total: f64,
    pub rows: Vec<ResultRow>,
    pub runtimes: Vec<(StrategyName, Duration)>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub instances: Vec<InstanceOutcome>,
    pub aggregate: Vec<AggregateRow>,
    pub elapsed: Duration,
}

impl ExperimentReport {
    pub fn rows(&self) -> impl Iterator<Item = &ResultRow> {
        self.instances.iter().flat_map(|i| i.rows.iter())
    }
}

fn candidate_count(network: &CreditNetwork, kind: OperationKind, limits: &CycleLimits) -> Result<usize, StrategyError> {
    Ok(match kind {
        OperationKind::Compression => enumerate_simple_cycles(network, limits)?.len(),
        OperationKind::Removal => network.edges().len(),
    })
}

fn draw_instance(
    spec: &ExperimentSpec,
    entry: &TopologyEntry,
    t: usize,
    i: usize,
    name: &str,
) -> Result<(CreditNetwork, u64, u32), ExperimentError> {
    if let Topology::FromFile { path } = &entry.topology {
        return Ok((load_network_file(path)?, 0, 1));
    }
    let attempts = if spec.resample_beyond_cap { spec.resample_attempts } else { 1 };
    for attempt in 0..attempts {
        let seed = derive_seed(spec.seed, &[t as u64, i as u64, 0, attempt as u64]);
        let network = generate(&entry.spec(seed))?;
        if !spec.resample_beyond_cap {
            return Ok((network, seed, 1));
        }
        let candidates = candidate_count(&network, spec.operation, &spec.config.cycle_limits).map_err(|source| {
            ExperimentError::Strategy {
                instance: name.to_string(),
                source,
            }
        })?;
        if candidates <= spec.config.max_candidates {
            return Ok((network, seed, attempt + 1));
        }
    }
    Err(ExperimentError::ResampleExhausted {
        instance: name.to_string(),
        attempts,
    })
}

fn run_instance(
    spec: &ExperimentSpec,
    t: usize,
    i: usize,
    label: &str,
    llm: Option<&dyn LlmClient>,
) -> Result<InstanceOutcome, ExperimentError> {
    let entry = &spec.topologies[t];
    let name = format!("{label}{}", i + 1);
    let (network, network_seed, attempts) = draw_instance(spec, entry, t, i, &name)?;
    let random_seeds: Vec<u64> = (0..spec.random_seeds)
        .map(|r| derive_seed(spec.seed, &[t as u64, i as u64, 1, r as u64]))
        .collect();
    let mut config = spec.config;
    config.order_seed = derive_seed(spec.seed, &[t as u64, i as u64, 2]);
    let comparison = compare_strategies(&network, spec.operation, &spec.strategies, &config, &random_seeds, llm)
        .map_err(|source| ExperimentError::Strategy {
            instance: name.clone(),
            source,
        })?;
    let topology = entry.topology.name().to_string();
    let rows = comparison
        .rows
        .iter()
        .map(|row| ResultRow {
            instance: name.clone(),
            topology: topology.clone(),
            strategy: row.strategy,
            post_total: row.post_total,
            plan_size: row.plan_size,
            defaults: row.defaults,
            seed: network_seed,
            min_total: row.min_total,
            max_total: row.max_total,
        })
        .collect();
    Ok(InstanceOutcome {
        seeds: InstanceSeeds {
            instance: name,
            topology,
            network_seed,
            attempts,
            random_seeds,
        },
        network,
        pre_total: comparison.pre_total,
        rows,
        runtimes: comparison.rows.iter().map(|r| (r.strategy, r.runtime)).collect(),
    })
}

fn aggregate(spec: &ExperimentSpec, instances: &[InstanceOutcome]) -> Vec<AggregateRow> {
    let mut out = Vec::new();
    for (t, entry) in spec.topologies.iter().enumerate() {
        let block = &instances[t * spec.instances..((t + 1) * spec.instances).min(instances.len())];
        for &strategy in &spec.strategies {
            let rows: Vec<&ResultRow> = block
                .iter()
                .flat_map(|i| i.rows.iter())
                .filter(|r| r.strategy == strategy)
                .collect();
            let values: Vec<f64> = rows.iter().filter_map(|r| r.post_total).collect();
            let count = rows.len().max(1) as f64;
            out.push(AggregateRow {
                topology: entry.topology.name().to_string(),
                strategy,
                instances: values.len(),
                mean_post_total: (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64),
                mean_plan_size: rows.iter().map(|r| r.plan_size).sum::<f64>() / count,
                mean_defaults: rows.iter().map(|r| r.defaults).sum::<f64>() / count,
            });
        }
    }
    out
}

/// Runs the experiment with `jobs` worker threads. Results do not depend on
/// `jobs`. When `out_dir` is given, all artefacts are written there; on
/// failure the rows computed before the failing instance are written along
/// with a `FAILED` marker.
pub fn run_experiment(
    spec: &ExperimentSpec,
    jobs: usize,
    out_dir: Option<&Path>,
) -> Result<ExperimentReport, ExperimentError> {
    spec.validate()?;
    let started = Instant::now();
    let client = match (&spec.llm, spec.strategies.contains(&StrategyName::Llm)) {
        (Some(cfg), true) => Some(cfg.build(&spec.config)?),
        _ => None,
    };
    let llm = client.as_deref();
    let labels = spec.topology_labels();
    let work: Vec<(usize, usize)> = (0..spec.topologies.len())
        .flat_map(|t| (0..spec.instances).map(move |i| (t, i)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| ExperimentError::InvalidSpec(format!("cannot start {jobs} workers: {e}")))?;
    let results: Vec<Result<InstanceOutcome, ExperimentError>> = pool.install(|| {
        work.par_iter()
            .map(|&(t, i)| run_instance(spec, t, i, &labels[t], llm))
            .collect()
    });

    let mut instances = Vec::with_capacity(results.len());
    let mut failure = None;
    for result in results {
        match result {
            Ok(outcome) => instances.push(outcome),
            Err(err) => {
                failure = Some(err);
                break;
            }
        }
    }
    let report = ExperimentReport {
        aggregate: aggregate(spec, &instances),
        instances,
        elapsed: started.elapsed(),
    };
    if let Some(dir) = out_dir {
        write_experiment(dir, spec, &report)?;
        let marker = dir.join("FAILED");
        match &failure {
            Some(err) => fs::write(&marker, format!("{err}\n")).map_err(io_err(&marker))?,
            None if marker.exists() => fs::remove_file(&marker).map_err(io_err(&marker))?,
            None => {}
        }
    }
    match failure {
        Some(err) => Err(err),
        None => Ok(report),
    }
}

fn fmt_opt(value: Option<f64>) -> String {
    value.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

fn csv_text(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).expect("writing to memory");
    for row in rows {
        writer.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("writing to memory")).expect("csv output is utf-8")
}

pub fn results_csv(report: &ExperimentReport) -> String {
    csv_text(
        &[
            "instance", "topology", "strategy", "post_total", "plan_size", "defaults", "seed", "min_total",
            "max_total",
        ],
        report.rows().map(|r| {
            vec![
                r.instance.clone(),
                r.topology.clone(),
                r.strategy.to_string(),
                fmt_opt(r.post_total),
                r.plan_size.to_string(),
                r.defaults.to_string(),
                r.seed.to_string(),
                fmt_opt(r.min_total),
                fmt_opt(r.max_total),
            ]
        }),
    )
}

pub fn aggregate_csv(report: &ExperimentReport) -> String {
    csv_text(
        &["topology", "strategy", "instances", "mean_post_total", "mean_plan_size", "mean_defaults"],
        report.aggregate.iter().map(|r| {
            vec![
                r.topology.clone(),
                r.strategy.to_string(),
                r.instances.to_string(),
                fmt_opt(r.mean_post_total),
                r.mean_plan_size.to_string(),
                r.mean_defaults.to_string(),
            ]
        }),
    )
}

/// Strategies down, instances across, one block per topology.
pub fn results_table(spec: &ExperimentSpec, report: &ExperimentReport) -> String {
    let mut out = String::new();
    for (t, entry) in spec.topologies.iter().enumerate() {
        let block: Vec<&InstanceOutcome> = report
            .instances
            .iter()
            .skip(t * spec.instances)
            .take(spec.instances)
            .collect();
        if block.is_empty() {
            break;
        }
        let _ = writeln!(out, "{} ({})", entry.topology.name(), spec.operation);
        let _ = write!(out, "{:<22}", "Method");
        for inst in &block {
            let _ = write!(out, "{:>10}", inst.seeds.instance);
        }
        out.push('\n');
        for &strategy in &spec.strategies {
            let _ = write!(out, "{:<22}", strategy.display_name(spec.operation));
            for inst in &block {
                let value = inst.rows.iter().find(|r| r.strategy == strategy).and_then(|r| r.post_total);
                let cell = value.map_or_else(|| "NA".to_string(), |v| format!("{v:.2}"));
                let _ = write!(out, "{cell:>10}");
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct ExperimentManifest<'a> {
    tool: &'static str,
    version: &'static str,
    spec: &'a ExperimentSpec,
    instances: Vec<&'a InstanceSeeds>,
}

fn write_experiment(dir: &Path, spec: &ExperimentSpec, report: &ExperimentReport) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let write = |name: &str, text: String| {
        let path = dir.join(name);
        fs::write(&path, text).map_err(io_err(&path))
    };
    write("results.csv", results_csv(report))?;
    write("aggregate.csv", aggregate_csv(report))?;
    write("table.txt", results_table(spec, report))?;
    let manifest = ExperimentManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        spec,
        instances: report.instances.iter().map(|i| &i.seeds).collect(),
    };
    write("manifest.json", to_json(&manifest))?;
    let timings = csv_text(
        &["instance", "strategy", "seconds"],
        report.instances.iter().flat_map(|inst| {
            inst.runtimes.iter().map(|(s, d)| {
                vec![inst.seeds.instance.clone(), s.to_string(), format!("{:.6}", d.as_secs_f64())]
            })
        }),
    );
    write("timings.csv", timings)?;
    Ok(())
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    text
}

/// Peak resident set size of this process in bytes, where the platform
/// reports it.
pub fn peak_memory_bytes() -> Option<u64> {
    let status = fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The aggregate matches the ground truth up to relabelling.
    Reconstructed,
    /// Aggregation finished but differs from the ground truth.
    Mismatch,
    /// Aggregation stopped at an anomaly.
    AnomalyDetected,
    /// Aggregation finished and no ground truth was given.
    Unchecked,
}

#[derive(Debug, Clone, Serialize)]
pub struct TranslationReport {
    pub files: Vec<String>,
    pub components: usize,
    pub firms: usize,
    pub edges: usize,
    pub anomalies: Vec<Anomaly>,
    pub halted_at: Option<usize>,
    pub halted_file: Option<String>,
    pub records_integrated: usize,
    pub verdict: Verdict,
    #[serde(skip)]
    pub networks: Vec<CreditNetwork>,
    #[serde(skip)]
    pub assets_unknown: Vec<Vec<String>>,
    #[serde(skip)]
    pub elapsed: Duration,
    #[serde(skip)]
    pub peak_memory: Option<u64>,
}

#[derive(Debug, Clone, Default)]
pub struct TranslationOptions {
    pub aggregation: AggregationOptions,
    pub truth: Option<PathBuf>,
    pub max_in_flight: usize,
}

/// Corpus files in name order: `.rec` records are parsed directly and
/// `.stmt`/`.txt` statements go through `client`.
pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        if path.is_file() && matches!(ext, "rec" | "stmt" | "txt") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn run_translation(
    files: &[PathBuf],
    client: Option<&dyn LlmClient>,
    options: &TranslationOptions,
    out_dir: Option<&Path>,
) -> Result<TranslationReport, ExperimentError> {
    let started = Instant::now();
    let truth = options.truth.as_deref().map(load_network_file).transpose()?;
    let mut texts = Vec::with_capacity(files.len());
    for path in files {
        texts.push(fs::read_to_string(path).map_err(io_err(path))?);
    }
    let is_statement: Vec<bool> = files.iter().map(|p| p.extension().is_some_and(|e| e != "rec")).collect();
    let statements: Vec<&str> = texts
        .iter()
        .zip(&is_statement)
        .filter(|(_, &s)| s)
        .map(|(t, _)| t.as_str())
        .collect();
    let mut translated = if statements.is_empty() {
        Vec::new()
    } else {
        let client = client.ok_or_else(|| {
            ExperimentError::InvalidSpec("statement files need an LLM client".into())
        })?;
        translate_corpus(client, &statements, options.max_in_flight.max(1))
    }
    .into_iter();
    let mut parsed = Vec::with_capacity(files.len());
    for ((path, text), statement) in files.iter().zip(&texts).zip(&is_statement) {
        let result = if *statement {
            match translated.next().expect("one translation per statement") {
                Ok(record) => Ok(record),
                Err(TranslateError::Malformed(err)) => Err(err),
                Err(source) => {
                    return Err(ExperimentError::Translate {
                        file: path.display().to_string(),
                        source,
                    })
                }
            }
        } else {
            parse_record_syntax(text)
        };
        parsed.push(result);
    }
    let aggregated = aggregate_parsed(parsed.iter().map(Result::as_ref), &options.aggregation);
    let networks: Vec<CreditNetwork> = aggregated.networks.iter().map(|a| a.network.clone()).collect();
    let verdict = match (&aggregated.halted_at, &truth) {
        (Some(_), _) => Verdict::AnomalyDetected,
        (None, Some(truth)) if same_network_up_to_relabelling(truth, &networks) => Verdict::Reconstructed,
        (None, Some(_)) => Verdict::Mismatch,
        (None, None) => Verdict::Unchecked,
    };
    let names: Vec<String> = files
        .iter()
        .map(|p| p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned()))
        .collect();
    let report = TranslationReport {
        halted_file: aggregated.halted_at.map(|k| names[k].clone()),
        files: names,
        components: networks.len(),
        firms: networks.iter().map(CreditNetwork::len).sum(),
        edges: networks.iter().map(|n| n.edges().len()).sum(),
        anomalies: aggregated.anomalies,
        halted_at: aggregated.halted_at,
        records_integrated: aggregated.records_integrated,
        verdict,
        assets_unknown: aggregated.networks.into_iter().map(|a| a.assets_unknown).collect(),
        networks,
        elapsed: started.elapsed(),
        peak_memory: peak_memory_bytes(),
    };
    if let Some(dir) = out_dir {
        write_translation(dir, &report, options)?;
    }
    Ok(report)
}

#[derive(Serialize)]
struct TranslationManifest<'a> {
    tool: &'static str,
    version: &'static str,
    tolerance: f64,
    mode: crate::statements::AggregationMode,
    truth: Option<&'a Path>,
    files: &'a [String],
    verdict: &'a Verdict,
    elapsed_seconds: f64,
    peak_memory_bytes: Option<u64>,
}

fn write_translation(dir: &Path, report: &TranslationReport, options: &TranslationOptions) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let width = report.networks.len().saturating_sub(1).to_string().len();
    for (k, network) in report.networks.iter().enumerate() {
        let path = dir.join(format!("component_{k:0width$}.json"));
        fs::write(&path, network.to_canonical_json()).map_err(io_err(&path))?;
    }
    let path = dir.join("anomalies.json");
    fs::write(&path, to_json(&report.anomalies)).map_err(io_err(&path))?;
    let path = dir.join("report.json");
    fs::write(&path, to_json(report)).map_err(io_err(&path))?;
    let manifest = TranslationManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        tolerance: options.aggregation.tolerance,
        mode: options.aggregation.mode,
        truth: options.truth.as_deref(),
        files: &report.files,
        verdict: &report.verdict,
        elapsed_seconds: report.elapsed.as_secs_f64(),
        peak_memory_bytes: report.peak_memory,
    };
    let path = dir.join("manifest.json");
    fs::write(&path, to_json(&manifest)).map_err(io_err(&path))
}
