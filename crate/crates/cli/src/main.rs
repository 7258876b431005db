use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use creditnet::clearing::ClearingError;
use creditnet::corpus::{build_corpus, CorpusFormat, CorpusOptions};
use creditnet::experiment::{
    corpus_files, run_experiment, run_translation, ExperimentError, ExperimentSpec, LlmConfig, TranslationOptions,
    Verdict,
};
use creditnet::generators::{generate, load_network_file, save_network_file, GeneratorError, NetworkFileError, Topology, TopologySpec};
use creditnet::model::ModelError;
use creditnet::operations::{compress_cycles, enumerate_simple_cycles, remove_debts, CycleLimits, OperationError};
use creditnet::statements::{
    LlmError, PlanReplyError, RecordError, RenderError, SuggestError, TranslateError, AggregationMode,
    AggregationOptions, DEFAULT_CONFLICT_TOLERANCE,
};
use creditnet::strategies::{
    compare_strategies, ExecutionPlan, OperationKind, PlanFile, PlanKind, StrategyConfig,
    StrategyError, StrategyName,
};
use creditnet::{clear, CreditNetwork, DebtCycle, DebtEdge};

const EXIT_VALIDATION: u8 = 2;
const EXIT_ANOMALY: u8 = 3;
const EXIT_TRANSPORT: u8 = 4;
const EXIT_INTERNAL: u8 = 5;

#[derive(Parser)]
#[command(name = "creditnet", version, about = "Clearing, compression and removal on credit networks")]
struct Cli {
    /// Also write a run manifest (arguments, version, exit status) here.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic network.
    Generate(GenerateArgs),
    /// Compute the clearing payments of a network.
    Clear(ClearArgs),
    /// List the simple debt cycles of a network.
    Cycles(CyclesArgs),
    /// Compress debt cycles.
    Compress(CompressArgs),
    /// Remove debts.
    Remove(RemoveArgs),
    /// Compare strategies on one network.
    Strategize(StrategizeArgs),
    /// Run a batch experiment from a spec file.
    Experiment(ExperimentArgs),
    /// Translate a corpus of statements and records into networks.
    Translate(TranslateArgs),
    /// Aggregate extraction-record files into networks.
    Aggregate(AggregateArgs),
    /// Write per-firm records or statements for a network.
    RenderStatements(RenderArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TopologyKind {
    ErdosRenyi,
    CorePeriphery,
    IsolatedBlocks,
    DagSccs,
}

#[derive(Args)]
struct GenerateArgs {
    /// Topology spec as JSON; overrides the individual options.
    #[arg(long, conflicts_with = "topology")]
    spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    topology: Option<TopologyKind>,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Link probability (Erdős–Rényi).
    #[arg(long)]
    p: Option<f64>,
    /// Core size (core-periphery).
    #[arg(long)]
    core: Option<usize>,
    #[arg(long)]
    core_density: Option<f64>,
    #[arg(long)]
    periphery_density: Option<f64>,
    /// Block or component sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Extra-link density inside blocks.
    #[arg(long)]
    density: Option<f64>,
    #[arg(long)]
    inter_probability: Option<f64>,
    #[arg(long)]
    integer_amounts: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NetworkArg {
    /// Network file (JSON).
    #[arg(long, short)]
    network: PathBuf,
}

#[derive(Args)]
struct ConfigArgs {
    /// Strategy configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Recovery rate for defaulting firms.
    #[arg(long)]
    alpha: Option<f64>,
}

impl ConfigArgs {
    fn load(&self) -> Result<StrategyConfig> {
        let mut config = match &self.config {
            Some(path) => read_json::<StrategyConfig>(path)?,
            None => StrategyConfig::default(),
        };
        if let Some(alpha) = self.alpha {
            config.clearing.alpha = alpha;
        }
        config.clearing.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct ClearArgs {
    #[command(flatten)]
    network: NetworkArg,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CyclesArgs {
    #[command(flatten)]
    network: NetworkArg,
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    max_count: usize,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompressArgs {
    #[command(flatten)]
    network: NetworkArg,
    /// Cycles as firm lists, e.g. "0,1,2;3,4".
    #[arg(long, conflicts_with_all = ["plan", "all"])]
    cycles: Option<String>,
    /// Plan file (JSON) of kind compression.
    #[arg(long, conflicts_with = "all")]
    plan: Option<PathBuf>,
    /// Compress every simple cycle.
    #[arg(long)]
    all: bool,
    /// Seed for the order of equal-length cycles.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the compressed network here; the report goes to stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RemoveArgs {
    #[command(flatten)]
    network: NetworkArg,
    /// Debts as borrower-lender pairs, e.g. "0-1,2-3".
    #[arg(long, conflicts_with = "plan")]
    edges: Option<String>,
    #[arg(long)]
    plan: Option<PathBuf>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LlmArgs {
    /// Scripted replies (JSON list of {expect_substring, reply}).
    #[arg(long, conflicts_with_all = ["llm_delegate", "llm_http"])]
    llm_mock: Option<PathBuf>,
    /// Answer execution prompts with another strategy.
    #[arg(long, value_parser = ["greedy", "oracle"], conflicts_with = "llm_http")]
    llm_delegate: Option<String>,
    /// Use the HTTP endpoint from LLM_ENDPOINT, LLM_MODEL and LLM_API_KEY.
    #[arg(long)]
    llm_http: bool,
    /// HTTP client settings (JSON).
    #[arg(long, requires = "llm_http")]
    llm_settings: Option<PathBuf>,
}

impl LlmArgs {
    fn config(&self) -> Result<Option<LlmConfig>> {
        Ok(if let Some(script) = &self.llm_mock {
            Some(LlmConfig::Mock { script: script.clone() })
        } else if let Some(name) = &self.llm_delegate {
            Some(LlmConfig::Delegate {
                strategy: name.parse().map_err(|e: String| anyhow!(e))?,
            })
        } else if self.llm_http {
            Some(LlmConfig::Http {
                settings: self.llm_settings.clone(),
            })
        } else {
            None
        })
    }
}

#[derive(Args)]
struct StrategizeArgs {
    #[command(flatten)]
    network: NetworkArg,
    #[arg(long, value_parser = parse_operation)]
    operation: OperationKind,
    /// Comma-separated strategies.
    #[arg(long, value_delimiter = ',', default_value = "none,random,greedy,oracle", value_parser = parse_strategy)]
    strategies: Vec<StrategyName>,
    /// Master seed for the random strategy's selection seeds.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    random_seeds: usize,
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    llm: LlmArgs,
    /// Print a table instead of JSON.
    #[arg(long)]
    table: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct AggregationArgs {
    /// Ground-truth network to compare the aggregate against.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_CONFLICT_TOLERANCE)]
    tolerance: f64,
    /// Keep checking records after the first anomaly.
    #[arg(long)]
    collect_all: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

impl AggregationArgs {
    fn options(&self, max_in_flight: usize) -> TranslationOptions {
        TranslationOptions {
            aggregation: AggregationOptions {
                tolerance: self.tolerance,
                mode: if self.collect_all {
                    AggregationMode::CollectAll
                } else {
                    AggregationMode::Halt
                },
            },
            truth: self.truth.clone(),
            max_in_flight,
        }
    }
}

#[derive(Args)]
struct TranslateArgs {
    /// Directory of .stmt/.txt statements and .rec records.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 4)]
    max_in_flight: usize,
    #[command(flatten)]
    llm: LlmArgs,
    #[command(flatten)]
    aggregation: AggregationArgs,
}

#[derive(Args)]
struct AggregateArgs {
    /// Record files, integrated in the order given.
    #[arg(required = true)]
    records: Vec<PathBuf>,
    #[command(flatten)]
    aggregation: AggregationArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Records,
    Statements,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    network: NetworkArg,
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "records")]
    format: FormatArg,
    #[arg(long, default_value = "formal")]
    template: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Perturb this many already-reported amounts in later records.
    #[arg(long, default_value_t = 0)]
    inject_conflicts: usize,
}

fn parse_operation(s: &str) -> Result<OperationKind, String> {
    s.parse()
}

fn parse_strategy(s: &str) -> Result<StrategyName, String> {
    s.parse()
}

/// Marks a run that stopped on an aggregation anomaly.
#[derive(Debug)]
struct AnomalyHalt(String);

impl std::fmt::Display for AnomalyHalt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for AnomalyHalt {}

/// Marks bad command-line input.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn llm_code(err: &LlmError) -> u8 {
    match err {
        LlmError::Config(_) => EXIT_VALIDATION,
        _ => EXIT_TRANSPORT,
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<AnomalyHalt>() {
            return EXIT_ANOMALY;
        }
        if let Some(e) = cause.downcast_ref::<LlmError>() {
            return llm_code(e);
        }
        if let Some(TranslateError::Transport(e)) = cause.downcast_ref() {
            return llm_code(e);
        }
        if let Some(SuggestError::Transport(e)) = cause.downcast_ref() {
            return llm_code(e);
        }
        if let Some(e) = cause.downcast_ref::<StrategyError>() {
            match e {
                StrategyError::Suggest(SuggestError::Transport(e)) => return llm_code(e),
                StrategyError::Clearing(ClearingError::NotConverged { .. }) => return EXIT_INTERNAL,
                StrategyError::Operation(_) | StrategyError::Clearing(_) => continue,
                _ => return EXIT_VALIDATION,
            }
        }
        if let Some(e) = cause.downcast_ref::<ExperimentError>() {
            match e {
                ExperimentError::Llm(e) => return llm_code(e),
                ExperimentError::InvalidSpec(_)
                | ExperimentError::Generator(_)
                | ExperimentError::Network(_)
                | ExperimentError::ResampleExhausted { .. } => return EXIT_VALIDATION,
                _ => continue,
            }
        }
        if let Some(e) = cause.downcast_ref::<ClearingError>() {
            if matches!(e, ClearingError::NotConverged { .. }) {
                return EXIT_INTERNAL;
            }
            return EXIT_VALIDATION;
        }
        if cause.is::<Usage>()
            || cause.is::<NetworkFileError>()
            || cause.is::<GeneratorError>()
            || cause.is::<ModelError>()
            || cause.is::<OperationError>()
            || cause.is::<RecordError>()
            || cause.is::<RenderError>()
            || cause.is::<PlanReplyError>()
            || cause.is::<serde_json::Error>()
            || cause.is::<io::Error>()
        {
            return EXIT_VALIDATION;
        }
    }
    EXIT_INTERNAL
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn pretty(value: &impl serde::Serialize) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    text
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn topology_from_args(args: &GenerateArgs) -> Result<TopologySpec> {
    if let Some(path) = &args.spec {
        let spec: TopologySpec = read_json(path)?;
        spec.validate()?;
        return Ok(spec);
    }
    let kind = args
        .topology
        .ok_or_else(|| Usage("either --spec or --topology is required".into()))?;
    let [er, cp, ib, scc] = Topology::synthetic(args.n);
    let topology = match (kind, er, cp, ib, scc) {
        (TopologyKind::ErdosRenyi, Topology::ErdosRenyi { p }, ..) => Topology::ErdosRenyi { p: args.p.unwrap_or(p) },
        (
            TopologyKind::CorePeriphery,
            _,
            Topology::CorePeriphery {
                core,
                core_density,
                periphery_density,
            },
            ..,
        ) => Topology::CorePeriphery {
            core: args.core.unwrap_or(core),
            core_density: args.core_density.unwrap_or(core_density),
            periphery_density: args.periphery_density.unwrap_or(periphery_density),
        },
        (TopologyKind::IsolatedBlocks, _, _, Topology::IsolatedBlocks { sizes, density }, _) => Topology::IsolatedBlocks {
            sizes: args.sizes.clone().unwrap_or(sizes),
            density: args.density.unwrap_or(density),
        },
        (
            TopologyKind::DagSccs,
            ..,
            Topology::DagSccs {
                sizes,
                inter_probability,
            },
        ) => Topology::DagSccs {
            sizes: args.sizes.clone().unwrap_or(sizes),
            inter_probability: args.inter_probability.unwrap_or(inter_probability),
        },
        _ => unreachable!("synthetic() lists the topologies in a fixed order"),
    };
    let mut spec = TopologySpec::new(topology, args.n, args.seed);
    spec.integer_amounts = args.integer_amounts;
    Ok(spec)
}

fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let spec = topology_from_args(args)?;
    let network = generate(&spec)?;
    match &args.out {
        Some(path) => {
            save_network_file(&network, path)?;
            fs::write(manifest_path(path), pretty(&json!({ "command": "generate", "spec": spec, "version": env!("CARGO_PKG_VERSION") })))?;
        }
        None => print!("{}", network.to_canonical_json()),
    }
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn cmd_clear(args: &ClearArgs) -> Result<()> {
    let network = load_network_file(&args.network.network)?;
    let config = args.config.load()?;
    let result = clear(&network, &config.clearing)?;
    let firms: Vec<Value> = network
        .labels()
        .iter()
        .zip(&result.metrics)
        .map(|(label, m)| {
            json!({
                "firm": label,
                "total_liability": m.total_liability,
                "total_assets": m.total_assets,
                "equity": m.equity,
                "solvent": m.solvent,
            })
        })
        .collect();
    let value = json!({
        "total_assets": result.total_assets(),
        "defaults": result.default_count(),
        "default_set": result.default_set,
        "iterations": result.iterations,
        "converged": result.converged,
        "residual": result.residual,
        "firms": firms,
        "payments": result.payments.to_rows(),
    });
    emit(args.out.as_deref(), &pretty(&value))
}

fn cmd_cycles(args: &CyclesArgs) -> Result<()> {
    let network = load_network_file(&args.network.network)?;
    let limits = CycleLimits {
        max_len: args.max_len,
        max_count: Some(args.max_count),
    };
    let cycles = enumerate_simple_cycles(&network, &limits)?;
    let value: Vec<Value> = cycles
        .iter()
        .map(|c| json!({ "firms": c.firms(), "min_liability": c.min_liability(), "weighted_flow": c.weighted_flow() }))
        .collect();
    emit(args.out.as_deref(), &pretty(&value))
}

fn load_plan(network: &CreditNetwork, path: &Path, want: PlanKind) -> Result<ExecutionPlan> {
    let file: PlanFile = read_json(path)?;
    let plan = ExecutionPlan::from_file(network, file)?;
    if plan.kind() != want && plan.kind() != PlanKind::None {
        return Err(Usage(format!("{} holds a {:?} plan", path.display(), plan.kind())).into());
    }
    Ok(plan)
}

fn parse_cycles(network: &CreditNetwork, text: &str) -> Result<Vec<DebtCycle>> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|part| {
            let firms = part
                .split(',')
                .map(|f| f.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| Usage(format!("bad cycle {part:?}")))?;
            Ok(DebtCycle::new(network, firms)?)
        })
        .collect()
}

fn parse_edges(network: &CreditNetwork, text: &str) -> Result<Vec<DebtEdge>> {
    let mut edges = Vec::new();
    for part in text.split(',').filter(|s| !s.trim().is_empty()) {
        let (b, l) = part
            .split_once('-')
            .and_then(|(b, l)| Some((b.trim().parse::<usize>().ok()?, l.trim().parse::<usize>().ok()?)))
            .ok_or_else(|| Usage(format!("bad debt {part:?}; expected borrower-lender")))?;
        if b >= network.len() || l >= network.len() {
            return Err(OperationError::UnknownFirm { firm: b.max(l), n: network.len() }.into());
        }
        edges.push(DebtEdge::new(b, l)?);
    }
    Ok(edges)
}

fn write_network(network: &CreditNetwork, out: Option<&Path>, report: Value) -> Result<()> {
    match out {
        Some(path) => {
            save_network_file(network, path)?;
            print!("{}", pretty(&report));
        }
        None => print!(
            "{}",
            pretty(&json!({ "network": serde_json::from_str::<Value>(&network.to_canonical_json())?, "report": report }))
        ),
    }
    Ok(())
}

fn cmd_compress(args: &CompressArgs) -> Result<()> {
    let network = load_network_file(&args.network.network)?;
    let (cycles, seed) = if let Some(text) = &args.cycles {
        (parse_cycles(&network, text)?, args.seed)
    } else if let Some(path) = &args.plan {
        let plan = load_plan(&network, path, PlanKind::Compression)?;
        (plan.cycles().to_vec(), plan.seed())
    } else if args.all {
        (enumerate_simple_cycles(&network, &CycleLimits::default())?, args.seed)
    } else {
        return Err(Usage("give --cycles, --plan or --all".into()).into());
    };
    let (after, report) = compress_cycles(&network, &cycles, seed)?;
    write_network(&after, args.out.as_deref(), serde_json::to_value(&report)?)
}

fn cmd_remove(args: &RemoveArgs) -> Result<()> {
    let network = load_network_file(&args.network.network)?;
    let edges = if let Some(text) = &args.edges {
        parse_edges(&network, text)?
    } else if let Some(path) = &args.plan {
        load_plan(&network, path, PlanKind::Removal)?.edges().to_vec()
    } else {
        return Err(Usage("give --edges or --plan".into()).into());
    };
    let after = remove_debts(&network, &edges)?;
    let removed: f64 = edges.iter().map(|e| network.liability(e.borrower(), e.lender())).sum();
    write_network(&after, args.out.as_deref(), json!({ "removed": edges, "removed_amount": removed }))
}

fn cmd_strategize(args: &StrategizeArgs) -> Result<()> {
    let network = load_network_file(&args.network.network)?;
    let config = args.config.load()?;
    let llm_config = args.llm.config()?;
    if args.strategies.contains(&StrategyName::Llm) && llm_config.is_none() {
        return Err(Usage("the llm strategy needs --llm-mock, --llm-delegate or --llm-http".into()).into());
    }
    let client = llm_config.as_ref().map(|c| c.build(&config)).transpose()?;
    let seeds: Vec<u64> = (0..args.random_seeds as u64)
        .map(|r| creditnet::seed::derive_seed(args.seed, &[r]))
        .collect();
    let comparison = compare_strategies(
        &network,
        args.operation,
        &args.strategies,
        &config,
        &seeds,
        client.as_deref(),
    )?;
    let text = if args.table {
        let mut s = format!("{:<22}{:>14}{:>10}{:>10}\n", "Method", "total assets", "size", "defaults");
        s.push_str(&format!("{:<22}{:>14.4}{:>10}{:>10}\n", "(before)", comparison.pre_total, "", comparison.pre_defaults));
        for row in &comparison.rows {
            let total = row.post_total.map_or_else(|| "NA".to_string(), |v| format!("{v:.4}"));
            s.push_str(&format!(
                "{:<22}{:>14}{:>10.2}{:>10.2}\n",
                row.strategy.display_name(args.operation),
                total,
                row.plan_size,
                row.defaults
            ));
        }
        s
    } else {
        pretty(&comparison)
    };
    emit(args.out.as_deref(), &text)?;
    if let Some(out) = &args.out {
        let manifest = json!({
            "command": "strategize",
            "version": env!("CARGO_PKG_VERSION"),
            "network": args.network.network,
            "operation": args.operation,
            "strategies": args.strategies,
            "seed": args.seed,
            "random_seeds": seeds,
            "config": config,
            "llm": llm_config,
        });
        fs::write(manifest_path(out), pretty(&manifest))?;
    }
    Ok(())
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<()> {
    let spec = ExperimentSpec::from_file(&args.spec)?;
    let report = run_experiment(&spec, args.jobs, Some(&args.out))?;
    eprintln!(
        "{} instances, {} rows, written to {}",
        report.instances.len(),
        report.rows().count(),
        args.out.display()
    );
    Ok(())
}

fn finish_translation(report: &creditnet::experiment::TranslationReport) -> Result<()> {
    let summary = json!({
        "verdict": report.verdict,
        "components": report.components,
        "firms": report.firms,
        "edges": report.edges,
        "records_integrated": report.records_integrated,
        "halted_at": report.halted_at,
        "halted_file": report.halted_file,
        "anomalies": report.anomalies.len(),
        "elapsed_seconds": report.elapsed.as_secs_f64(),
        "peak_memory_bytes": report.peak_memory,
    });
    print!("{}", pretty(&summary));
    if report.verdict == Verdict::AnomalyDetected {
        let first = report.anomalies.first().map_or_else(String::new, |a| a.message.clone());
        return Err(AnomalyHalt(format!(
            "aggregation stopped at {}: {first}",
            report.halted_file.as_deref().unwrap_or("?")
        ))
        .into());
    }
    Ok(())
}

fn cmd_translate(args: &TranslateArgs) -> Result<()> {
    let files = corpus_files(&args.corpus)?;
    if files.is_empty() {
        return Err(Usage(format!("no .stmt, .txt or .rec files in {}", args.corpus.display())).into());
    }
    let options = args.aggregation.options(args.max_in_flight);
    let client = args
        .llm
        .config()?
        .map(|c| c.build(&StrategyConfig::default()))
        .transpose()?;
    let report = run_translation(&files, client.as_deref(), &options, args.aggregation.out.as_deref())?;
    finish_translation(&report)
}

fn cmd_aggregate(args: &AggregateArgs) -> Result<()> {
    if let Some(path) = args.records.iter().find(|p| p.extension().is_none_or(|e| e != "rec")) {
        return Err(Usage(format!("{} is not a .rec file", path.display())).into());
    }
    let options = args.aggregation.options(1);
    let report = run_translation(&args.records, None, &options, args.aggregation.out.as_deref())?;
    finish_translation(&report)
}

fn cmd_render(args: &RenderArgs) -> Result<()> {
    let network = load_network_file(&args.network.network)?;
    let options = CorpusOptions {
        format: match args.format {
            FormatArg::Records => CorpusFormat::Records,
            FormatArg::Statements => CorpusFormat::Statements,
        },
        template: args.template.clone(),
        seed: args.seed,
        inject_conflicts: args.inject_conflicts,
        ..Default::default()
    };
    let corpus = build_corpus(&network, &options)?;
    if corpus.injected.len() < args.inject_conflicts {
        return Err(Usage(format!(
            "only {} debts are reported twice, fewer than the {} conflicts requested",
            corpus.injected.len(),
            args.inject_conflicts
        ))
        .into());
    }
    corpus.write(&args.out, &network)?;
    let manifest = json!({
        "command": "render-statements",
        "version": env!("CARGO_PKG_VERSION"),
        "network": args.network.network,
        "format": options.format,
        "template": options.template,
        "seed": options.seed,
        "injected": corpus.injected,
        "files": corpus.files.len(),
    });
    fs::write(args.out.join("manifest.json"), pretty(&manifest))?;
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Clear(a) => cmd_clear(a),
        Command::Cycles(a) => cmd_cycles(a),
        Command::Compress(a) => cmd_compress(a),
        Command::Remove(a) => cmd_remove(a),
        Command::Strategize(a) => cmd_strategize(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Translate(a) => cmd_translate(a),
        Command::Aggregate(a) => cmd_aggregate(a),
        Command::RenderStatements(a) => cmd_render(a),
    }
}

/// Where a run records its arguments when `--manifest` is not given.
/// `generate` and `strategize` write their own richer manifests.
fn default_run_manifest(command: &Command) -> Option<PathBuf> {
    match command {
        Command::Clear(ClearArgs { out, .. })
        | Command::Cycles(CyclesArgs { out, .. })
        | Command::Compress(CompressArgs { out, .. })
        | Command::Remove(RemoveArgs { out, .. }) => out.as_deref().map(manifest_path),
        Command::Experiment(a) => Some(a.out.join("run.json")),
        Command::Translate(TranslateArgs { aggregation, .. }) | Command::Aggregate(AggregateArgs { aggregation, .. }) => {
            aggregation.out.as_ref().map(|dir| dir.join("run.json"))
        }
        Command::RenderStatements(a) => Some(a.out.join("run.json")),
        Command::Generate(_) | Command::Strategize(_) => None,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { EXIT_VALIDATION } else { 0 });
        }
    };
    let result = run(&cli);
    let code = match &result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err:#}");
            exit_code(err)
        }
    };
    if let Some(path) = cli.manifest.clone().or_else(|| default_run_manifest(&cli.command)) {
        let manifest = json!({
            "tool": "creditnet",
            "version": env!("CARGO_PKG_VERSION"),
            "args": std::env::args().skip(1).collect::<Vec<_>>(),
            "exit_code": code,
            "error": result.as_ref().err().map(|e| format!("{e:#}")),
        });
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            let _ = fs::create_dir_all(parent);
        }
        if let Err(err) = fs::write(&path, pretty(&manifest)) {
            eprintln!("error: writing manifest {}: {err}", path.display());
        }
    }
    ExitCode::from(code)
}
