//! Execution plans for the two operations and the strategies that propose
//! them: no-op, random subsets, the weighted-flow and shortfall-curing
//! greedy heuristics, an exhaustive oracle, and LLM suggestions.
//!
//! Every plan is scored by clearing the transformed network and summing the
//! firms' total assets.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clearing::{clear, ClearingConfig, ClearingError};
use crate::model::{CreditNetwork, AMOUNT_TOLERANCE};
use crate::operations::{
    compress_cycles, enumerate_simple_cycles, remove_debts, CompressionReport, CycleLimits, DebtCycle,
    DebtEdge, OperationError,
};
use crate::statements::{llm_suggest, LlmClient, SuggestError};

/// Totals closer than this are treated as equal when ranking subsets.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Hard ceiling on oracle candidates regardless of configuration.
pub const ORACLE_CEILING: usize = 30;

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error(transparent)]
    Operation(#[from] OperationError),
    #[error(transparent)]
    Clearing(#[from] ClearingError),
    #[error("search space too large: {candidates} candidates exceeds the cap of {cap}")]
    SearchSpaceTooLarge { candidates: usize, cap: usize },
    #[error("plan kind {plan:?} does not match operation {operation:?}")]
    KindMismatch { plan: PlanKind, operation: OperationKind },
    #[error("the llm strategy needs a configured client")]
    MissingLlmClient,
    #[error(transparent)]
    Suggest(#[from] SuggestError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperationKind {
    Compression,
    Removal,
}

impl fmt::Display for OperationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Compression => "compression",
            Self::Removal => "removal",
        })
    }
}

impl FromStr for OperationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "compression" => Ok(Self::Compression),
            "removal" => Ok(Self::Removal),
            other => Err(format!("unknown operation {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanKind {
    None,
    Compression,
    Removal,
}

impl From<OperationKind> for PlanKind {
    fn from(kind: OperationKind) -> Self {
        match kind {
            OperationKind::Compression => Self::Compression,
            OperationKind::Removal => Self::Removal,
        }
    }
}

/// Which strategy produced a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyName {
    None,
    Random,
    Greedy,
    Oracle,
    Llm,
}

impl StrategyName {
    pub const ALL: [StrategyName; 5] = [
        StrategyName::None,
        StrategyName::Random,
        StrategyName::Greedy,
        StrategyName::Oracle,
        StrategyName::Llm,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Random => "random",
            Self::Greedy => "greedy",
            Self::Oracle => "oracle",
            Self::Llm => "llm",
        }
    }

    /// Row label used in the text tables.
    pub fn display_name(&self, kind: OperationKind) -> &'static str {
        match (self, kind) {
            (Self::None, OperationKind::Compression) => "No Compression",
            (Self::None, OperationKind::Removal) => "No Removal",
            (Self::Random, OperationKind::Compression) => "Random Compression",
            (Self::Random, OperationKind::Removal) => "Random Removal",
            (Self::Greedy, _) => "Heuristic Baseline",
            (Self::Oracle, _) => "Exhaustive Oracle",
            (Self::Llm, _) => "LLM Suggestion",
        }
    }
}

impl fmt::Display for StrategyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|name| name.as_str() == s)
            .ok_or_else(|| format!("unknown strategy {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategyConfig {
    pub clearing: ClearingConfig,
    pub cycle_limits: CycleLimits,
    /// Cycles kept by the weighted-flow greedy.
    pub top_k: usize,
    /// Seed for the random order among equally long cycles during compression.
    pub order_seed: u64,
    /// Oracle refuses to search more candidates than this.
    pub max_candidates: usize,
    /// Greedy removal refuses firms with more outgoing debts than this.
    pub max_out_degree: usize,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        Self {
            clearing: ClearingConfig::default(),
            cycle_limits: CycleLimits::default(),
            top_k: 3,
            order_seed: 0,
            max_candidates: 20,
            max_out_degree: 20,
        }
    }
}

/// A concrete execution of one operation.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionPlan {
    kind: PlanKind,
    cycles: Vec<DebtCycle>,
    edges: Vec<DebtEdge>,
    seed: u64,
    provenance: StrategyName,
    rationale: String,
}

impl ExecutionPlan {
    pub fn none() -> Self {
        Self {
            kind: PlanKind::None,
            cycles: Vec::new(),
            edges: Vec::new(),
            seed: 0,
            provenance: StrategyName::None,
            rationale: String::new(),
        }
    }

    pub fn compression(cycles: Vec<DebtCycle>, seed: u64, provenance: StrategyName) -> Self {
        Self {
            kind: PlanKind::Compression,
            cycles,
            edges: Vec::new(),
            seed,
            provenance,
            rationale: String::new(),
        }
    }

    pub fn removal(edges: Vec<DebtEdge>, seed: u64, provenance: StrategyName) -> Self {
        Self {
            kind: PlanKind::Removal,
            cycles: Vec::new(),
            edges,
            seed,
            provenance,
            rationale: String::new(),
        }
    }

    /// An empty plan for `kind`.
    pub fn empty(kind: OperationKind, seed: u64, provenance: StrategyName) -> Self {
        match kind {
            OperationKind::Compression => Self::compression(Vec::new(), seed, provenance),
            OperationKind::Removal => Self::removal(Vec::new(), seed, provenance),
        }
    }

    pub fn with_rationale(mut self, rationale: impl Into<String>) -> Self {
        self.rationale = rationale.into();
        self
    }

    pub fn kind(&self) -> PlanKind {
        self.kind
    }

    pub fn cycles(&self) -> &[DebtCycle] {
        &self.cycles
    }

    pub fn edges(&self) -> &[DebtEdge] {
        &self.edges
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn provenance(&self) -> StrategyName {
        self.provenance
    }

    pub fn rationale(&self) -> &str {
        &self.rationale
    }

    /// Number of cycles or edges in the plan.
    pub fn size(&self) -> usize {
        self.cycles.len() + self.edges.len()
    }

    /// Same selection regardless of provenance and rationale.
    pub fn same_selection(&self, other: &ExecutionPlan) -> bool {
        let firms = |p: &ExecutionPlan| p.cycles.iter().map(|c| c.firms().to_vec()).collect::<Vec<_>>();
        let mut a = self.edges.clone();
        let mut b = other.edges.clone();
        a.sort();
        b.sort();
        let mut ca = firms(self);
        let mut cb = firms(other);
        ca.sort();
        cb.sort();
        self.kind == other.kind && a == b && ca == cb
    }

    pub fn to_file(&self) -> PlanFile {
        PlanFile {
            kind: self.kind,
            cycles: self.cycles.iter().map(|c| c.firms().to_vec()).collect(),
            edges: self.edges.clone(),
            seed: self.seed,
            provenance: self.provenance,
            rationale: self.rationale.clone(),
        }
    }

    /// Rebuilds a plan from its file form, validating it against `network`.
    pub fn from_file(network: &CreditNetwork, file: PlanFile) -> Result<Self, OperationError> {
        let cycles = file
            .cycles
            .into_iter()
            .map(|firms| DebtCycle::new(network, firms))
            .collect::<Result<Vec<_>, _>>()?;
        for edge in &file.edges {
            if edge.borrower().max(edge.lender()) >= network.len()
                || network.liability(edge.borrower(), edge.lender()) <= 0.0
            {
                return Err(OperationError::NoSuchDebt {
                    borrower: edge.borrower(),
                    lender: edge.lender(),
                });
            }
        }
        let plan = Self {
            kind: file.kind,
            cycles,
            edges: file.edges,
            seed: file.seed,
            provenance: file.provenance,
            rationale: file.rationale,
        };
        plan.check_shape()
            .map_err(|reason| OperationError::InvalidCycle {
                firms: Vec::new(),
                reason,
            })?;
        Ok(plan)
    }

    fn check_shape(&self) -> Result<(), String> {
        match self.kind {
            PlanKind::None if self.size() > 0 => Err("a none plan must be empty".into()),
            PlanKind::Compression if !self.edges.is_empty() => {
                Err("a compression plan cannot list edges".into())
            }
            PlanKind::Removal if !self.cycles.is_empty() => {
                Err("a removal plan cannot list cycles".into())
            }
            _ => Ok(()),
        }
    }
}

impl Serialize for ExecutionPlan {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_file().serialize(serializer)
    }
}

/// JSON form of an execution plan: cycles as arrays of firm indices, edges
/// as `[borrower, lender]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    pub kind: PlanKind,
    #[serde(default)]
    pub cycles: Vec<Vec<usize>>,
    #[serde(default)]
    pub edges: Vec<DebtEdge>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_provenance")]
    pub provenance: StrategyName,
    #[serde(default)]
    pub rationale: String,
}

fn default_provenance() -> StrategyName {
    StrategyName::None
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClearingDiagnostics {
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectiveReport {
    pub plan: ExecutionPlan,
    pub pre_total: f64,
    pub post_total: f64,
    pub pre_defaults: usize,
    pub post_defaults: usize,
    pub pre_clearing: ClearingDiagnostics,
    pub post_clearing: ClearingDiagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compression: Option<CompressionReport>,
}

/// Applies `plan` to a copy of `network`.
pub fn apply_plan(
    network: &CreditNetwork,
    plan: &ExecutionPlan,
) -> Result<(CreditNetwork, Option<CompressionReport>), OperationError> {
    match plan.kind {
        PlanKind::None => Ok((network.clone(), None)),
        PlanKind::Compression => {
            let (out, report) = compress_cycles(network, &plan.cycles, plan.seed)?;
            Ok((out, Some(report)))
        }
        PlanKind::Removal => Ok((remove_debts(network, &plan.edges)?, None)),
    }
}

/// Clears `network` before and after applying `plan`.
pub fn evaluate_plan(
    network: &CreditNetwork,
    plan: &ExecutionPlan,
    config: &ClearingConfig,
) -> Result<ObjectiveReport, StrategyError> {
    let pre = clear(network, config)?;
    let (after, compression) = apply_plan(network, plan)?;
    let post = clear(&after, config)?;
    Ok(ObjectiveReport {
        plan: plan.clone(),
        pre_total: pre.total_assets(),
        post_total: post.total_assets(),
        pre_defaults: pre.default_count(),
        post_defaults: post.default_count(),
        pre_clearing: ClearingDiagnostics {
            iterations: pre.iterations,
            residual: pre.residual,
        },
        post_clearing: ClearingDiagnostics {
            iterations: post.iterations,
            residual: post.residual,
        },
        compression,
    })
}

pub fn plan_none(_network: &CreditNetwork) -> ExecutionPlan {
    ExecutionPlan::none()
}

/// Includes each candidate cycle or debt independently with probability 1/2.
pub fn plan_random(
    network: &CreditNetwork,
    kind: OperationKind,
    selection_seed: u64,
    config: &StrategyConfig,
) -> Result<ExecutionPlan, StrategyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(selection_seed);
    let plan = match kind {
        OperationKind::Compression => {
            let cycles = enumerate_simple_cycles(network, &config.cycle_limits)?
                .into_iter()
                .filter(|_| rng.gen_bool(0.5))
                .collect();
            ExecutionPlan::compression(cycles, config.order_seed, StrategyName::Random)
        }
        OperationKind::Removal => {
            let edges = removal_candidates(network)
                .into_iter()
                .filter(|_| rng.gen_bool(0.5))
                .collect();
            ExecutionPlan::removal(edges, config.order_seed, StrategyName::Random)
        }
    };
    Ok(plan.with_rationale(format!("random subset, selection seed {selection_seed}")))
}

fn removal_candidates(network: &CreditNetwork) -> Vec<DebtEdge> {
    network
        .edges()
        .into_iter()
        .map(|(b, l)| DebtEdge::new(b, l).expect("networks have no self-loops"))
        .collect()
}

/// Keeps the `top_k` cycles of highest weighted flow (smallest liability
/// times number of firms), listed most-firms-first.
pub fn plan_greedy_compression(
    network: &CreditNetwork,
    config: &StrategyConfig,
) -> Result<ExecutionPlan, StrategyError> {
    let mut cycles = enumerate_simple_cycles(network, &config.cycle_limits)?;
    cycles.sort_by(|a, b| {
        b.weighted_flow()
            .total_cmp(&a.weighted_flow())
            .then_with(|| b.len().cmp(&a.len()))
            .then_with(|| a.firms().cmp(b.firms()))
    });
    cycles.truncate(config.top_k);
    cycles.sort_by(|a, b| b.len().cmp(&a.len()));
    let rationale = format!("top {} cycles by weighted flow", cycles.len());
    Ok(ExecutionPlan::compression(cycles, config.order_seed, StrategyName::Greedy).with_rationale(rationale))
}

/// Restores solvency of defaulted firms one at a time, in increasing order
/// of shortfall, by removing the cheapest set of their outgoing debts that
/// covers the shortfall without exceeding `(1 - alpha)` of their assets.
///
/// A set is only committed if, after clearing again, the firm and every
/// firm cured before it are solvent; otherwise the next cheapest set is
/// tried and the firm is skipped when none works.
pub fn plan_greedy_removal(
    network: &CreditNetwork,
    config: &StrategyConfig,
) -> Result<ExecutionPlan, StrategyError> {
    let clearing = &config.clearing;
    let n = network.len();
    let mut current = network.clone();
    let mut removed: Vec<DebtEdge> = Vec::new();
    let mut visited = vec![false; n];
    let mut cured: Vec<usize> = Vec::new();
    let mut state = clear(&current, clearing)?;
    loop {
        let next = state
            .default_set
            .iter()
            .copied()
            .filter(|&i| !visited[i])
            .map(|i| {
                let m = state.metrics[i];
                (m.total_liability - m.total_assets, i)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let Some((shortfall, firm)) = next else {
            break;
        };
        visited[firm] = true;
        let budget = (1.0 - clearing.alpha) * state.metrics[firm].total_assets;
        let outgoing: Vec<(usize, f64)> = current
            .row(firm)
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 0.0)
            .map(|(j, &l)| (j, l))
            .collect();
        if outgoing.len() > config.max_out_degree {
            return Err(StrategyError::SearchSpaceTooLarge {
                candidates: outgoing.len(),
                cap: config.max_out_degree,
            });
        }
        let mut subsets: Vec<(f64, u32, u64)> = (1u64..1 << outgoing.len())
            .filter_map(|mask| {
                let total: f64 = outgoing
                    .iter()
                    .enumerate()
                    .filter(|(bit, _)| mask >> bit & 1 == 1)
                    .map(|(_, &(_, l))| l)
                    .sum();
                let covers = total >= shortfall - AMOUNT_TOLERANCE;
                let affordable = total <= budget + AMOUNT_TOLERANCE;
                (covers && affordable).then_some((total, mask.count_ones(), mask))
            })
            .collect();
        subsets.sort_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then(a.1.cmp(&b.1))
                .then_with(|| lex_order(a.2, b.2))
        });
        for (_, _, mask) in subsets {
            let edges: Vec<DebtEdge> = outgoing
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask >> bit & 1 == 1)
                .map(|(_, &(lender, _))| DebtEdge::new(firm, lender).expect("no self-loops"))
                .collect();
            let candidate = remove_debts(&current, &edges)?;
            let outcome = clear(&candidate, clearing)?;
            let stays_cured = cured
                .iter()
                .chain(std::iter::once(&firm))
                .all(|&i| outcome.metrics[i].solvent);
            if stays_cured {
                current = candidate;
                state = outcome;
                removed.extend(edges);
                cured.push(firm);
                break;
            }
        }
    }
    removed.sort();
    let rationale = format!("cured firms {cured:?}");
    Ok(ExecutionPlan::removal(removed, config.order_seed, StrategyName::Greedy).with_rationale(rationale))
}

/// Orders equal-sized subsets by their sorted member lists.
fn lex_order(a: u64, b: u64) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    if a == b {
        return Ordering::Equal;
    }
    let lowest = (a ^ b).trailing_zeros();
    if a >> lowest & 1 == 1 {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

/// Result of an exhaustive subset search.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSearch {
    pub plan: ExecutionPlan,
    pub best_total: f64,
    pub subsets_evaluated: usize,
}

/// Evaluates every subset of candidates and returns the one maximizing the
/// post-clearing total assets; ties go to fewer elements, then to the
/// lexicographically smaller candidate list.
pub fn plan_brute_force(
    network: &CreditNetwork,
    kind: OperationKind,
    config: &StrategyConfig,
) -> Result<ExecutionPlan, StrategyError> {
    brute_force_search(network, kind, config).map(|search| search.plan)
}

pub fn brute_force_search(
    network: &CreditNetwork,
    kind: OperationKind,
    config: &StrategyConfig,
) -> Result<OracleSearch, StrategyError> {
    let cap = config.max_candidates.min(ORACLE_CEILING);
    match kind {
        OperationKind::Compression => {
            let cycles = enumerate_simple_cycles(network, &config.cycle_limits)?;
            check_cap(cycles.len(), cap)?;
            let pick = |mask: u64| -> Vec<DebtCycle> {
                cycles
                    .iter()
                    .enumerate()
                    .filter(|(bit, _)| mask >> bit & 1 == 1)
                    .map(|(_, c)| c.clone())
                    .collect()
            };
            let (mask, best_total, evaluated) = search(cycles.len(), |mask| {
                let (after, _) = compress_cycles(network, &pick(mask), config.order_seed)?;
                Ok(clear(&after, &config.clearing)?.total_assets())
            })?;
            Ok(OracleSearch {
                plan: ExecutionPlan::compression(pick(mask), config.order_seed, StrategyName::Oracle)
                    .with_rationale(format!("best of {evaluated} subsets")),
                best_total,
                subsets_evaluated: evaluated,
            })
        }
        OperationKind::Removal => {
            let edges = removal_candidates(network);
            check_cap(edges.len(), cap)?;
            let pick = |mask: u64| -> Vec<DebtEdge> {
                edges
                    .iter()
                    .enumerate()
                    .filter(|(bit, _)| mask >> bit & 1 == 1)
                    .map(|(_, e)| *e)
                    .collect()
            };
            let (mask, best_total, evaluated) = search(edges.len(), |mask| {
                let after = remove_debts(network, &pick(mask))?;
                Ok(clear(&after, &config.clearing)?.total_assets())
            })?;
            Ok(OracleSearch {
                plan: ExecutionPlan::removal(pick(mask), config.order_seed, StrategyName::Oracle)
                    .with_rationale(format!("best of {evaluated} subsets")),
                best_total,
                subsets_evaluated: evaluated,
            })
        }
    }
}

fn check_cap(candidates: usize, cap: usize) -> Result<(), StrategyError> {
    if candidates > cap {
        Err(StrategyError::SearchSpaceTooLarge { candidates, cap })
    } else {
        Ok(())
    }
}

/// Scores every mask in parallel, then reduces sequentially in mask order so
/// the winner does not depend on scheduling.
fn search(
    candidates: usize,
    score: impl Fn(u64) -> Result<f64, StrategyError> + Sync,
) -> Result<(u64, f64, usize), StrategyError> {
    let count = 1u64 << candidates;
    let totals: Vec<f64> = (0..count)
        .into_par_iter()
        .map(&score)
        .collect::<Result<_, _>>()?;
    let mut best = 0u64;
    let mut best_total = totals[0];
    for (mask, &total) in totals.iter().enumerate().skip(1) {
        let mask = mask as u64;
        let better = if total > best_total + TIE_TOLERANCE {
            true
        } else if (total - best_total).abs() <= TIE_TOLERANCE {
            let (size, best_size) = (mask.count_ones(), best.count_ones());
            size < best_size || (size == best_size && lex_order(mask, best).is_lt())
        } else {
            false
        };
        if better {
            best = mask;
            best_total = total;
        }
    }
    Ok((best, best_total, totals.len()))
}

/// One strategy's outcome on one network.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyRow {
    pub strategy: StrategyName,
    /// Post-operation total assets; mean over seeds for the random strategy.
    /// Absent when the strategy could not run (oracle beyond its cap).
    pub post_total: Option<f64>,
    pub min_total: Option<f64>,
    pub max_total: Option<f64>,
    pub plan_size: f64,
    pub defaults: f64,
    #[serde(skip)]
    pub runtime: Duration,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub kind: OperationKind,
    pub pre_total: f64,
    pub pre_defaults: usize,
    pub rows: Vec<StrategyRow>,
}

impl Comparison {
    pub fn row(&self, strategy: StrategyName) -> Option<&StrategyRow> {
        self.rows.iter().find(|r| r.strategy == strategy)
    }
}

/// Builds the plan a single named strategy proposes. `selection_seed` only
/// matters for the random strategy.
pub fn propose(
    network: &CreditNetwork,
    kind: OperationKind,
    strategy: StrategyName,
    selection_seed: u64,
    config: &StrategyConfig,
    llm: Option<&dyn LlmClient>,
) -> Result<ExecutionPlan, StrategyError> {
    match strategy {
        StrategyName::None => Ok(plan_none(network)),
        StrategyName::Random => plan_random(network, kind, selection_seed, config),
        StrategyName::Greedy => match kind {
            OperationKind::Compression => plan_greedy_compression(network, config),
            OperationKind::Removal => plan_greedy_removal(network, config),
        },
        StrategyName::Oracle => plan_brute_force(network, kind, config),
        StrategyName::Llm => {
            let client = llm.ok_or(StrategyError::MissingLlmClient)?;
            Ok(llm_suggest(client, network, kind, config)?)
        }
    }
}

/// Evaluates each requested strategy on `network`. The random strategy is
/// run once per entry of `random_seeds` and summarized by mean, min and max.
pub fn compare_strategies(
    network: &CreditNetwork,
    kind: OperationKind,
    strategies: &[StrategyName],
    config: &StrategyConfig,
    random_seeds: &[u64],
    llm: Option<&dyn LlmClient>,
) -> Result<Comparison, StrategyError> {
    let pre = clear(network, &config.clearing)?;
    let mut rows = Vec::with_capacity(strategies.len());
    for &strategy in strategies {
        let started = Instant::now();
        let seeds: &[u64] = if strategy == StrategyName::Random {
            random_seeds
        } else {
            &[0]
        };
        let mut totals = Vec::with_capacity(seeds.len());
        let mut sizes = 0.0;
        let mut defaults = 0.0;
        let mut note = None;
        for &seed in seeds {
            let plan = match propose(network, kind, strategy, seed, config, llm) {
                Ok(plan) => plan,
                Err(StrategyError::SearchSpaceTooLarge { candidates, cap }) if strategy == StrategyName::Oracle => {
                    note = Some(format!("skipped: {candidates} candidates exceeds cap {cap}"));
                    break;
                }
                Err(err) => return Err(err),
            };
            let report = evaluate_plan(network, &plan, &config.clearing)?;
            totals.push(report.post_total);
            sizes += plan.size() as f64;
            defaults += report.post_defaults as f64;
        }
        let runs = totals.len() as f64;
        let summary = |f: fn(f64, f64) -> f64| totals.iter().copied().reduce(f);
        rows.push(StrategyRow {
            strategy,
            post_total: (!totals.is_empty()).then(|| totals.iter().sum::<f64>() / runs),
            min_total: summary(f64::min),
            max_total: summary(f64::max),
            plan_size: if runs > 0.0 { sizes / runs } else { 0.0 },
            defaults: if runs > 0.0 { defaults / runs } else { 0.0 },
            runtime: started.elapsed(),
            note,
        });
    }
    Ok(Comparison {
        kind,
        pre_total: pre.total_assets(),
        pre_defaults: pre.default_count(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(l: Vec<Vec<f64>>, e: Vec<f64>) -> CreditNetwork {
        CreditNetwork::unlabelled(l, e).unwrap()
    }

    fn figure_one() -> CreditNetwork {
        net(
            vec![
                vec![0.0, 5.0, 0.0],
                vec![0.0, 0.0, 5.0],
                vec![0.0, 0.0, 0.0],
            ],
            vec![6.0, 2.0, 3.0],
        )
    }

    fn mutual() -> CreditNetwork {
        net(vec![vec![0.0, 10.0], vec![6.0, 0.0]], vec![2.0, 0.0])
    }

    fn complete_three() -> CreditNetwork {
        net(
            vec![
                vec![0.0, 4.0, 7.0],
                vec![5.0, 0.0, 3.0],
                vec![6.0, 9.0, 0.0],
            ],
            vec![1.0, 2.0, 3.0],
        )
    }

    #[test]
    fn none_plan_is_identity() {
        let cfg = ClearingConfig::default();
        let report = evaluate_plan(&figure_one(), &plan_none(&figure_one()), &cfg).unwrap();
        assert_eq!(report.pre_total, 21.0);
        assert_eq!(report.post_total, 21.0);
        assert_eq!(report.plan.provenance(), StrategyName::None);
        assert_eq!(report.plan.kind(), PlanKind::None);
    }

    #[test]
    fn compressing_mutual_default_is_harmful() {
        let n = mutual();
        let cycle = DebtCycle::new(&n, vec![0, 1]).unwrap();
        let plan = ExecutionPlan::compression(vec![cycle], 0, StrategyName::Greedy);
        let report = evaluate_plan(&n, &plan, &ClearingConfig::default()).unwrap();
        assert!((report.pre_total - 4.0).abs() < 1e-8);
        assert!((report.post_total - 3.0).abs() < 1e-8);
        let (after, _) = apply_plan(&n, &plan).unwrap();
        assert_eq!(after.liability_matrix(), vec![vec![0.0, 4.0], vec![0.0, 0.0]]);
    }

    #[test]
    fn random_plans_are_deterministic() {
        let cfg = StrategyConfig::default();
        let n = complete_three();
        let a = plan_random(&n, OperationKind::Compression, 42, &cfg).unwrap();
        let b = plan_random(&n, OperationKind::Compression, 42, &cfg).unwrap();
        assert_eq!(a, b);
        let acyclic = plan_random(&figure_one(), OperationKind::Compression, 42, &cfg).unwrap();
        assert_eq!(acyclic.size(), 0);
    }

    #[test]
    fn random_golden_subset() {
        let cfg = StrategyConfig::default();
        let plan = plan_random(&complete_three(), OperationKind::Compression, 7, &cfg).unwrap();
        let firms: Vec<&[usize]> = plan.cycles().iter().map(|c| c.firms()).collect();
        assert_eq!(firms, RANDOM_GOLDEN_SEED_7);
    }

    // captured once from ChaCha8 seed 7 over the five cycles
    const RANDOM_GOLDEN_SEED_7: [&[usize]; 2] = [&[0, 1, 2], &[0, 2, 1]];

    #[test]
    fn greedy_compression_orders_by_size() {
        // 2-cycle 0<->1 with minimum 10 (flow 20), 3-cycle 2->3->4->2 with minimum 5 (flow 15)
        let mut l = vec![vec![0.0; 5]; 5];
        l[0][1] = 10.0;
        l[1][0] = 12.0;
        l[2][3] = 5.0;
        l[3][4] = 8.0;
        l[4][2] = 9.0;
        let n = net(l, vec![1.0; 5]);
        let plan = plan_greedy_compression(&n, &StrategyConfig::default()).unwrap();
        let firms: Vec<&[usize]> = plan.cycles().iter().map(|c| c.firms()).collect();
        assert_eq!(firms, vec![&[2, 3, 4][..], &[0, 1][..]]);
        assert_eq!(plan.provenance(), StrategyName::Greedy);

        let empty = plan_greedy_compression(&figure_one(), &StrategyConfig::default()).unwrap();
        assert_eq!(empty.size(), 0);
    }

    #[test]
    fn greedy_compression_tie_break() {
        // two disjoint 2-cycles with identical flows
        let mut l = vec![vec![0.0; 4]; 4];
        l[0][1] = 3.0;
        l[1][0] = 3.0;
        l[2][3] = 3.0;
        l[3][2] = 3.0;
        let n = net(l, vec![1.0; 4]);
        let cfg = StrategyConfig {
            top_k: 1,
            ..Default::default()
        };
        let plan = plan_greedy_compression(&n, &cfg).unwrap();
        assert_eq!(plan.cycles()[0].firms(), &[0, 1]);
    }

    #[test]
    fn greedy_removal_boundary() {
        let n = net(
            vec![
                vec![0.0, 6.0, 5.0],
                vec![0.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0],
            ],
            vec![10.0, 0.0, 0.0],
        );
        let plan = plan_greedy_removal(&n, &StrategyConfig::default()).unwrap();
        assert_eq!(plan.edges(), &[DebtEdge::new(0, 2).unwrap()]);
    }

    #[test]
    fn greedy_removal_skips_unaffordable() {
        // shortfall 2 can only be covered by the single 12 edge, budget is 5
        let n = net(vec![vec![0.0, 12.0], vec![0.0, 0.0]], vec![10.0, 0.0]);
        let plan = plan_greedy_removal(&n, &StrategyConfig::default()).unwrap();
        assert_eq!(plan.size(), 0);
        let solvent = plan_greedy_removal(&figure_one(), &StrategyConfig::default()).unwrap();
        assert_eq!(solvent.size(), 0);
    }

    #[test]
    fn oracle_on_mutual_default_is_empty() {
        let cfg = StrategyConfig::default();
        let search = brute_force_search(&mutual(), OperationKind::Compression, &cfg).unwrap();
        assert_eq!(search.plan.size(), 0);
        assert!((search.best_total - 4.0).abs() < 1e-8);
        assert_eq!(search.subsets_evaluated, 2);
        let acyclic = plan_brute_force(&figure_one(), OperationKind::Compression, &cfg).unwrap();
        assert_eq!(acyclic.size(), 0);
    }

    #[test]
    fn oracle_removal_unblocks_chain() {
        // firm 0 owes 10 to 1 and 1 to 2, holds 8; curing needs the 1-edge gone? No: shortfall 3.
        let n = net(
            vec![
                vec![0.0, 10.0, 1.0],
                vec![0.0, 0.0, 8.0],
                vec![0.0, 0.0, 0.0],
            ],
            vec![8.0, 0.0, 0.0],
        );
        let cfg = StrategyConfig::default();
        let pre = clear(&n, &cfg.clearing).unwrap().total_assets();
        let search = brute_force_search(&n, OperationKind::Removal, &cfg).unwrap();
        assert!(search.best_total > pre);
    }

    #[test]
    fn oracle_cap() {
        let cfg = StrategyConfig {
            max_candidates: 2,
            ..Default::default()
        };
        assert!(matches!(
            plan_brute_force(&complete_three(), OperationKind::Compression, &cfg),
            Err(StrategyError::SearchSpaceTooLarge { candidates: 5, cap: 2 })
        ));
    }

    #[test]
    fn lex_order_on_masks() {
        assert!(lex_order(0b011, 0b101).is_lt());
        assert!(lex_order(0b110, 0b101).is_gt());
        assert!(lex_order(0b1, 0b1).is_eq());
    }

    #[test]
    fn comparison_rows() {
        let cfg = StrategyConfig::default();
        let strategies = [
            StrategyName::None,
            StrategyName::Random,
            StrategyName::Greedy,
            StrategyName::Oracle,
        ];
        let cmp = compare_strategies(
            &complete_three(),
            OperationKind::Compression,
            &strategies,
            &cfg,
            &[1, 2, 3],
            None,
        )
        .unwrap();
        assert_eq!(cmp.rows.len(), 4);
        let oracle = cmp.row(StrategyName::Oracle).unwrap().post_total.unwrap();
        for row in &cmp.rows {
            assert!(row.post_total.unwrap() <= oracle + 1e-6);
        }
        assert_eq!(cmp.row(StrategyName::None).unwrap().post_total, Some(cmp.pre_total));
        assert!(matches!(
            compare_strategies(
                &complete_three(),
                OperationKind::Compression,
                &[StrategyName::Llm],
                &cfg,
                &[],
                None
            ),
            Err(StrategyError::MissingLlmClient)
        ));
    }

    #[test]
    fn plan_file_round_trip() {
        let n = complete_three();
        let plan = plan_greedy_compression(&n, &StrategyConfig::default()).unwrap();
        let text = serde_json::to_string(&plan).unwrap();
        let file: PlanFile = serde_json::from_str(&text).unwrap();
        let back = ExecutionPlan::from_file(&n, file).unwrap();
        assert_eq!(back, plan);
    }
}
