//! Order-sensitive integration of per-firm records into system networks,
//! halting at the first contradiction between records.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::record::{ExtractionRecord, RecordError};
use crate::model::{components_with_indices, normalize_name, CreditNetwork};

pub const DEFAULT_CONFLICT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalyKind {
    AmountConflict,
    DuplicateReporter,
    NegativeAmount,
    SelfLoop,
    MalformedRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnomalyDetail {
    AmountConflict {
        borrower: String,
        lender: String,
        existing_amount: f64,
        existing_record: usize,
        claimed_amount: f64,
        difference: f64,
    },
    DuplicateReporter {
        firm: String,
        first_record: usize,
    },
    NegativeAmount {
        firm: String,
        /// Absent when the negative figure is the external assets.
        counterparty: Option<String>,
        amount: f64,
    },
    SelfLoop {
        firm: String,
    },
    MalformedRecord {
        error: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anomaly {
    /// Position of the offending record in integration order.
    pub record: usize,
    #[serde(flatten)]
    pub detail: AnomalyDetail,
    pub message: String,
}

impl Anomaly {
    pub fn kind(&self) -> AnomalyKind {
        match self.detail {
            AnomalyDetail::AmountConflict { .. } => AnomalyKind::AmountConflict,
            AnomalyDetail::DuplicateReporter { .. } => AnomalyKind::DuplicateReporter,
            AnomalyDetail::NegativeAmount { .. } => AnomalyKind::NegativeAmount,
            AnomalyDetail::SelfLoop { .. } => AnomalyKind::SelfLoop,
            AnomalyDetail::MalformedRecord { .. } => AnomalyKind::MalformedRecord,
        }
    }

    fn new(record: usize, detail: AnomalyDetail) -> Self {
        let message = match &detail {
            AnomalyDetail::AmountConflict {
                borrower,
                lender,
                existing_amount,
                existing_record,
                claimed_amount,
                difference,
            } => format!(
                "record {record} claims {borrower} owes {lender} {claimed_amount}, but record {existing_record} claims {existing_amount} (difference {difference})"
            ),
            AnomalyDetail::DuplicateReporter { firm, first_record } => {
                format!("{firm} already reported in record {first_record}")
            }
            AnomalyDetail::NegativeAmount {
                firm,
                counterparty: Some(other),
                amount,
            } => format!("record {record} lists a negative amount {amount} between {firm} and {other}"),
            AnomalyDetail::NegativeAmount { firm, amount, .. } => {
                format!("record {record} lists negative external assets {amount} for {firm}")
            }
            AnomalyDetail::SelfLoop { firm } => format!("record {record} lists {firm} owing itself"),
            AnomalyDetail::MalformedRecord { error } => format!("record {record} could not be read: {error}"),
        };
        Self {
            record,
            detail,
            message,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationMode {
    /// Stop at the first record with an anomaly.
    #[default]
    Halt,
    /// Keep checking later records against the state frozen at the first
    /// anomaly, without merging them.
    CollectAll,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AggregationOptions {
    pub tolerance: f64,
    pub mode: AggregationMode,
}

impl Default for AggregationOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_CONFLICT_TOLERANCE,
            mode: AggregationMode::Halt,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Claim {
    amount: f64,
    record: usize,
}

/// Everything integrated so far, keyed by normalized firm name.
#[derive(Debug, Clone, Default)]
pub struct AggregationState {
    /// Display name per firm in order of first appearance.
    firms: Vec<String>,
    index: HashMap<String, usize>,
    known_edges: HashMap<(usize, usize), Claim>,
    known_assets: HashMap<usize, Claim>,
    anomalies: Vec<Anomaly>,
}

impl AggregationState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn anomalies(&self) -> &[Anomaly] {
        &self.anomalies
    }

    pub fn firm_count(&self) -> usize {
        self.firms.len()
    }

    pub fn edge_count(&self) -> usize {
        self.known_edges.len()
    }

    /// Firms seen only as counterparties, in first-appearance order.
    pub fn counterparty_only(&self) -> Vec<&str> {
        (0..self.firms.len())
            .filter(|i| !self.known_assets.contains_key(i))
            .map(|i| self.firms[i].as_str())
            .collect()
    }

    fn lookup(&self, name: &str) -> Option<usize> {
        self.index.get(&normalize_name(name)).copied()
    }

    fn intern(&mut self, name: &str) -> usize {
        let key = normalize_name(name);
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        self.firms.push(name.trim().to_string());
        self.index.insert(key, self.firms.len() - 1);
        self.firms.len() - 1
    }

    /// Anomalies `record` would raise against the current state.
    fn check(&self, id: usize, record: &ExtractionRecord, tolerance: f64) -> Vec<Anomaly> {
        let mut found = Vec::new();
        let mut push = |detail| found.push(Anomaly::new(id, detail));
        if let Err(err) = record.validate() {
            // structural problems the dedicated kinds below do not cover
            let covered = record.external_assets < 0.0
                || record.liabilities.iter().any(|l| {
                    l.amount < 0.0 || normalize_name(&l.borrower) == normalize_name(&l.lender)
                });
            if !covered {
                push(AnomalyDetail::MalformedRecord { error: err.to_string() });
            }
        }
        if record.external_assets < 0.0 {
            push(AnomalyDetail::NegativeAmount {
                firm: record.firm.clone(),
                counterparty: None,
                amount: record.external_assets,
            });
        }
        if let Some(first) = self.lookup(&record.firm).and_then(|i| self.known_assets.get(&i)) {
            push(AnomalyDetail::DuplicateReporter {
                firm: record.firm.clone(),
                first_record: first.record,
            });
        }
        let mut within: HashMap<(String, String), f64> = HashMap::new();
        for l in &record.liabilities {
            let (b, d) = (normalize_name(&l.borrower), normalize_name(&l.lender));
            if b == d {
                push(AnomalyDetail::SelfLoop {
                    firm: l.borrower.clone(),
                });
                continue;
            }
            if l.amount < 0.0 {
                let (firm, other) = if b == normalize_name(&record.firm) {
                    (&l.borrower, &l.lender)
                } else {
                    (&l.lender, &l.borrower)
                };
                push(AnomalyDetail::NegativeAmount {
                    firm: firm.clone(),
                    counterparty: Some(other.clone()),
                    amount: l.amount,
                });
                continue;
            }
            let existing = self
                .lookup(&l.borrower)
                .zip(self.lookup(&l.lender))
                .and_then(|pair| self.known_edges.get(&pair).copied())
                .or_else(|| {
                    within.get(&(b.clone(), d.clone())).map(|&amount| Claim { amount, record: id })
                });
            match existing {
                Some(claim) if (claim.amount - l.amount).abs() > tolerance => {
                    push(AnomalyDetail::AmountConflict {
                        borrower: l.borrower.clone(),
                        lender: l.lender.clone(),
                        existing_amount: claim.amount,
                        existing_record: claim.record,
                        claimed_amount: l.amount,
                        difference: (claim.amount - l.amount).abs(),
                    })
                }
                Some(_) => {}
                None => {
                    within.insert((b, d), l.amount);
                }
            }
        }
        found
    }

    fn merge(&mut self, id: usize, record: &ExtractionRecord) {
        let firm = self.intern(&record.firm);
        self.known_assets.insert(
            firm,
            Claim {
                amount: record.external_assets,
                record: id,
            },
        );
        for l in &record.liabilities {
            let b = self.intern(&l.borrower);
            let d = self.intern(&l.lender);
            self.known_edges.entry((b, d)).or_insert(Claim {
                amount: l.amount,
                record: id,
            });
        }
    }

    /// Integrates `record` unless it contradicts the state. Returns whether
    /// it was merged; on anomalies the state only gains the anomalies.
    pub fn integrate_record(&mut self, id: usize, record: &ExtractionRecord, tolerance: f64) -> bool {
        let anomalies = self.check(id, record, tolerance);
        if anomalies.is_empty() {
            self.merge(id, record);
            true
        } else {
            self.anomalies.extend(anomalies);
            false
        }
    }

    /// Logs a record that could not be parsed at all.
    pub fn reject_malformed(&mut self, id: usize, error: &RecordError) {
        self.anomalies.push(Anomaly::new(
            id,
            AnomalyDetail::MalformedRecord {
                error: error.to_string(),
            },
        ));
    }

    /// The aggregate as one network per weakly connected component, firms
    /// in first-appearance order.
    pub fn materialize(&self) -> Vec<AggregatedNetwork> {
        let n = self.firms.len();
        let mut liabilities = vec![0.0; n * n];
        for (&(b, d), claim) in &self.known_edges {
            liabilities[b * n + d] = claim.amount;
        }
        let assets: Vec<f64> = (0..n)
            .map(|i| self.known_assets.get(&i).map_or(0.0, |c| c.amount))
            .collect();
        let whole = CreditNetwork::from_flat(self.firms.clone(), liabilities, assets)
            .expect("integrated records satisfy the model invariants");
        components_with_indices(&whole)
            .into_iter()
            .map(|component| AggregatedNetwork {
                assets_unknown: component
                    .firms
                    .iter()
                    .filter(|i| !self.known_assets.contains_key(i))
                    .map(|&i| self.firms[i].clone())
                    .collect(),
                network: component.network,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedNetwork {
    pub network: CreditNetwork,
    /// Firms that never filed a record; their external assets are set to 0.
    pub assets_unknown: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregationReport {
    pub networks: Vec<AggregatedNetwork>,
    pub anomalies: Vec<Anomaly>,
    pub halted_at: Option<usize>,
    pub records_integrated: usize,
}

/// Integrates records in order. Entries that failed to parse count as
/// malformed-record anomalies at their position.
pub fn aggregate_parsed<'a>(
    records: impl IntoIterator<Item = Result<&'a ExtractionRecord, &'a RecordError>>,
    options: &AggregationOptions,
) -> AggregationReport {
    let mut state = AggregationState::new();
    let mut halted_at = None;
    let mut integrated = 0;
    for (id, record) in records.into_iter().enumerate() {
        let merged = match (record, halted_at) {
            (Ok(record), None) => state.integrate_record(id, record, options.tolerance),
            (Ok(record), Some(_)) => {
                let anomalies = state.check(id, record, options.tolerance);
                state.anomalies.extend(anomalies);
                false
            }
            (Err(err), _) => {
                state.reject_malformed(id, err);
                false
            }
        };
        if merged {
            integrated += 1;
        } else if halted_at.is_none() {
            halted_at = Some(id);
            if options.mode == AggregationMode::Halt {
                break;
            }
        }
    }
    AggregationReport {
        networks: state.materialize(),
        anomalies: state.anomalies,
        halted_at,
        records_integrated: integrated,
    }
}

pub fn aggregate_statements(records: &[ExtractionRecord], options: &AggregationOptions) -> AggregationReport {
    aggregate_parsed(records.iter().map(Ok), options)
}
