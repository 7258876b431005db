//! Financial operations as pure network transformations: portfolio
//! compression of debt cycles and removal of individual debts.

mod cycles;

pub use cycles::{enumerate_simple_cycles, CycleLimits};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::CreditNetwork;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperationError {
    #[error("more than {limit} debt cycles; raise the limit or bound the cycle length")]
    CycleLimitExceeded { limit: usize },
    #[error("cycle {firms:?} uses edge ({borrower}, {lender}) which carries no liability")]
    StaleCycle {
        firms: Vec<usize>,
        borrower: usize,
        lender: usize,
    },
    #[error("invalid cycle {firms:?}: {reason}")]
    InvalidCycle { firms: Vec<usize>, reason: String },
    #[error("firm {borrower} owes nothing to firm {lender}")]
    NoSuchDebt { borrower: usize, lender: usize },
    #[error("debt ({borrower}, {lender}) listed more than once")]
    DuplicateEdge { borrower: usize, lender: usize },
    #[error("firm index {firm} out of range for a network of {n} firms")]
    UnknownFirm { firm: usize, n: usize },
    #[error("a firm cannot owe itself (firm {0})")]
    SelfLoop(usize),
}

/// A simple directed cycle of debts together with its smallest liability.
///
/// Firms are stored rotated so the smallest index comes first; consecutive
/// firms (and last to first) are borrower/lender pairs. Serializes as the
/// bare array of firm indices.
#[derive(Debug, Clone, PartialEq)]
pub struct DebtCycle {
    firms: Vec<usize>,
    min_liability: f64,
}

impl DebtCycle {
    /// Validates `firms` as a cycle of positive liabilities in `network`.
    pub fn new(network: &CreditNetwork, firms: Vec<usize>) -> Result<Self, OperationError> {
        let n = network.len();
        if firms.len() < 2 {
            return Err(OperationError::InvalidCycle {
                firms,
                reason: "a cycle needs at least two firms".into(),
            });
        }
        if let Some(&firm) = firms.iter().find(|&&f| f >= n) {
            return Err(OperationError::UnknownFirm { firm, n });
        }
        let mut seen = vec![false; n];
        for &f in &firms {
            if std::mem::replace(&mut seen[f], true) {
                return Err(OperationError::InvalidCycle {
                    firms,
                    reason: format!("firm {f} appears twice"),
                });
            }
        }
        let cycle = Self::new_unchecked(network, canonical_rotation(firms));
        let stale = cycle.edges().find(|&(b, l)| network.liability(b, l) <= 0.0);
        if let Some((borrower, lender)) = stale {
            return Err(OperationError::StaleCycle {
                firms: cycle.firms,
                borrower,
                lender,
            });
        }
        Ok(cycle)
    }

    pub(crate) fn new_unchecked(network: &CreditNetwork, firms: Vec<usize>) -> Self {
        let mut cycle = Self {
            firms,
            min_liability: 0.0,
        };
        cycle.min_liability = cycle.current_minimum(network);
        cycle
    }

    pub fn firms(&self) -> &[usize] {
        &self.firms
    }

    /// Number of firms on the cycle.
    pub fn len(&self) -> usize {
        self.firms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.firms.is_empty()
    }

    /// Smallest liability on the cycle when it was enumerated.
    pub fn min_liability(&self) -> f64 {
        self.min_liability
    }

    /// Weighted flow: smallest liability times the number of firms.
    pub fn weighted_flow(&self) -> f64 {
        self.min_liability * self.len() as f64
    }

    /// `(borrower, lender)` pairs along the cycle.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let k = self.firms.len();
        (0..k).map(move |t| (self.firms[t], self.firms[(t + 1) % k]))
    }

    fn current_minimum(&self, network: &CreditNetwork) -> f64 {
        self.edges()
            .map(|(b, l)| network.liability(b, l))
            .fold(f64::INFINITY, f64::min)
    }
}

impl Serialize for DebtCycle {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.firms.serialize(serializer)
    }
}

fn canonical_rotation(mut firms: Vec<usize>) -> Vec<usize> {
    if let Some(pos) = firms
        .iter()
        .enumerate()
        .min_by_key(|(_, &f)| f)
        .map(|(i, _)| i)
    {
        firms.rotate_left(pos);
    }
    firms
}

/// A debt from `borrower` to `lender`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "(usize, usize)", into = "(usize, usize)")]
pub struct DebtEdge {
    borrower: usize,
    lender: usize,
}

impl DebtEdge {
    pub fn new(borrower: usize, lender: usize) -> Result<Self, OperationError> {
        if borrower == lender {
            return Err(OperationError::SelfLoop(borrower));
        }
        Ok(Self { borrower, lender })
    }

    pub fn borrower(&self) -> usize {
        self.borrower
    }

    pub fn lender(&self) -> usize {
        self.lender
    }
}

impl TryFrom<(usize, usize)> for DebtEdge {
    type Error = OperationError;

    fn try_from((borrower, lender): (usize, usize)) -> Result<Self, Self::Error> {
        Self::new(borrower, lender)
    }
}

impl From<DebtEdge> for (usize, usize) {
    fn from(edge: DebtEdge) -> Self {
        (edge.borrower, edge.lender)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CompressionOutcome {
    Applied { amount: f64 },
    /// An earlier compression in the same sequence zeroed one of its edges.
    Skipped { zero_edge: (usize, usize) },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionStep {
    pub cycle: Vec<usize>,
    #[serde(flatten)]
    pub outcome: CompressionOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionReport {
    pub seed: u64,
    /// Steps in application order.
    pub steps: Vec<CompressionStep>,
}

impl CompressionReport {
    pub fn applied(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s.outcome, CompressionOutcome::Applied { .. }))
            .count()
    }
}

/// Order in which `cycles` are compressed: most firms first, equal lengths
/// in a seeded random order.
pub fn compression_order(cycles: &[DebtCycle], seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..cycles.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    order.sort_by(|&a, &b| cycles[b].len().cmp(&cycles[a].len()));
    order
}

/// Compresses `cycles` one after another, each by its smallest liability on
/// the current matrix. A cycle whose edge was already zeroed by an earlier
/// compression is skipped and reported as such.
pub fn compress_cycles(
    network: &CreditNetwork,
    cycles: &[DebtCycle],
    seed: u64,
) -> Result<(CreditNetwork, CompressionReport), OperationError> {
    let n = network.len();
    for cycle in cycles {
        if let Some(&firm) = cycle.firms.iter().find(|&&f| f >= n) {
            return Err(OperationError::UnknownFirm { firm, n });
        }
        let stale = cycle.edges().find(|&(b, l)| network.liability(b, l) <= 0.0);
        if let Some((borrower, lender)) = stale {
            return Err(OperationError::StaleCycle {
                firms: cycle.firms.clone(),
                borrower,
                lender,
            });
        }
    }
    let mut matrix = network.flat_liabilities().to_vec();
    let mut steps = Vec::with_capacity(cycles.len());
    for index in compression_order(cycles, seed) {
        let cycle = &cycles[index];
        let zero_edge = cycle.edges().find(|&(b, l)| matrix[b * n + l] <= 0.0);
        let outcome = match zero_edge {
            Some(zero_edge) => CompressionOutcome::Skipped { zero_edge },
            None => {
                let amount = cycle
                    .edges()
                    .map(|(b, l)| matrix[b * n + l])
                    .fold(f64::INFINITY, f64::min);
                for (b, l) in cycle.edges() {
                    matrix[b * n + l] -= amount;
                }
                CompressionOutcome::Applied { amount }
            }
        };
        steps.push(CompressionStep {
            cycle: cycle.firms.clone(),
            outcome,
        });
    }
    Ok((
        network.with_flat_liabilities(matrix),
        CompressionReport { seed, steps },
    ))
}

/// Zeroes the listed debts. Every edge must carry a positive liability and
/// appear only once.
pub fn remove_debts(network: &CreditNetwork, edges: &[DebtEdge]) -> Result<CreditNetwork, OperationError> {
    let n = network.len();
    let mut matrix = network.flat_liabilities().to_vec();
    for edge in edges {
        for firm in [edge.borrower, edge.lender] {
            if firm >= n {
                return Err(OperationError::UnknownFirm { firm, n });
            }
        }
        let slot = &mut matrix[edge.borrower * n + edge.lender];
        if *slot <= 0.0 {
            return Err(if network.liability(edge.borrower, edge.lender) > 0.0 {
                OperationError::DuplicateEdge {
                    borrower: edge.borrower,
                    lender: edge.lender,
                }
            } else {
                OperationError::NoSuchDebt {
                    borrower: edge.borrower,
                    lender: edge.lender,
                }
            });
        }
        *slot = 0.0;
    }
    Ok(network.with_flat_liabilities(matrix))
}
