//! Credit network data model.
//!
//! A [`CreditNetwork`] is the pair of a liability matrix and an external-asset
//! vector over a fixed, labelled set of firms. Entry `(i, j)` of the matrix is
//! the amount firm `i` owes firm `j`. All amounts are in millions.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance used for amount comparisons unless a caller supplies one.
pub const AMOUNT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("liability matrix is not square: row {row} has {len} entries, expected {expected}")]
    NonSquareMatrix {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("negative amount {value} at {location}")]
    NegativeAmount { location: String, value: f64 },
    #[error("non-finite amount at {location}")]
    NonFiniteAmount { location: String },
    #[error("firm {firm} has a nonzero self-liability {value}")]
    NonzeroDiagonal { firm: usize, value: f64 },
    #[error("duplicate firm label {label:?} (normalizes to {normalized:?})")]
    DuplicateLabel { label: String, normalized: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("payment {payment} from firm {borrower} to firm {lender} exceeds liability {liability}")]
    PaymentExceedsLiability {
        borrower: usize,
        lender: usize,
        payment: f64,
        liability: f64,
    },
}

/// Normalizes a firm name for comparison: trims, collapses internal
/// whitespace runs to one space and lowercases.
pub fn normalize_name(name: &str) -> String {
    name.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

fn check_amount(value: f64, location: impl FnOnce() -> String) -> Result<(), ModelError> {
    if !value.is_finite() {
        return Err(ModelError::NonFiniteAmount {
            location: location(),
        });
    }
    if value < 0.0 {
        return Err(ModelError::NegativeAmount {
            location: location(),
            value,
        });
    }
    Ok(())
}

/// A validated credit network. Immutable once constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct CreditNetwork {
    labels: Vec<String>,
    // row-major n x n
    liabilities: Vec<f64>,
    external_assets: Vec<f64>,
}

impl CreditNetwork {
    /// Builds a network from labels, a row-major liability matrix and the
    /// external-asset vector, validating every model invariant.
    pub fn new(
        labels: Vec<String>,
        liabilities: Vec<Vec<f64>>,
        external_assets: Vec<f64>,
    ) -> Result<Self, ModelError> {
        let n = liabilities.len();
        for (row, entries) in liabilities.iter().enumerate() {
            if entries.len() != n {
                return Err(ModelError::NonSquareMatrix {
                    row,
                    len: entries.len(),
                    expected: n,
                });
            }
        }
        if labels.len() != n {
            return Err(ModelError::DimensionMismatch(format!(
                "{} labels for a {n}x{n} liability matrix",
                labels.len()
            )));
        }
        if external_assets.len() != n {
            return Err(ModelError::DimensionMismatch(format!(
                "{} external assets for a {n}x{n} liability matrix",
                external_assets.len()
            )));
        }
        let flat: Vec<f64> = liabilities.into_iter().flatten().collect();
        Self::from_flat(labels, flat, external_assets)
    }

    /// Same as [`CreditNetwork::new`] but takes an already flattened row-major matrix.
    pub fn from_flat(
        labels: Vec<String>,
        liabilities: Vec<f64>,
        external_assets: Vec<f64>,
    ) -> Result<Self, ModelError> {
        let n = labels.len();
        if liabilities.len() != n * n {
            return Err(ModelError::DimensionMismatch(format!(
                "{} matrix entries for {n} firms",
                liabilities.len()
            )));
        }
        if external_assets.len() != n {
            return Err(ModelError::DimensionMismatch(format!(
                "{} external assets for {n} firms",
                external_assets.len()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let value = liabilities[i * n + j];
                check_amount(value, || format!("liability ({i}, {j})"))?;
                if i == j && value != 0.0 {
                    return Err(ModelError::NonzeroDiagonal { firm: i, value });
                }
            }
        }
        for (i, &value) in external_assets.iter().enumerate() {
            check_amount(value, || format!("external asset of firm {i}"))?;
        }
        let mut seen = HashSet::with_capacity(n);
        for label in &labels {
            let normalized = normalize_name(label);
            if !seen.insert(normalized.clone()) {
                return Err(ModelError::DuplicateLabel {
                    label: label.clone(),
                    normalized,
                });
            }
        }
        Ok(Self {
            labels,
            liabilities,
            external_assets,
        })
    }

    /// Builds a network with generated labels `Firm 0`, `Firm 1`, ...
    pub fn unlabelled(
        liabilities: Vec<Vec<f64>>,
        external_assets: Vec<f64>,
    ) -> Result<Self, ModelError> {
        let labels = default_labels(liabilities.len());
        Self::new(labels, liabilities, external_assets)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn external_assets(&self) -> &[f64] {
        &self.external_assets
    }

    pub fn liability(&self, borrower: usize, lender: usize) -> f64 {
        self.liabilities[borrower * self.len() + lender]
    }

    /// Liabilities owed by `borrower`, indexed by lender.
    pub fn row(&self, borrower: usize) -> &[f64] {
        let n = self.len();
        &self.liabilities[borrower * n..(borrower + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.len()).map(move |i| self.row(i))
    }

    pub fn liability_matrix(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub(crate) fn flat_liabilities(&self) -> &[f64] {
        &self.liabilities
    }

    /// Total liability `L_i` of a firm.
    pub fn total_liability(&self, firm: usize) -> f64 {
        self.row(firm).iter().sum()
    }

    /// Positive-liability edges `(borrower, lender)` in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.liability(i, j) > 0.0 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Index of the firm whose label matches `name` after normalization.
    pub fn find_label(&self, name: &str) -> Option<usize> {
        let target = normalize_name(name);
        self.labels
            .iter()
            .position(|label| normalize_name(label) == target)
    }

    /// Net position of each firm: total owed minus total owed to it.
    pub fn net_positions(&self) -> Vec<f64> {
        let n = self.len();
        let mut net = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                let l = self.liability(i, j);
                net[i] += l;
                net[j] -= l;
            }
        }
        net
    }

    /// Returns a copy with the given liability matrix, keeping labels and assets.
    pub(crate) fn with_flat_liabilities(&self, liabilities: Vec<f64>) -> Self {
        debug_assert_eq!(liabilities.len(), self.liabilities.len());
        Self {
            labels: self.labels.clone(),
            liabilities,
            external_assets: self.external_assets.clone(),
        }
    }

    /// Restriction of the network to `firms`, in the given order.
    pub fn restrict(&self, firms: &[usize]) -> Self {
        let labels = firms.iter().map(|&i| self.labels[i].clone()).collect();
        let assets = firms.iter().map(|&i| self.external_assets[i]).collect();
        let mut flat = Vec::with_capacity(firms.len() * firms.len());
        for &i in firms {
            for &j in firms {
                flat.push(self.liability(i, j));
            }
        }
        Self {
            labels,
            liabilities: flat,
            external_assets: assets,
        }
    }
}

pub fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("Firm {i}")).collect()
}

/// Actual payments between firms. Entry `(i, j)` is paid by `i` to `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PaymentMatrix {
    n: usize,
    payments: Vec<f64>,
}

impl PaymentMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            payments: vec![0.0; n * n],
        }
    }

    /// Payments equal to the full liabilities of `network`.
    pub fn full(network: &CreditNetwork) -> Self {
        Self {
            n: network.len(),
            payments: network.flat_liabilities().to_vec(),
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        let n = rows.len();
        for (row, entries) in rows.iter().enumerate() {
            if entries.len() != n {
                return Err(ModelError::NonSquareMatrix {
                    row,
                    len: entries.len(),
                    expected: n,
                });
            }
        }
        let payments: Vec<f64> = rows.into_iter().flatten().collect();
        for (k, &value) in payments.iter().enumerate() {
            check_amount(value, || format!("payment ({}, {})", k / n, k % n))?;
            if k / n == k % n && value != 0.0 {
                return Err(ModelError::NonzeroDiagonal { firm: k / n, value });
            }
        }
        Ok(Self { n, payments })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, payer: usize, payee: usize) -> f64 {
        self.payments[payer * self.n + payee]
    }

    pub fn row(&self, payer: usize) -> &[f64] {
        &self.payments[payer * self.n..(payer + 1) * self.n]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub(crate) fn as_flat(&self) -> &[f64] {
        &self.payments
    }

    pub(crate) fn as_flat_mut(&mut self) -> &mut [f64] {
        &mut self.payments
    }

    /// Total outgoing payments `p_i`.
    pub fn outgoing(&self, payer: usize) -> f64 {
        self.row(payer).iter().sum()
    }

    /// Incoming payments `Σ_j p_ji` for every firm, summed in payer order.
    pub fn incoming(&self) -> Vec<f64> {
        let n = self.n;
        let mut incoming = vec![0.0; n];
        for j in 0..n {
            for (i, slot) in incoming.iter_mut().enumerate() {
                *slot += self.payments[j * n + i];
            }
        }
        incoming
    }

    /// Largest absolute entry-wise difference.
    pub fn max_abs_diff(&self, other: &PaymentMatrix) -> f64 {
        self.payments
            .iter()
            .zip(&other.payments)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn check_against(&self, network: &CreditNetwork) -> Result<(), ModelError> {
        if self.n != network.len() {
            return Err(ModelError::DimensionMismatch(format!(
                "payment matrix is {0}x{0} but the network has {1} firms",
                self.n,
                network.len()
            )));
        }
        for i in 0..self.n {
            for j in 0..self.n {
                let payment = self.get(i, j);
                let liability = network.liability(i, j);
                if payment > liability + AMOUNT_TOLERANCE {
                    return Err(ModelError::PaymentExceedsLiability {
                        borrower: i,
                        lender: j,
                        payment,
                        liability,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Per-firm balance sheet quantities derived from a payment matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirmMetrics {
    pub total_liability: f64,
    pub total_assets: f64,
    pub equity: f64,
    pub solvent: bool,
}

/// Balance sheet of every firm under `payments`, using the default solvency
/// tolerance.
pub fn firm_metrics(
    network: &CreditNetwork,
    payments: &PaymentMatrix,
) -> Result<Vec<FirmMetrics>, ModelError> {
    firm_metrics_with_tolerance(network, payments, AMOUNT_TOLERANCE)
}

pub fn firm_metrics_with_tolerance(
    network: &CreditNetwork,
    payments: &PaymentMatrix,
    solvency_tolerance: f64,
) -> Result<Vec<FirmMetrics>, ModelError> {
    payments.check_against(network)?;
    Ok(metrics_unchecked(network, payments, solvency_tolerance))
}

pub(crate) fn metrics_unchecked(
    network: &CreditNetwork,
    payments: &PaymentMatrix,
    solvency_tolerance: f64,
) -> Vec<FirmMetrics> {
    let incoming = payments.incoming();
    network
        .external_assets()
        .iter()
        .zip(incoming)
        .enumerate()
        .map(|(i, (&e, inflow))| {
            let total_liability = network.total_liability(i);
            let total_assets = e + inflow;
            FirmMetrics {
                total_liability,
                total_assets,
                equity: (total_assets - total_liability).max(0.0),
                solvent: total_assets >= total_liability - solvency_tolerance,
            }
        })
        .collect()
}

/// System objective: the sum of every firm's total assets.
pub fn system_total_assets(metrics: &[FirmMetrics]) -> f64 {
    metrics.iter().map(|m| m.total_assets).sum()
}

/// A weakly connected piece of a network together with the parent indices
/// of its firms.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub firms: Vec<usize>,
    pub network: CreditNetwork,
}

/// Weakly connected components over positive liabilities, ordered by their
/// smallest firm index. Firms keep their parent order inside a component.
pub fn components_with_indices(network: &CreditNetwork) -> Vec<Component> {
    let n = network.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (i, j) in network.edges() {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri.max(rj)] = ri.min(rj);
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot_of_root = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot_of_root[root] == usize::MAX {
            slot_of_root[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot_of_root[root]].push(i);
    }
    groups
        .into_iter()
        .map(|firms| Component {
            network: network.restrict(&firms),
            firms,
        })
        .collect()
}

pub fn weakly_connected_components(network: &CreditNetwork) -> Vec<CreditNetwork> {
    components_with_indices(network)
        .into_iter()
        .map(|c| c.network)
        .collect()
}

/// True when `parts` hold exactly the firms, assets and liabilities of
/// `whole`, matching firms by normalized label and ignoring their order.
pub fn same_network_up_to_relabelling(whole: &CreditNetwork, parts: &[CreditNetwork]) -> bool {
    use std::collections::HashMap;
    let total: usize = parts.iter().map(CreditNetwork::len).sum();
    if total != whole.len() {
        return false;
    }
    let mut location: HashMap<String, (usize, usize)> = HashMap::new();
    for (p, part) in parts.iter().enumerate() {
        for (k, label) in part.labels().iter().enumerate() {
            if location.insert(normalize_name(label), (p, k)).is_some() {
                return false;
            }
        }
    }
    let mut mapped = Vec::with_capacity(whole.len());
    for label in whole.labels() {
        match location.get(&normalize_name(label)) {
            Some(&loc) => mapped.push(loc),
            None => return false,
        }
    }
    for (i, &(pi, ki)) in mapped.iter().enumerate() {
        if parts[pi].external_assets()[ki] != whole.external_assets()[i] {
            return false;
        }
        for (j, &(pj, kj)) in mapped.iter().enumerate() {
            let expected = whole.liability(i, j);
            let actual = if pi == pj {
                parts[pi].liability(ki, kj)
            } else {
                0.0
            };
            if expected != actual {
                return false;
            }
        }
    }
    true
}

/// On-disk JSON form of a network.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub labels: Vec<String>,
    pub external_assets: Vec<f64>,
    pub liabilities: Vec<Vec<f64>>,
}

impl From<&CreditNetwork> for NetworkFile {
    fn from(network: &CreditNetwork) -> Self {
        Self {
            labels: network.labels.clone(),
            external_assets: network.external_assets.clone(),
            liabilities: network.liability_matrix(),
        }
    }
}

impl TryFrom<NetworkFile> for CreditNetwork {
    type Error = ModelError;

    fn try_from(file: NetworkFile) -> Result<Self, Self::Error> {
        CreditNetwork::new(file.labels, file.liabilities, file.external_assets)
    }
}

impl CreditNetwork {
    /// Canonical JSON text: fixed key order, one matrix row per line and
    /// shortest round-trip number formatting.
    pub fn to_canonical_json(&self) -> String {
        let mut out = String::from("{\n");
        out.push_str(&format!("  \"labels\": {},\n", json(&self.labels)));
        out.push_str(&format!(
            "  \"external_assets\": {},\n",
            json(&self.external_assets)
        ));
        out.push_str("  \"liabilities\": [");
        let n = self.len();
        for i in 0..n {
            out.push_str(if i == 0 { "\n    " } else { ",\n    " });
            out.push_str(&json(self.row(i)));
        }
        out.push_str(if n == 0 { "]\n" } else { "\n  ]\n" });
        out.push_str("}\n");
        out
    }
}

fn json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

impl fmt::Display for CreditNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "L = {}", render_matrix(&self.liability_matrix()))?;
        write!(f, "e = {}", render_vector(self.external_assets()))
    }
}

/// Python-style list rendering with shortest round-trip numbers.
pub fn render_vector(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format_amount(*v)).collect();
    format!("[{}]", parts.join(", "))
}

pub fn render_matrix(rows: &[Vec<f64>]) -> String {
    let parts: Vec<String> = rows.iter().map(|r| render_vector(r)).collect();
    format!("[{}]", parts.join(",\n "))
}

/// Formats an amount so that parsing it back yields the same `f64`.
/// Integral values print without a fractional part.
pub fn format_amount(value: f64) -> String {
    format!("{value}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn figure_one() -> CreditNetwork {
        CreditNetwork::new(
            vec!["i".into(), "j".into(), "k".into()],
            vec![
                vec![0.0, 5.0, 0.0],
                vec![0.0, 0.0, 5.0],
                vec![0.0, 0.0, 0.0],
            ],
            vec![6.0, 2.0, 3.0],
        )
        .unwrap()
    }

    #[test]
    fn figure_one_is_valid() {
        let net = figure_one();
        assert_eq!(net.len(), 3);
        assert_eq!(net.total_liability(0), 5.0);
        assert_eq!(net.edges(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn rejects_invalid_networks() {
        let err = CreditNetwork::unlabelled(vec![vec![1.0, 0.0], vec![0.0, 0.0]], vec![0.0, 0.0])
            .unwrap_err();
        assert!(matches!(err, ModelError::NonzeroDiagonal { firm: 0, .. }));

        let err = CreditNetwork::unlabelled(vec![vec![0.0, 0.0], vec![0.0, 0.0]], vec![-1.0, 0.0])
            .unwrap_err();
        assert!(matches!(err, ModelError::NegativeAmount { .. }));

        let err =
            CreditNetwork::unlabelled(vec![vec![0.0, 1.0], vec![0.0]], vec![0.0, 0.0]).unwrap_err();
        assert!(matches!(err, ModelError::NonSquareMatrix { row: 1, .. }));

        let err = CreditNetwork::unlabelled(vec![vec![0.0, 1.0], vec![0.0, 0.0]], vec![0.0])
            .unwrap_err();
        assert!(matches!(err, ModelError::DimensionMismatch(_)));

        let err = CreditNetwork::new(
            vec!["Firm  A".into(), " firm a".into()],
            vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            vec![0.0, 0.0],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::DuplicateLabel { .. }));

        let err = CreditNetwork::unlabelled(vec![vec![0.0, f64::NAN], vec![0.0, 0.0]], vec![0.0, 0.0])
            .unwrap_err();
        assert!(matches!(err, ModelError::NonFiniteAmount { .. }));
    }

    #[test]
    fn normalization_collapses_whitespace_and_case() {
        assert_eq!(normalize_name("  Firm \t  A "), "firm a");
        assert_eq!(figure_one().find_label(" K "), Some(2));
    }

    #[test]
    fn metrics_with_full_payments() {
        let net = figure_one();
        let m = firm_metrics(&net, &PaymentMatrix::full(&net)).unwrap();
        let assets: Vec<f64> = m.iter().map(|f| f.total_assets).collect();
        assert_eq!(assets, vec![6.0, 7.0, 8.0]);
        assert!(m.iter().all(|f| f.solvent));
        assert_eq!(system_total_assets(&m), 21.0);
        assert_eq!(m[0].equity, 1.0);
    }

    #[test]
    fn metrics_with_zero_payments() {
        let net = figure_one();
        let m = firm_metrics(&net, &PaymentMatrix::zeros(3)).unwrap();
        for (f, e) in m.iter().zip(net.external_assets()) {
            assert_eq!(f.total_assets, *e);
        }
    }

    #[test]
    fn metrics_with_partial_payment() {
        let net =
            CreditNetwork::unlabelled(vec![vec![0.0, 10.0], vec![0.0, 0.0]], vec![4.0, 0.0]).unwrap();
        let p = PaymentMatrix::from_rows(vec![vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap();
        let m = firm_metrics(&net, &p).unwrap();
        assert_eq!(m[0].total_assets, 4.0);
        assert!(!m[0].solvent);
        assert_eq!(m[0].equity, 0.0);
        assert_eq!(m[1].total_assets, 2.0);
    }

    #[test]
    fn metrics_reject_bad_payments() {
        let net = figure_one();
        let too_much = PaymentMatrix::from_rows(vec![
            vec![0.0, 6.0, 0.0],
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        assert!(matches!(
            firm_metrics(&net, &too_much),
            Err(ModelError::PaymentExceedsLiability { .. })
        ));
        assert!(matches!(
            firm_metrics(&net, &PaymentMatrix::zeros(2)),
            Err(ModelError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn components() {
        assert_eq!(weakly_connected_components(&figure_one()).len(), 1);

        let mut l = vec![vec![0.0; 4]; 4];
        l[0][1] = 1.0;
        l[2][3] = 2.0;
        let net = CreditNetwork::unlabelled(l, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let comps = components_with_indices(&net);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].firms, vec![0, 1]);
        assert_eq!(comps[1].firms, vec![2, 3]);
        assert_eq!(comps[1].network.liability(0, 1), 2.0);
        assert_eq!(comps[1].network.external_assets(), &[3.0, 4.0]);
        let parts: Vec<_> = comps.into_iter().map(|c| c.network).collect();
        assert!(same_network_up_to_relabelling(&net, &parts));

        let empty = CreditNetwork::unlabelled(vec![vec![0.0; 3]; 3], vec![0.0; 3]).unwrap();
        assert_eq!(weakly_connected_components(&empty).len(), 3);
    }

    #[test]
    fn canonical_json_round_trips() {
        let net = figure_one();
        let text = net.to_canonical_json();
        let file: NetworkFile = serde_json::from_str(&text).unwrap();
        let back = CreditNetwork::try_from(file).unwrap();
        assert_eq!(back, net);
        assert!(text.contains("[0.0,5.0,0.0]"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{"labels":["a"],"external_assets":[1],"liabilities":[[0]],"extra":1}"#;
        assert!(serde_json::from_str::<NetworkFile>(text).is_err());
    }
}
