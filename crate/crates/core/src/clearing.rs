//! Maximal clearing payments under proportional repayment with default costs.
//!
//! A solvent firm pays every liability in full. A firm in default can only
//! use an `alpha` fraction of its total assets (external assets plus incoming
//! payments) and splits that amount across its lenders in proportion to what
//! it owes them. The greatest payment matrix satisfying these rules is found
//! by iterating the payment rule downward from the full liability matrix;
//! every iterate is component-wise no larger than its predecessor.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    metrics_unchecked, system_total_assets, CreditNetwork, FirmMetrics, ModelError, PaymentMatrix,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClearingConfig {
    /// Fraction of a defaulter's assets available to its creditors.
    pub alpha: f64,
    /// Iteration stops once the largest payment change drops below this.
    pub convergence_tolerance: f64,
    pub max_iterations: usize,
    /// A firm is solvent when `a_i >= L_i - solvency_tolerance`.
    pub solvency_tolerance: f64,
}

impl Default for ClearingConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            convergence_tolerance: 1e-9,
            max_iterations: 100_000,
            solvency_tolerance: 1e-9,
        }
    }
}

impl ClearingConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        Self {
            alpha,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ClearingError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(ClearingError::InvalidConfig(format!(
                "alpha {} outside [0, 1]",
                self.alpha
            )));
        }
        if !(self.convergence_tolerance > 0.0) || !(self.solvency_tolerance > 0.0) {
            return Err(ClearingError::InvalidConfig(
                "tolerances must be positive".into(),
            ));
        }
        if self.max_iterations == 0 {
            return Err(ClearingError::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClearingError {
    #[error("invalid clearing configuration: {0}")]
    InvalidConfig(String),
    #[error("clearing did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        best: Box<PaymentMatrix>,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClearingResult {
    pub payments: PaymentMatrix,
    pub metrics: Vec<FirmMetrics>,
    /// Indices of insolvent firms, ascending.
    pub default_set: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
    /// Largest deviation of `payments` from the payment rule it implies.
    pub residual: f64,
}

impl ClearingResult {
    /// Sum of total assets over all firms.
    pub fn total_assets(&self) -> f64 {
        system_total_assets(&self.metrics)
    }

    pub fn default_count(&self) -> usize {
        self.default_set.len()
    }
}

/// One application of the payment rule to `current`, written into `next`.
fn apply_payment_rule(
    network: &CreditNetwork,
    total_liabilities: &[f64],
    config: &ClearingConfig,
    current: &PaymentMatrix,
    next: &mut [f64],
) {
    let n = network.len();
    let incoming = current.incoming();
    for i in 0..n {
        let owed = total_liabilities[i];
        let row = network.row(i);
        let out = &mut next[i * n..(i + 1) * n];
        if owed == 0.0 {
            out.fill(0.0);
            continue;
        }
        let assets = network.external_assets()[i] + incoming[i];
        if assets >= owed - config.solvency_tolerance {
            out.copy_from_slice(row);
        } else {
            // alpha * assets < owed here, so each share stays below its liability.
            let fraction = config.alpha * assets / owed;
            debug_assert!(fraction <= 1.0);
            for (p, &l) in out.iter_mut().zip(row) {
                *p = fraction * l;
                debug_assert!(*p <= l);
            }
        }
    }
}

/// Computes the maximal clearing payments of `network`.
pub fn clear(network: &CreditNetwork, config: &ClearingConfig) -> Result<ClearingResult, ClearingError> {
    clear_observed(network, config, |_| {})
}

/// Like [`clear`], calling `observe` with every iterate starting from the
/// full liability matrix.
pub fn clear_observed(
    network: &CreditNetwork,
    config: &ClearingConfig,
    mut observe: impl FnMut(&PaymentMatrix),
) -> Result<ClearingResult, ClearingError> {
    config.validate()?;
    let n = network.len();
    let totals: Vec<f64> = (0..n).map(|i| network.total_liability(i)).collect();
    let mut current = PaymentMatrix::full(network);
    let mut next = PaymentMatrix::zeros(n);
    let mut change = f64::INFINITY;
    for iteration in 1..=config.max_iterations {
        observe(&current);
        apply_payment_rule(network, &totals, config, &current, next.as_flat_mut());
        change = current
            .as_flat()
            .iter()
            .zip(next.as_flat())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        debug_assert!(
            current.as_flat().iter().zip(next.as_flat()).all(|(a, b)| b <= a),
            "payment iterates must be nonincreasing"
        );
        if change < config.convergence_tolerance {
            // `current` maps to within `change` of itself, which is its residual.
            let metrics = metrics_unchecked(network, &current, config.solvency_tolerance);
            let default_set = metrics
                .iter()
                .enumerate()
                .filter(|(_, m)| !m.solvent)
                .map(|(i, _)| i)
                .collect();
            return Ok(ClearingResult {
                payments: current,
                metrics,
                default_set,
                iterations: iteration,
                converged: true,
                residual: change,
            });
        }
        std::mem::swap(&mut current, &mut next);
    }
    Err(ClearingError::NotConverged {
        iterations: config.max_iterations,
        residual: change,
        best: Box::new(current),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirmStatus {
    /// No outstanding liabilities.
    NoLiabilities,
    Solvent,
    Default,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirmCheck {
    pub status: FirmStatus,
    pub total_assets: f64,
    /// Largest deviation between the firm's payments and its rule-implied row.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub residual: f64,
    pub firms: Vec<FirmCheck>,
}

/// Checks how far `payments` is from satisfying the clearing rules of
/// `network` under `config`. Does not run the iteration.
pub fn verify_fixed_point(
    network: &CreditNetwork,
    payments: &PaymentMatrix,
    config: &ClearingConfig,
) -> Result<FixedPointReport, ClearingError> {
    let n = network.len();
    if payments.len() != n {
        return Err(ModelError::DimensionMismatch(format!(
            "payment matrix is {0}x{0} but the network has {1} firms",
            payments.len(),
            n
        ))
        .into());
    }
    let mut firms = Vec::with_capacity(n);
    for i in 0..n {
        let incoming: f64 = (0..n).map(|j| payments.get(j, i)).sum();
        let assets = network.external_assets()[i] + incoming;
        let owed: f64 = network.row(i).iter().sum();
        let status = if owed == 0.0 {
            FirmStatus::NoLiabilities
        } else if assets >= owed - config.solvency_tolerance {
            FirmStatus::Solvent
        } else {
            FirmStatus::Default
        };
        let expected = |l: f64| match status {
            FirmStatus::NoLiabilities => 0.0,
            FirmStatus::Solvent => l,
            FirmStatus::Default => config.alpha * assets * l / owed,
        };
        let deviation = network
            .row(i)
            .iter()
            .zip(payments.row(i))
            .map(|(&l, &p)| (expected(l) - p).abs())
            .fold(0.0, f64::max);
        firms.push(FirmCheck {
            status,
            total_assets: assets,
            deviation,
        });
    }
    let residual = firms.iter().map(|f| f.deviation).fold(0.0, f64::max);
    Ok(FixedPointReport { residual, firms })
}
