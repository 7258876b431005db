//! The extraction-record grammar:
//!
//! ```text
//! firm = "<name>"
//! external_assets = <number>
//! liabilities = [("<borrower>", "<lender>", <number>), ...]
//! ```

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::lexer::{strip_fence, tokenize, LexError, Parser, Token};
use crate::model::{format_amount, normalize_name, CreditNetwork};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Liability {
    pub borrower: String,
    pub lender: String,
    pub amount: f64,
}

impl Liability {
    pub fn new(borrower: impl Into<String>, lender: impl Into<String>, amount: f64) -> Self {
        Self {
            borrower: borrower.into(),
            lender: lender.into(),
            amount,
        }
    }
}

/// One firm's self-reported view of the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionRecord {
    pub firm: String,
    pub external_assets: f64,
    pub liabilities: Vec<Liability>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecordError {
    #[error("malformed record at line {line}, column {column}: {message}")]
    Malformed {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid record: {0}")]
    InvariantViolation(String),
}

impl From<LexError> for RecordError {
    fn from(err: LexError) -> Self {
        RecordError::Malformed {
            line: err.at.line,
            column: err.at.column,
            message: err.message,
        }
    }
}

impl ExtractionRecord {
    /// Checks amounts, self-loops, that the reporter is party to every
    /// triple and that no pair is listed twice.
    pub fn validate(&self) -> Result<(), RecordError> {
        let invalid = |msg: String| Err(RecordError::InvariantViolation(msg));
        if self.firm.trim().is_empty() {
            return invalid("empty firm name".into());
        }
        if !(self.external_assets.is_finite() && self.external_assets >= 0.0) {
            return invalid(format!("external assets {} must be nonnegative", self.external_assets));
        }
        let me = normalize_name(&self.firm);
        let mut pairs = HashSet::new();
        for l in &self.liabilities {
            let (b, d) = (normalize_name(&l.borrower), normalize_name(&l.lender));
            if !(l.amount.is_finite() && l.amount >= 0.0) {
                return invalid(format!("amount {} owed by {:?} to {:?} must be nonnegative", l.amount, l.borrower, l.lender));
            }
            if b == d {
                return invalid(format!("{:?} cannot owe itself", l.borrower));
            }
            if b != me && d != me {
                return invalid(format!(
                    "{:?} is party to neither side of ({:?}, {:?})",
                    self.firm, l.borrower, l.lender
                ));
            }
            if !pairs.insert((b, d)) {
                return invalid(format!("({:?}, {:?}) listed twice", l.borrower, l.lender));
            }
        }
        Ok(())
    }
}

/// Parses the grammar only; see [`parse_extraction_record`] for the checked
/// version.
pub fn parse_record_syntax(text: &str) -> Result<ExtractionRecord, RecordError> {
    let body = strip_fence(text);
    let mut p = Parser::new(tokenize(body)?, body);
    p.assignment("firm")?;
    let firm = p.string()?;
    p.assignment("external_assets")?;
    let external_assets = p.number()?;
    p.assignment("liabilities")?;
    let liabilities = p.list(Token::LBracket, Token::RBracket, |p| {
        p.expect(Token::LParen)?;
        let borrower = p.string()?;
        p.expect(Token::Comma)?;
        let lender = p.string()?;
        p.expect(Token::Comma)?;
        let amount = p.number()?;
        p.eat(&Token::Comma);
        p.expect(Token::RParen)?;
        Ok(Liability {
            borrower,
            lender,
            amount,
        })
    })?;
    if !p.at_end() {
        return Err(p.error("unexpected trailing input").into());
    }
    Ok(ExtractionRecord {
        firm,
        external_assets,
        liabilities,
    })
}

pub fn parse_extraction_record(text: &str) -> Result<ExtractionRecord, RecordError> {
    let record = parse_record_syntax(text)?;
    record.validate()?;
    Ok(record)
}

fn quote(name: &str) -> String {
    format!("\"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Canonical text: one assignment per line, one triple per line with a
/// trailing comma, and `liabilities = []` when there are none.
pub fn render_extraction_record(record: &ExtractionRecord) -> String {
    let mut out = format!(
        "firm = {}\nexternal_assets = {}\n",
        quote(&record.firm),
        format_amount(record.external_assets)
    );
    if record.liabilities.is_empty() {
        out.push_str("liabilities = []\n");
    } else {
        out.push_str("liabilities = [\n");
        for l in &record.liabilities {
            out.push_str(&format!(
                "    ({}, {}, {}),\n",
                quote(&l.borrower),
                quote(&l.lender),
                format_amount(l.amount)
            ));
        }
        out.push_str("]\n");
    }
    out
}

/// The record each firm of `network` would file: its external assets, every
/// debt it owes, then every debt owed to it.
pub fn records_from_network(network: &CreditNetwork) -> Vec<ExtractionRecord> {
    let labels = network.labels();
    (0..network.len())
        .map(|i| {
            let payables = (0..network.len())
                .filter(|&j| network.liability(i, j) > 0.0)
                .map(|j| Liability::new(&labels[i], &labels[j], network.liability(i, j)));
            let receivables = (0..network.len())
                .filter(|&j| network.liability(j, i) > 0.0)
                .map(|j| Liability::new(&labels[j], &labels[i], network.liability(j, i)));
            ExtractionRecord {
                firm: labels[i].clone(),
                external_assets: network.external_assets()[i],
                liabilities: payables.chain(receivables).collect(),
            }
        })
        .collect()
}
