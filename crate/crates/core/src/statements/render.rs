//! Synthetic financial statements rendered from extraction records with a
//! small phrase library. Each amount and each triple's counterparty appears
//! in exactly one sentence.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::record::{ExtractionRecord, RecordError};
use crate::model::{format_amount, normalize_name};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error("unknown statement template {0:?}; expected one of formal, brief, narrative")]
    UnknownTemplate(String),
    #[error(transparent)]
    InvalidRecord(#[from] RecordError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatementTemplate {
    Formal,
    Brief,
    Narrative,
}

impl StatementTemplate {
    pub const ALL: [StatementTemplate; 3] = [Self::Formal, Self::Brief, Self::Narrative];
}

impl fmt::Display for StatementTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Formal => "formal",
            Self::Brief => "brief",
            Self::Narrative => "narrative",
        })
    }
}

impl FromStr for StatementTemplate {
    type Err = RenderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|t| t.to_string() == s)
            .ok_or_else(|| RenderError::UnknownTemplate(s.to_string()))
    }
}

fn money(amount: f64) -> String {
    format!("${} million", format_amount(amount))
}

const PAYABLE_PHRASES: [&str; 4] = [
    "{firm} has drawn a revolving credit facility from {other} with an outstanding balance of {amount}.",
    "A term loan agreement with {other} requires {firm} to repay {amount}.",
    "Trade financing arrangements with {other} have resulted in {amount} of accounts payable.",
    "{firm} owes {other} {amount} under a bilateral lending agreement.",
];

const RECEIVABLE_PHRASES: [&str; 4] = [
    "{other} has executed a promissory note to {firm} for {amount}.",
    "{other} acknowledges an outstanding {amount} trade receivable owed to {firm}.",
    "{firm} extended a loan of {amount} to {other}, which remains outstanding.",
    "Receivables include {amount} due from {other}.",
];

fn fill(phrase: &str, firm: &str, other: &str, amount: f64) -> String {
    phrase
        .replace("{firm}", firm)
        .replace("{other}", other)
        .replace("{amount}", &money(amount))
}

/// Renders `record` as a statement. Deterministic in `(record, template, seed)`.
pub fn render_statement(record: &ExtractionRecord, template: &str, seed: u64) -> Result<String, RenderError> {
    let template: StatementTemplate = template.parse()?;
    record.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let firm = record.firm.as_str();
    let me = normalize_name(firm);
    let e = record.external_assets;

    let encumbered = rng.gen_range(1..=3) as f64;
    let assets = if rng.gen_bool(0.5) && (e + encumbered) - encumbered == e {
        format!(
            "{firm} holds {} in liquid assets, of which {} is encumbered and unavailable for general use.",
            money(e + encumbered),
            money(encumbered)
        )
    } else {
        format!("{firm} holds {} in liquid external assets.", money(e))
    };

    let mut payables = Vec::new();
    let mut receivables = Vec::new();
    for l in &record.liabilities {
        let payable = normalize_name(&l.borrower) == me;
        let (other, phrases, out) = if payable {
            (&l.lender, &PAYABLE_PHRASES, &mut payables)
        } else {
            (&l.borrower, &RECEIVABLE_PHRASES, &mut receivables)
        };
        let phrase = phrases.choose(&mut rng).expect("phrase lists are nonempty");
        out.push(match template {
            StatementTemplate::Brief if payable => format!("- Payable to {other}: {}", money(l.amount)),
            StatementTemplate::Brief => format!("- Receivable from {other}: {}", money(l.amount)),
            _ => fill(phrase, firm, other, l.amount),
        });
    }

    let text = match template {
        StatementTemplate::Formal => {
            let mut out = format!("{firm} Financial Statement\n\n{assets}\n");
            if !payables.is_empty() {
                out.push_str(&format!("\nIn terms of liabilities: {}\n", payables.join(" ")));
            }
            if !receivables.is_empty() {
                out.push_str(&format!("\nOn the receivables side: {}\n", receivables.join(" ")));
            }
            out
        }
        StatementTemplate::Brief => {
            let mut out = format!("Statement of {firm}\n{assets}\n");
            for line in payables.iter().chain(&receivables) {
                out.push_str(line);
                out.push('\n');
            }
            out
        }
        StatementTemplate::Narrative => {
            let mut sentences = vec![assets];
            sentences.extend(payables);
            sentences.extend(receivables);
            if sentences.len() == 1 {
                sentences.push(format!("{firm} reports no credit relationships with other firms."));
            }
            format!("{}\n", sentences.join(" "))
        }
    };
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::super::record::Liability;
    use super::*;

    fn record() -> ExtractionRecord {
        ExtractionRecord {
            firm: "Firm A".into(),
            external_assets: 13.0,
            liabilities: vec![
                Liability::new("Firm A", "Firm B", 5.0),
                Liability::new("Firm A", "Firm C", 4.0),
                Liability::new("Firm E", "Firm A", 3.25),
            ],
        }
    }

    #[test]
    fn deterministic() {
        for template in StatementTemplate::ALL {
            let a = render_statement(&record(), &template.to_string(), 9).unwrap();
            let b = render_statement(&record(), &template.to_string(), 9).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn counterparties_and_amounts_once() {
        for seed in 0..30 {
            for template in StatementTemplate::ALL {
                let text = render_statement(&record(), &template.to_string(), seed).unwrap();
                for name in ["Firm B", "Firm C", "Firm E"] {
                    assert_eq!(text.matches(name).count(), 1, "{text}");
                }
                for amount in ["$5 million", "$4 million", "$3.25 million"] {
                    assert_eq!(text.matches(amount).count(), 1, "{text}");
                }
            }
        }
    }

    #[test]
    fn encumbrance_keeps_usable_assets() {
        let texts: Vec<String> = (0..20)
            .map(|seed| render_statement(&record(), "formal", seed).unwrap())
            .collect();
        assert!(texts.iter().any(|t| t.contains("encumbered")));
        assert!(texts.iter().any(|t| t.contains("$13 million in liquid external assets")));
    }

    #[test]
    fn unknown_template() {
        assert_eq!(
            render_statement(&record(), "poem", 0),
            Err(RenderError::UnknownTemplate("poem".into()))
        );
    }
}
