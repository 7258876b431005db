//! Per-firm corpora built from a known network: record files or rendered
//! statements, an optional injected amount conflict, and a mock script that
//! answers translation prompts with the matching records.

use std::fs;
use std::io;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{normalize_name, CreditNetwork};
use crate::seed::derive_seed;
use crate::statements::{
    records_from_network, render_extraction_record, render_statement, ExtractionRecord, RenderError,
    ScriptEntry,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusFormat {
    /// `.rec` files in the extraction-record grammar.
    Records,
    /// `.stmt` natural-language statements plus a mock script.
    Statements,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusOptions {
    pub format: CorpusFormat,
    pub template: String,
    pub seed: u64,
    /// Number of debts whose amount is perturbed in the later of their two
    /// reports.
    pub inject_conflicts: usize,
    /// Added to each perturbed amount.
    pub perturbation: f64,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        Self {
            format: CorpusFormat::Records,
            template: "formal".into(),
            seed: 0,
            inject_conflicts: 0,
            perturbation: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InjectedConflict {
    /// Position of the perturbed record in integration order.
    pub record: usize,
    pub borrower: String,
    pub lender: String,
    pub original: f64,
    pub perturbed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    /// File name and contents, in integration order.
    pub files: Vec<(String, String)>,
    pub records: Vec<ExtractionRecord>,
    pub script: Vec<ScriptEntry>,
    /// Injected conflicts, by record position.
    pub injected: Vec<InjectedConflict>,
}

/// Picks triples in records `k` whose counterpart was already reported by an
/// earlier record, so integration must halt exactly at the smallest such `k`.
fn inject(records: &mut [ExtractionRecord], seed: u64, delta: f64, count: usize) -> Vec<InjectedConflict> {
    let mut candidates = Vec::new();
    for (k, record) in records.iter().enumerate() {
        for (t, l) in record.liabilities.iter().enumerate() {
            let me = normalize_name(&record.firm);
            let other = if normalize_name(&l.borrower) == me {
                &l.lender
            } else {
                &l.borrower
            };
            let earlier = records[..k]
                .iter()
                .any(|r| normalize_name(&r.firm) == normalize_name(other));
            if earlier {
                candidates.push((k, t));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[1]));
    let mut chosen: Vec<(usize, usize)> = candidates.choose_multiple(&mut rng, count).copied().collect();
    chosen.sort_unstable();
    chosen
        .into_iter()
        .map(|(k, t)| {
            let l = &mut records[k].liabilities[t];
            let original = l.amount;
            l.amount += delta;
            InjectedConflict {
                record: k,
                borrower: l.borrower.clone(),
                lender: l.lender.clone(),
                original,
                perturbed: l.amount,
            }
        })
        .collect()
}

pub fn build_corpus(network: &CreditNetwork, options: &CorpusOptions) -> Result<Corpus, RenderError> {
    let mut records = records_from_network(network);
    let injected = inject(&mut records, options.seed, options.perturbation, options.inject_conflicts);
    let width = records.len().saturating_sub(1).to_string().len().max(3);
    let mut files = Vec::with_capacity(records.len());
    let mut script = Vec::new();
    for (i, record) in records.iter().enumerate() {
        let text = render_extraction_record(record);
        match options.format {
            CorpusFormat::Records => files.push((format!("firm_{i:0width$}.rec"), text)),
            CorpusFormat::Statements => {
                let statement = render_statement(record, &options.template, derive_seed(options.seed, &[0, i as u64]))?;
                script.push(ScriptEntry {
                    expect_substring: statement.clone(),
                    reply: format!("```python\n{text}```\n"),
                });
                files.push((format!("firm_{i:0width$}.stmt"), statement));
            }
        }
    }
    Ok(Corpus {
        files,
        records,
        script,
        injected,
    })
}

impl Corpus {
    /// Writes the corpus files under `dir/corpus`, plus `truth.json`,
    /// `script.json` (statements only) and `injected.json` (if any).
    pub fn write(&self, dir: &Path, truth: &CreditNetwork) -> io::Result<()> {
        let corpus = dir.join("corpus");
        fs::create_dir_all(&corpus)?;
        for (name, text) in &self.files {
            fs::write(corpus.join(name), text)?;
        }
        fs::write(dir.join("truth.json"), truth.to_canonical_json())?;
        if !self.script.is_empty() {
            fs::write(dir.join("script.json"), to_json(&self.script))?;
        }
        if !self.injected.is_empty() {
            fs::write(dir.join("injected.json"), to_json(&self.injected))?;
        }
        Ok(())
    }
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::same_network_up_to_relabelling;
    use crate::statements::{aggregate_statements, llm_translate, AggregationOptions, AnomalyKind, ScriptedMock};

    fn triangle() -> CreditNetwork {
        CreditNetwork::unlabelled(
            vec![
                vec![0.0, 2.0, 0.0],
                vec![0.0, 0.0, 3.5],
                vec![4.0, 0.0, 0.0],
            ],
            vec![1.0, 2.0, 3.0],
        )
        .unwrap()
    }

    #[test]
    fn statements_translate_back() {
        let options = CorpusOptions {
            format: CorpusFormat::Statements,
            ..Default::default()
        };
        let corpus = build_corpus(&triangle(), &options).unwrap();
        let mock = ScriptedMock::new(corpus.script.clone());
        let records: Vec<ExtractionRecord> = corpus
            .files
            .iter()
            .map(|(_, s)| llm_translate(&mock, s).unwrap())
            .collect();
        let report = aggregate_statements(&records, &AggregationOptions::default());
        let parts: Vec<CreditNetwork> = report.networks.into_iter().map(|a| a.network).collect();
        assert!(same_network_up_to_relabelling(&triangle(), &parts));
    }

    #[test]
    fn injected_conflict_is_caught_where_planted() {
        for seed in 0..10 {
            let options = CorpusOptions {
                seed,
                inject_conflicts: 1,
                ..Default::default()
            };
            let corpus = build_corpus(&triangle(), &options).unwrap();
            let injected = corpus.injected[0].clone();
            assert!(injected.record >= 1);
            let report = aggregate_statements(&corpus.records, &AggregationOptions::default());
            assert_eq!(report.halted_at, Some(injected.record));
            assert_eq!(report.anomalies.len(), 1);
            assert_eq!(report.anomalies[0].kind(), AnomalyKind::AmountConflict);
        }
    }

    #[test]
    fn several_conflicts_halt_at_the_first() {
        let options = CorpusOptions {
            inject_conflicts: 2,
            ..Default::default()
        };
        let corpus = build_corpus(&triangle(), &options).unwrap();
        assert_eq!(corpus.injected.len(), 2);
        let first = corpus.injected.iter().map(|c| c.record).min();
        let report = aggregate_statements(&corpus.records, &AggregationOptions::default());
        assert_eq!(report.halted_at, first);
    }

    #[test]
    fn write_layout() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = build_corpus(&triangle(), &CorpusOptions::default()).unwrap();
        corpus.write(dir.path(), &triangle()).unwrap();
        assert!(dir.path().join("corpus/firm_000.rec").exists());
        assert!(dir.path().join("truth.json").exists());
        assert!(!dir.path().join("script.json").exists());
    }
}
