//! Reading execution plans out of free-text model replies.
//!
//! The plan is the last fenced block holding `cycles = [[i, j, ...], ...]`
//! (compression) or `remove = [(i, j), ...]` (removal). Everything outside
//! that block is kept as the rationale.

use thiserror::Error;

use super::lexer::{fenced_blocks, tokenize, Parser, Token};
use crate::model::CreditNetwork;
use crate::operations::{DebtCycle, DebtEdge, OperationError};
use crate::strategies::{ExecutionPlan, OperationKind, StrategyName};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanReplyError {
    #[error("malformed plan: {0}")]
    Malformed(String),
    #[error("plan does not fit the network: {0}")]
    Invalid(#[from] OperationError),
}

/// A plan as written in a reply, before it is checked against a network.
#[derive(Debug, Clone, PartialEq)]
pub struct ProposedPlan {
    pub kind: OperationKind,
    pub cycles: Vec<Vec<usize>>,
    pub edges: Vec<(usize, usize)>,
    pub rationale: String,
}

impl ProposedPlan {
    pub fn into_plan(
        self,
        network: &CreditNetwork,
        seed: u64,
        provenance: StrategyName,
    ) -> Result<ExecutionPlan, PlanReplyError> {
        let plan = match self.kind {
            OperationKind::Compression => {
                let cycles = self
                    .cycles
                    .into_iter()
                    .map(|firms| DebtCycle::new(network, firms))
                    .collect::<Result<Vec<_>, _>>()?;
                ExecutionPlan::compression(cycles, seed, provenance)
            }
            OperationKind::Removal => {
                let n = network.len();
                let mut edges = Vec::with_capacity(self.edges.len());
                for (b, l) in self.edges {
                    if b >= n || l >= n {
                        return Err(OperationError::UnknownFirm { firm: b.max(l), n }.into());
                    }
                    let edge = DebtEdge::new(b, l)?;
                    if network.liability(b, l) <= 0.0 {
                        return Err(OperationError::NoSuchDebt { borrower: b, lender: l }.into());
                    }
                    if edges.contains(&edge) {
                        return Err(OperationError::DuplicateEdge { borrower: b, lender: l }.into());
                    }
                    edges.push(edge);
                }
                ExecutionPlan::removal(edges, seed, provenance)
            }
        };
        Ok(plan.with_rationale(self.rationale))
    }
}

fn keyword(kind: OperationKind) -> &'static str {
    match kind {
        OperationKind::Compression => "cycles",
        OperationKind::Removal => "remove",
    }
}

fn mentions(block: &str, word: &str) -> bool {
    block.lines().any(|line| {
        line.trim_start()
            .strip_prefix(word)
            .is_some_and(|rest| rest.trim_start().starts_with('='))
    })
}

pub fn parse_plan_reply(text: &str, kind: OperationKind) -> Result<ProposedPlan, PlanReplyError> {
    let word = keyword(kind);
    let block = fenced_blocks(text)
        .into_iter()
        .rev()
        .find(|block| mentions(block, word))
        .ok_or_else(|| PlanReplyError::Malformed(format!("no fenced block assigning `{word}`")))?;
    let start = block.as_ptr() as usize - text.as_ptr() as usize;
    let before = &text[..start];
    let before = &before[..before.rfind("```").unwrap_or(before.len())];
    let after = &text[start + block.len()..];
    let after = after.strip_prefix("```").unwrap_or(after);
    let rationale = format!("{before}{after}").trim().to_string();

    let body: String = block
        .lines()
        .skip_while(|line| !mentions(line, word))
        .collect::<Vec<_>>()
        .join("\n");
    let malformed = |err: super::lexer::LexError| {
        PlanReplyError::Malformed(format!(
            "line {}, column {}: {}",
            err.at.line, err.at.column, err.message
        ))
    };
    let mut p = Parser::new(tokenize(&body).map_err(malformed)?, &body);
    p.assignment(word).map_err(malformed)?;
    let mut plan = ProposedPlan {
        kind,
        cycles: Vec::new(),
        edges: Vec::new(),
        rationale,
    };
    match kind {
        OperationKind::Compression => {
            plan.cycles = p
                .list(Token::LBracket, Token::RBracket, |p| {
                    let open = if p.peek() == Some(&Token::LParen) {
                        (Token::LParen, Token::RParen)
                    } else {
                        (Token::LBracket, Token::RBracket)
                    };
                    p.list(open.0, open.1, Parser::index)
                })
                .map_err(malformed)?;
        }
        OperationKind::Removal => {
            plan.edges = p
                .list(Token::LBracket, Token::RBracket, |p| {
                    let (open, close) = if p.peek() == Some(&Token::LBracket) {
                        (Token::LBracket, Token::RBracket)
                    } else {
                        (Token::LParen, Token::RParen)
                    };
                    p.expect(open)?;
                    let b = p.index()?;
                    p.expect(Token::Comma)?;
                    let l = p.index()?;
                    p.eat(&Token::Comma);
                    p.expect(close)?;
                    Ok((b, l))
                })
                .map_err(malformed)?;
        }
    }
    if !p.at_end() {
        return Err(malformed(p.error("unexpected input after the plan")));
    }
    Ok(plan)
}

/// Renders `plan` in the reply grammar, inside a fenced block.
pub fn render_plan_block(plan: &ExecutionPlan, kind: OperationKind) -> String {
    let body = match kind {
        OperationKind::Compression => {
            let cycles: Vec<String> = plan
                .cycles()
                .iter()
                .map(|c| {
                    let firms: Vec<String> = c.firms().iter().map(usize::to_string).collect();
                    format!("[{}]", firms.join(", "))
                })
                .collect();
            format!("cycles = [{}]", cycles.join(", "))
        }
        OperationKind::Removal => {
            let edges: Vec<String> = plan
                .edges()
                .iter()
                .map(|e| format!("({}, {})", e.borrower(), e.lender()))
                .collect();
            format!("remove = [{}]", edges.join(", "))
        }
    };
    format!("```python\n{body}\n```\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cycle() {
        let reply = "Compress the mutual debt.\n```python\ncycles = [[0, 1]]\n```\nDone.";
        let plan = parse_plan_reply(reply, OperationKind::Compression).unwrap();
        assert_eq!(plan.cycles, vec![vec![0, 1]]);
        assert_eq!(plan.rationale, "Compress the mutual debt.\n\nDone.");
        let net = CreditNetwork::unlabelled(vec![vec![0.0, 10.0], vec![6.0, 0.0]], vec![2.0, 0.0]).unwrap();
        let exec = plan.into_plan(&net, 0, StrategyName::Llm).unwrap();
        assert_eq!(exec.size(), 1);
        assert_eq!(exec.rationale(), "Compress the mutual debt.\n\nDone.");
    }

    #[test]
    fn empty_removal() {
        let plan = parse_plan_reply("```\nremove = []\n```", OperationKind::Removal).unwrap();
        assert!(plan.edges.is_empty());
    }

    #[test]
    fn last_block_wins() {
        let reply = "draft\n```python\nremove = [(0, 1)]\n```\nbetter\n```python\nremove = [(1, 2), [2, 0],]\n```\n";
        let plan = parse_plan_reply(reply, OperationKind::Removal).unwrap();
        assert_eq!(plan.edges, vec![(1, 2), (2, 0)]);
    }

    #[test]
    fn wrong_or_missing_block() {
        assert!(matches!(
            parse_plan_reply("```\nremove = [(0, 1)]\n```", OperationKind::Compression),
            Err(PlanReplyError::Malformed(_))
        ));
        assert!(matches!(
            parse_plan_reply("no plan here", OperationKind::Removal),
            Err(PlanReplyError::Malformed(_))
        ));
        assert!(matches!(
            parse_plan_reply("```\ncycles = [[0, x]]\n```", OperationKind::Compression),
            Err(PlanReplyError::Malformed(_))
        ));
    }

    #[test]
    fn absent_cycle_is_invalid() {
        let net = CreditNetwork::unlabelled(vec![vec![0.0, 10.0], vec![0.0, 0.0]], vec![2.0, 0.0]).unwrap();
        let plan = parse_plan_reply("```\ncycles = [[0, 1]]\n```", OperationKind::Compression).unwrap();
        assert!(matches!(
            plan.into_plan(&net, 0, StrategyName::Llm),
            Err(PlanReplyError::Invalid(_))
        ));
        let plan = parse_plan_reply("```\nremove = [(1, 0)]\n```", OperationKind::Removal).unwrap();
        assert!(matches!(
            plan.into_plan(&net, 0, StrategyName::Llm),
            Err(PlanReplyError::Invalid(OperationError::NoSuchDebt { .. }))
        ));
    }
}
