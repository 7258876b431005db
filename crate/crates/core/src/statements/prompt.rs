//! Prompt text for statement translation and for execution-plan suggestions.

use crate::model::{render_matrix, render_vector, CreditNetwork};
use crate::strategies::OperationKind;

/// Introduces the matrix representation of a credit network.
pub const NETWORK_INTRODUCTION: &str = "\
You are given a credit network represented in adjacency matrix L, where L[i][j] represents the amount that firm i owes firm j.
An external asset vector e, where e[i] is the amount of external (non-network) assets held by firm i.

Here is an example:

L = [[0, 5, 0, 0],
[0, 0, 4, 0],
[4, 0, 0, 5],
[9, 0, 0, 0]]

e = [3, 4, 5, 6]
";

pub const STATEMENT_SLOT: &str = "<INSERT_FINANCIAL_STATEMENT_HERE>";

/// Extraction instructions; the statement replaces [`STATEMENT_SLOT`].
pub const EXTRACTION_INSTRUCTIONS: &str = "\
You are a financial data extraction assistant for constructing a credit network model.

Given a financial statement, extract:
1. The reporting firm's name;
2. The reporting firm's external assets (in millions). External assets are assets held by the reporting firm that originate from entities outside the network, such as deposits at commercial banks, government bonds, real estate, etc;
3. A list of all liabilities, specifying:
   - borrower name;
   - lender name;
   - amount (in millions).

The reporting firm can be either a borrower or a lender. List all relationships explicitly.

Output Python code in the following format:
1. firm = \"<reporting firm name>\"
2. external_assets = <amount>
3. liabilities = [(<borrower>, <lender>, <amount>), ...]

Here is the financial statement:

<INSERT_FINANCIAL_STATEMENT_HERE>
";

pub fn build_translation_prompt(statement: &str) -> Option<String> {
    if statement.trim().is_empty() {
        return None;
    }
    Some(format!(
        "{NETWORK_INTRODUCTION}\n{}",
        EXTRACTION_INSTRUCTIONS.replace(STATEMENT_SLOT, statement)
    ))
}

/// Reference clearing routine shown to the model.
pub const CLEARING_SOURCE: &str = r#"import numpy as np

def clear(L, e, alpha=0.5, tol=1e-9, max_iter=100000):
    """Greatest clearing payments with default costs.

    A solvent firm pays every liability in full; a defaulting firm pays
    creditors pro rata out of alpha times its total assets.
    """
    L = np.asarray(L, dtype=float)
    e = np.asarray(e, dtype=float)
    owed = L.sum(axis=1)
    P = L.copy()
    for _ in range(max_iter):
        assets = e + P.sum(axis=0)
        nxt = np.zeros_like(P)
        for i in range(len(e)):
            if owed[i] == 0:
                continue
            if assets[i] >= owed[i]:
                nxt[i] = L[i]
            else:
                nxt[i] = alpha * assets[i] * L[i] / owed[i]
        if np.abs(nxt - P).max(initial=0.0) < tol:
            return nxt
        P = nxt
    raise RuntimeError("clearing did not converge")

def total_assets(L, e, alpha=0.5):
    P = clear(L, e, alpha)
    return float((np.asarray(e, dtype=float) + P.sum(axis=0)).sum())
"#;

pub const DEFAULT_OBJECTIVE: &str =
    "Maximize the sum of all firms' total assets (external assets plus payments received) after clearing.";

pub fn operation_description(kind: OperationKind) -> &'static str {
    match kind {
        OperationKind::Compression => "\
Operation: portfolio compression
Compressing a directed debt cycle lowers every liability on the cycle by the cycle's smallest liability, so at least one debt on the cycle disappears and every firm's net position is unchanged. Chosen cycles are compressed one after another, cycles with more firms first; a cycle that an earlier compression has already broken is skipped.",
        OperationKind::Removal => "\
Operation: debt removal
Removing a debt sets one liability L[i][j] to zero, as if lender j forgave borrower i. Removal can keep a firm out of default and thereby avoid default costs, but the lender loses the payment.",
    }
}

pub fn default_task(kind: OperationKind) -> &'static str {
    match kind {
        OperationKind::Compression => "\
Find the set of debt cycles to compress that maximizes the objective after clearing. Firms are numbered from 0 in matrix order. Explain your reasoning, then end your answer with a fenced code block of the form

```python
cycles = [[0, 1, 2], [3, 4]]
```

listing each chosen cycle as the firms it visits in order. Use `cycles = []` to compress nothing.",
        OperationKind::Removal => "\
Find the set of debts to remove that maximizes the objective after clearing. Firms are numbered from 0 in matrix order. Explain your reasoning, then end your answer with a fenced code block of the form

```python
remove = [(0, 1), (2, 3)]
```

listing each removed debt as (borrower, lender). Use `remove = []` to remove nothing.",
    }
}

pub fn network_section(network: &CreditNetwork) -> String {
    let n = network.len();
    format!(
        "The network has {n} firms numbered 0 to {}. L[i][j] is the amount firm i owes firm j and e[i] is the external assets of firm i.\n\nL = {}\n\ne = {}\n",
        n.saturating_sub(1),
        render_matrix(&network.liability_matrix()),
        render_vector(network.external_assets())
    )
}

/// Five headed sections: network, operation, clearing routine, objective and
/// task.
pub fn build_execution_prompt(
    network: &CreditNetwork,
    kind: OperationKind,
    clearing_source: &str,
    objective: &str,
    task: &str,
) -> String {
    format!(
        "## Credit network instance\n{}\n## Financial operation\n{}\n\n## Clearing algorithm\n```python\n{}```\n\n## Optimization objective\n{}\n\n## Task\n{}\n",
        network_section(network),
        operation_description(kind),
        clearing_source,
        objective,
        task
    )
}

pub fn default_execution_prompt(network: &CreditNetwork, kind: OperationKind) -> String {
    build_execution_prompt(network, kind, CLEARING_SOURCE, DEFAULT_OBJECTIVE, default_task(kind))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn figure_one() -> CreditNetwork {
        CreditNetwork::unlabelled(
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
    fn translation_prompt_layout() {
        let prompt = build_translation_prompt("Firm Q holds $4 million.").unwrap();
        assert!(prompt.contains("[9, 0, 0, 0]"));
        let intro = prompt.find("You are given a credit network").unwrap();
        let extract = prompt.find("You are a financial data extraction assistant").unwrap();
        let statement = prompt.find("Firm Q holds $4 million.").unwrap();
        assert!(intro < extract && extract < statement);
        assert_eq!(prompt.matches("Firm Q holds").count(), 1);
        assert!(!prompt.contains(STATEMENT_SLOT));
        assert!(build_translation_prompt("  \n").is_none());
    }

    #[test]
    fn execution_prompt_layout() {
        let prompt = default_execution_prompt(&figure_one(), OperationKind::Compression);
        assert_eq!(prompt, default_execution_prompt(&figure_one(), OperationKind::Compression));
        assert!(prompt.contains("L = [[0, 5, 0],\n [0, 0, 5],\n [0, 0, 0]]"));
        assert!(prompt.contains("e = [6, 2, 3]"));
        assert!(prompt.contains("Operation: portfolio compression"));
        let headings = [
            "## Credit network instance",
            "## Financial operation",
            "## Clearing algorithm",
            "## Optimization objective",
            "## Task",
        ];
        let positions: Vec<usize> = headings.iter().map(|h| prompt.find(h).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        let removal = default_execution_prompt(&figure_one(), OperationKind::Removal);
        assert!(removal.contains("Operation: debt removal"));
    }
}
