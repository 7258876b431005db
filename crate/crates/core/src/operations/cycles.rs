//! Simple cycle enumeration over the positive-liability graph.
//!
//! Unbounded enumeration uses Johnson's circuit-finding algorithm: for each
//! start vertex `s` it searches only the strongly connected component of `s`
//! in the subgraph induced by vertices `>= s`, so every circuit is reported
//! exactly once, rooted at its smallest vertex. A length bound breaks the
//! blocking argument Johnson relies on, so bounded enumeration falls back to a
//! plain depth-first search with the same rooting rule.

use std::collections::BTreeSet;

use super::{DebtCycle, OperationError};
use crate::model::CreditNetwork;

/// Guards against exponential blow-up on dense graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CycleLimits {
    /// Longest cycle (in firms) to report.
    pub max_len: Option<usize>,
    /// Fail with `CycleLimitExceeded` once more cycles than this are found.
    pub max_count: Option<usize>,
}

impl Default for CycleLimits {
    fn default() -> Self {
        Self {
            max_len: None,
            max_count: Some(100_000),
        }
    }
}

impl CycleLimits {
    pub fn unlimited() -> Self {
        Self {
            max_len: None,
            max_count: None,
        }
    }
}

struct Collector {
    cycles: Vec<Vec<usize>>,
    max_count: Option<usize>,
}

impl Collector {
    fn push(&mut self, cycle: Vec<usize>) -> Result<(), OperationError> {
        self.cycles.push(cycle);
        match self.max_count {
            Some(limit) if self.cycles.len() > limit => {
                Err(OperationError::CycleLimitExceeded { limit })
            }
            _ => Ok(()),
        }
    }
}

fn adjacency(network: &CreditNetwork) -> Vec<Vec<usize>> {
    network
        .rows()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, &l)| l > 0.0)
                .map(|(j, _)| j)
                .collect()
        })
        .collect()
}

/// Vertices of the strongly connected component containing `root` within
/// the subgraph induced by `allowed`.
fn component_of(
    adj: &[Vec<usize>],
    radj: &[Vec<usize>],
    allowed: impl Fn(usize) -> bool,
    root: usize,
) -> Vec<bool> {
    let reach = |edges: &[Vec<usize>]| {
        let mut seen = vec![false; edges.len()];
        seen[root] = true;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for &w in &edges[v] {
                if allowed(w) && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    };
    let forward = reach(adj);
    let backward = reach(radj);
    forward.iter().zip(backward).map(|(&f, b)| f && b).collect()
}

struct Johnson<'a> {
    adj: &'a [Vec<usize>],
    in_scc: Vec<bool>,
    blocked: Vec<bool>,
    blocked_by: Vec<BTreeSet<usize>>,
    path: Vec<usize>,
    start: usize,
}

impl Johnson<'_> {
    fn unblock(&mut self, v: usize) {
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            if self.blocked[u] {
                self.blocked[u] = false;
                stack.extend(std::mem::take(&mut self.blocked_by[u]));
            }
        }
    }

    fn circuit(&mut self, v: usize, out: &mut Collector) -> Result<bool, OperationError> {
        let mut found = false;
        self.path.push(v);
        self.blocked[v] = true;
        for &w in &self.adj[v] {
            if !self.in_scc[w] {
                continue;
            }
            if w == self.start {
                out.push(self.path.clone())?;
                found = true;
            } else if !self.blocked[w] && self.circuit(w, out)? {
                found = true;
            }
        }
        if found {
            self.unblock(v);
        } else {
            for &w in &self.adj[v] {
                if self.in_scc[w] {
                    self.blocked_by[w].insert(v);
                }
            }
        }
        self.path.pop();
        Ok(found)
    }
}

fn johnson(adj: &[Vec<usize>], out: &mut Collector) -> Result<(), OperationError> {
    let n = adj.len();
    let mut radj = vec![Vec::new(); n];
    for (v, targets) in adj.iter().enumerate() {
        for &w in targets {
            radj[w].push(v);
        }
    }
    for start in 0..n {
        let in_scc = component_of(adj, &radj, |w| w >= start, start);
        if in_scc.iter().filter(|&&b| b).count() < 2 {
            continue;
        }
        let mut search = Johnson {
            adj,
            in_scc,
            blocked: vec![false; n],
            blocked_by: vec![BTreeSet::new(); n],
            path: Vec::new(),
            start,
        };
        search.circuit(start, out)?;
    }
    Ok(())
}

fn bounded(adj: &[Vec<usize>], max_len: usize, out: &mut Collector) -> Result<(), OperationError> {
    fn extend(
        adj: &[Vec<usize>],
        start: usize,
        max_len: usize,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        out: &mut Collector,
    ) -> Result<(), OperationError> {
        let v = *path.last().expect("path starts non-empty");
        for &w in &adj[v] {
            if w == start {
                out.push(path.clone())?;
            } else if w > start && !on_path[w] && path.len() < max_len {
                on_path[w] = true;
                path.push(w);
                extend(adj, start, max_len, path, on_path, out)?;
                path.pop();
                on_path[w] = false;
            }
        }
        Ok(())
    }
    let n = adj.len();
    let mut on_path = vec![false; n];
    for start in 0..n {
        on_path[start] = true;
        let mut path = vec![start];
        extend(adj, start, max_len, &mut path, &mut on_path, out)?;
        on_path[start] = false;
    }
    Ok(())
}

/// Every simple directed cycle over positive liabilities, each rooted at its
/// smallest firm, sorted by length descending and then lexicographically.
pub fn enumerate_simple_cycles(
    network: &CreditNetwork,
    limits: &CycleLimits,
) -> Result<Vec<DebtCycle>, OperationError> {
    let adj = adjacency(network);
    let mut out = Collector {
        cycles: Vec::new(),
        max_count: limits.max_count,
    };
    match limits.max_len {
        Some(max_len) if max_len < 2 => {}
        Some(max_len) => bounded(&adj, max_len, &mut out)?,
        None => johnson(&adj, &mut out)?,
    }
    let mut cycles = out.cycles;
    cycles.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    Ok(cycles
        .into_iter()
        .map(|firms| DebtCycle::new_unchecked(network, firms))
        .collect())
}
