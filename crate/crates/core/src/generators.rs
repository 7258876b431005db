//! Seeded synthetic networks for the experiment topologies, plus network
//! file loading and saving.
//!
//! One `ChaCha8Rng` per instance draws, in order: the edge set, then one
//! liability per edge in row-major order, then one external asset per firm.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{default_labels, CreditNetwork, ModelError, NetworkFile};

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("invalid topology spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    File(#[from] NetworkFileError),
}

#[derive(Debug, Error)]
pub enum NetworkFileError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: malformed JSON at line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: does not match the network schema: {message}")]
    Schema { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    InvariantViolation {
        path: PathBuf,
        #[source]
        source: ModelError,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Topology {
    ErdosRenyi {
        #[serde(default = "default_er_p")]
        p: f64,
    },
    CorePeriphery {
        #[serde(default = "default_core")]
        core: usize,
        #[serde(default = "default_core_density")]
        core_density: f64,
        /// Probability of each periphery-to-core and core-to-periphery link.
        #[serde(default = "default_periphery_density")]
        periphery_density: f64,
    },
    IsolatedBlocks {
        sizes: Vec<usize>,
        /// Probability of each extra within-block link on top of a random
        /// spanning tree that keeps the block connected.
        #[serde(default = "default_block_density")]
        density: f64,
    },
    DagSccs {
        sizes: Vec<usize>,
        /// Probability of each forward link between different components.
        #[serde(default = "default_inter_probability")]
        inter_probability: f64,
    },
    FromFile {
        path: PathBuf,
    },
}

fn default_er_p() -> f64 {
    0.3
}
fn default_core() -> usize {
    3
}
fn default_core_density() -> f64 {
    0.8
}
fn default_periphery_density() -> f64 {
    0.4
}
fn default_block_density() -> f64 {
    0.3
}
fn default_inter_probability() -> f64 {
    0.15
}

impl Topology {
    /// The four synthetic topologies with default parameters for `n` firms.
    pub fn synthetic(n: usize) -> [Topology; 4] {
        [
            Topology::ErdosRenyi { p: default_er_p() },
            Topology::CorePeriphery {
                core: default_core().min(n),
                core_density: default_core_density(),
                periphery_density: default_periphery_density(),
            },
            Topology::IsolatedBlocks {
                sizes: vec![n / 2, n - n / 2],
                density: default_block_density(),
            },
            Topology::DagSccs {
                sizes: if n == 10 {
                    vec![3, 3, 4]
                } else {
                    vec![n * 3 / 10, n * 3 / 10, n - 2 * (n * 3 / 10)]
                },
                inter_probability: default_inter_probability(),
            },
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::ErdosRenyi { .. } => "erdos_renyi",
            Self::CorePeriphery { .. } => "core_periphery",
            Self::IsolatedBlocks { .. } => "isolated_blocks",
            Self::DagSccs { .. } => "dag_sccs",
            Self::FromFile { .. } => "from_file",
        }
    }

    /// Short label used for instance names in result tables.
    pub fn short_name(&self) -> &'static str {
        match self {
            Self::ErdosRenyi { .. } => "ER",
            Self::CorePeriphery { .. } => "CP",
            Self::IsolatedBlocks { .. } => "IB",
            Self::DagSccs { .. } => "SCC",
            Self::FromFile { .. } => "FILE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologySpec {
    #[serde(flatten)]
    pub topology: Topology,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_liability_range")]
    pub liability_range: [f64; 2],
    #[serde(default = "default_asset_range")]
    pub asset_range: [f64; 2],
    #[serde(default)]
    pub seed: u64,
    /// Draw whole-number amounts instead of continuous ones.
    #[serde(default)]
    pub integer_amounts: bool,
}

fn default_n() -> usize {
    10
}
fn default_liability_range() -> [f64; 2] {
    [15.0, 40.0]
}
fn default_asset_range() -> [f64; 2] {
    [30.0, 50.0]
}

impl TopologySpec {
    pub fn new(topology: Topology, n: usize, seed: u64) -> Self {
        Self {
            topology,
            n,
            liability_range: default_liability_range(),
            asset_range: default_asset_range(),
            seed,
            integer_amounts: false,
        }
    }

    pub fn with_integer_amounts(mut self) -> Self {
        self.integer_amounts = true;
        self
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        let invalid = |msg: String| Err(GeneratorError::InvalidSpec(msg));
        for (name, [lo, hi]) in [
            ("liability_range", self.liability_range),
            ("asset_range", self.asset_range),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo <= hi) {
                return invalid(format!("{name} must satisfy 0 <= low <= high, got [{lo}, {hi}]"));
            }
            if self.integer_amounts && (lo.fract() != 0.0 || hi.fract() != 0.0) {
                return invalid(format!("{name} needs whole-number bounds for integer amounts"));
            }
        }
        let probability = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                invalid(format!("{name} must lie in [0, 1], got {p}"))
            }
        };
        let sizes_sum = |sizes: &[usize]| {
            if sizes.iter().sum::<usize>() != self.n || sizes.contains(&0) {
                invalid(format!("component sizes {sizes:?} must be positive and sum to n = {}", self.n))
            } else {
                Ok(())
            }
        };
        match &self.topology {
            Topology::ErdosRenyi { p } => probability("p", *p),
            Topology::CorePeriphery {
                core,
                core_density,
                periphery_density,
            } => {
                probability("core_density", *core_density)?;
                probability("periphery_density", *periphery_density)?;
                if *core > self.n {
                    return invalid(format!("core size {core} exceeds n = {}", self.n));
                }
                Ok(())
            }
            Topology::IsolatedBlocks { sizes, density } => {
                probability("density", *density)?;
                sizes_sum(sizes)
            }
            Topology::DagSccs {
                sizes,
                inter_probability,
            } => {
                probability("inter_probability", *inter_probability)?;
                sizes_sum(sizes)
            }
            Topology::FromFile { .. } => Ok(()),
        }
    }
}

/// Builds the network described by `spec`; a pure function of the spec.
pub fn generate(spec: &TopologySpec) -> Result<CreditNetwork, GeneratorError> {
    spec.validate()?;
    if let Topology::FromFile { path } = &spec.topology {
        return Ok(load_network_file(path)?);
    }
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut adjacent = vec![false; n * n];
    match &spec.topology {
        Topology::ErdosRenyi { p } => {
            for i in 0..n {
                for j in (0..n).filter(|&j| j != i) {
                    adjacent[i * n + j] = rng.gen_bool(*p);
                }
            }
        }
        Topology::CorePeriphery {
            core,
            core_density,
            periphery_density,
        } => {
            for i in 0..n {
                for j in (0..n).filter(|&j| j != i) {
                    let p = match (i < *core, j < *core) {
                        (true, true) => *core_density,
                        (false, false) => continue,
                        _ => *periphery_density,
                    };
                    adjacent[i * n + j] = rng.gen_bool(p);
                }
            }
        }
        Topology::IsolatedBlocks { sizes, density } => {
            let mut start = 0;
            for &size in sizes {
                for t in 1..size {
                    let parent = start + rng.gen_range(0..t);
                    let child = start + t;
                    let (b, l) = if rng.gen_bool(0.5) {
                        (child, parent)
                    } else {
                        (parent, child)
                    };
                    adjacent[b * n + l] = true;
                }
                for i in start..start + size {
                    for j in (start..start + size).filter(|&j| j != i) {
                        if !adjacent[i * n + j] {
                            adjacent[i * n + j] = rng.gen_bool(*density);
                        }
                    }
                }
                start += size;
            }
        }
        Topology::DagSccs {
            sizes,
            inter_probability,
        } => {
            let mut component = Vec::with_capacity(n);
            for (c, &size) in sizes.iter().enumerate() {
                component.extend(std::iter::repeat_n(c, size));
            }
            for i in 0..n {
                for j in (0..n).filter(|&j| j != i) {
                    adjacent[i * n + j] = match component[i].cmp(&component[j]) {
                        std::cmp::Ordering::Equal => true,
                        std::cmp::Ordering::Less => rng.gen_bool(*inter_probability),
                        std::cmp::Ordering::Greater => false,
                    };
                }
            }
        }
        Topology::FromFile { .. } => unreachable!("handled above"),
    }
    let mut draw = |[lo, hi]: [f64; 2]| {
        if spec.integer_amounts {
            rng.gen_range(lo as i64..=hi as i64) as f64
        } else {
            rng.gen_range(lo..=hi)
        }
    };
    let liabilities: Vec<f64> = adjacent
        .iter()
        .map(|&edge| if edge { draw(spec.liability_range) } else { 0.0 })
        .collect();
    let assets: Vec<f64> = (0..n).map(|_| draw(spec.asset_range)).collect();
    CreditNetwork::from_flat(default_labels(n), liabilities, assets)
        .map_err(|err| GeneratorError::InvalidSpec(err.to_string()))
}

pub fn load_network_file(path: impl AsRef<Path>) -> Result<CreditNetwork, NetworkFileError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| NetworkFileError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_network_json(&text, path)
}

/// Parses network JSON; `origin` only labels errors.
pub fn parse_network_json(text: &str, origin: &Path) -> Result<CreditNetwork, NetworkFileError> {
    let file: NetworkFile = serde_json::from_str(text).map_err(|err| {
        use serde_json::error::Category;
        match err.classify() {
            Category::Data => NetworkFileError::Schema {
                path: origin.to_owned(),
                message: err.to_string(),
            },
            _ => NetworkFileError::Parse {
                path: origin.to_owned(),
                line: err.line(),
                column: err.column(),
                message: err.to_string(),
            },
        }
    })?;
    CreditNetwork::try_from(file).map_err(|source| NetworkFileError::InvariantViolation {
        path: origin.to_owned(),
        source,
    })
}

/// Writes the canonical JSON form of `network`.
pub fn save_network_file(network: &CreditNetwork, path: impl AsRef<Path>) -> Result<(), NetworkFileError> {
    let path = path.as_ref();
    fs::write(path, network.to_canonical_json()).map_err(|source| NetworkFileError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Structural predicates for generated topologies.
pub mod checks {
    use petgraph::algo::{condensation, is_cyclic_directed, tarjan_scc};
    use petgraph::graph::DiGraph;
    use petgraph::unionfind::UnionFind;

    use crate::model::CreditNetwork;

    pub fn liability_graph(network: &CreditNetwork) -> DiGraph<usize, f64> {
        let mut graph = DiGraph::new();
        let nodes: Vec<_> = (0..network.len()).map(|i| graph.add_node(i)).collect();
        for (b, l) in network.edges() {
            graph.add_edge(nodes[b], nodes[l], network.liability(b, l));
        }
        graph
    }

    pub fn weak_component_count(network: &CreditNetwork) -> usize {
        let mut sets = UnionFind::new(network.len());
        for (b, l) in network.edges() {
            sets.union(b, l);
        }
        let mut roots = sets.into_labeling();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }

    pub fn scc_count(network: &CreditNetwork) -> usize {
        tarjan_scc(&liability_graph(network)).len()
    }

    pub fn condensation_is_acyclic(network: &CreditNetwork) -> bool {
        !is_cyclic_directed(&condensation(liability_graph(network), true))
    }

    /// Firms `0..core` form the core; no periphery firm deals with another.
    pub fn is_core_periphery(network: &CreditNetwork, core: usize) -> bool {
        network.edges().into_iter().all(|(b, l)| b < core || l < core)
    }

    /// No debt crosses between consecutive blocks of the given sizes.
    pub fn blocks_isolated(network: &CreditNetwork, sizes: &[usize]) -> bool {
        let block = block_index(sizes);
        network.edges().into_iter().all(|(b, l)| block[b] == block[l])
    }

    /// Each block is complete and inter-block debts only run from earlier to
    /// later blocks.
    pub fn is_dag_of_complete_sccs(network: &CreditNetwork, sizes: &[usize]) -> bool {
        let block = block_index(sizes);
        let n = network.len();
        (0..n).all(|i| {
            (0..n).filter(|&j| j != i).all(|j| {
                let owes = network.liability(i, j) > 0.0;
                match block[i].cmp(&block[j]) {
                    std::cmp::Ordering::Equal => owes,
                    std::cmp::Ordering::Greater => !owes,
                    std::cmp::Ordering::Less => true,
                }
            })
        })
    }

    fn block_index(sizes: &[usize]) -> Vec<usize> {
        sizes
            .iter()
            .enumerate()
            .flat_map(|(b, &size)| std::iter::repeat_n(b, size))
            .collect()
    }
}
