//! Modularity-based community detection.
//!
//! Three optimizers (leading eigenvector, leading eigenvector pair, Louvain)
//! are each run raw and followed by node-move refinement, giving the six
//! partitions returned by [`detect_all`].

mod kl;
mod louvain;
mod spectral;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Attribute, Network, NetworkView};

pub use kl::kl_refine;
pub use louvain::louvain;
pub use spectral::{spectral_partition, SpectralMode};

/// The six detection pipelines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "spectral1")]
    Spectral1,
    #[serde(rename = "spectral1+kl")]
    Spectral1Kl,
    #[serde(rename = "spectral2")]
    Spectral2,
    #[serde(rename = "spectral2+kl")]
    Spectral2Kl,
    #[serde(rename = "louvain")]
    Louvain,
    #[serde(rename = "louvain+kl")]
    LouvainKl,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Spectral1,
        Method::Spectral1Kl,
        Method::Spectral2,
        Method::Spectral2Kl,
        Method::Louvain,
        Method::LouvainKl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Spectral1 => "spectral1",
            Method::Spectral1Kl => "spectral1+kl",
            Method::Spectral2 => "spectral2",
            Method::Spectral2Kl => "spectral2+kl",
            Method::Louvain => "louvain",
            Method::LouvainKl => "louvain+kl",
        }
    }

    pub fn refined(self) -> bool {
        matches!(self, Method::Spectral1Kl | Method::Spectral2Kl | Method::LouvainKl)
    }

    /// Whether the result depends on the RNG seed.
    pub fn seeded(self) -> bool {
        matches!(self, Method::Louvain | Method::LouvainKl)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

/// Where a partition came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Detected { method: Method, seed: u64 },
    Attribute(Attribute),
    External,
}

/// Hard assignment of every node to one community, labels `0..c`.
///
/// Labels are canonical: communities are numbered in order of their
/// smallest member, so equal partitions compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    assignment: Vec<usize>,
    community_count: usize,
    pub provenance: Provenance,
}

impl Partition {
    /// Relabels arbitrary community ids into canonical form.
    pub fn from_assignment<T: Copy + Eq + std::hash::Hash>(labels: &[T], provenance: Provenance) -> Self {
        let mut map = std::collections::HashMap::new();
        let assignment = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Partition {
            assignment,
            community_count: map.len(),
            provenance,
        }
    }

    pub fn single(n: usize, provenance: Provenance) -> Self {
        Partition {
            assignment: vec![0; n],
            community_count: usize::from(n > 0),
            provenance,
        }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn community_count(&self) -> usize {
        self.community_count
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn community(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.community_count];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn method(&self) -> Option<Method> {
        match self.provenance {
            Provenance::Detected { method, .. } => Some(method),
            _ => None,
        }
    }
}

/// Modularity with the group-pair edge-end fractions it was computed from.
#[derive(Clone, Debug, PartialEq)]
pub struct ModularityScore {
    pub q: f64,
    /// Nonzero `e_ij`: fraction of edge ends in group `i` whose other end is in `j`.
    pub e_matrix: BTreeMap<(usize, usize), f64>,
    /// `b_i = sum_j e_ij`.
    pub b: Vec<f64>,
}

/// `Q = sum_i (e_ii - b_i^2)`.
pub fn modularity(view: &NetworkView, partition: &Partition) -> Result<ModularityScore> {
    let net = &view.network;
    check_cover(net, partition)?;
    let ends = 2 * net.edge_count();
    if ends == 0 {
        return Err(Error::DegenerateInput("modularity of an edgeless view".into()));
    }
    let mut counts: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for &(a, b) in net.edges() {
        let (ca, cb) = (partition.community(a), partition.community(b));
        *counts.entry((ca, cb)).or_default() += 1;
        *counts.entry((cb, ca)).or_default() += 1;
    }
    let mut b = vec![0.0; partition.community_count()];
    let mut e_matrix = BTreeMap::new();
    let mut trace = 0.0;
    for (&(i, j), &c) in &counts {
        let v = c as f64 / ends as f64;
        b[i] += v;
        if i == j {
            trace += v;
        }
        e_matrix.insert((i, j), v);
    }
    let q = trace - b.iter().map(|x| x * x).sum::<f64>();
    Ok(ModularityScore { q, e_matrix, b })
}

fn check_cover(net: &Network, partition: &Partition) -> Result<()> {
    if partition.len() != net.node_count() {
        return Err(Error::Domain(format!(
            "partition covers {} nodes, view has {}",
            partition.len(),
            net.node_count()
        )));
    }
    Ok(())
}

/// Modularity from integer community totals; zero for edgeless graphs.
///
/// `Q = sum_c [ L_c / m - (K_c / 2m)^2 ]` with `L_c` internal edges and
/// `K_c` total degree of community `c`.
pub(crate) fn modularity_of_labels(net: &Network, labels: &[usize]) -> f64 {
    let m = net.edge_count();
    if m == 0 {
        return 0.0;
    }
    let c = labels.iter().copied().max().map_or(0, |x| x + 1);
    let mut internal = vec![0u64; c];
    let mut total = vec![0u64; c];
    for v in 0..net.node_count() {
        total[labels[v]] += net.degree(v) as u64;
    }
    for &(a, b) in net.edges() {
        if labels[a] == labels[b] {
            internal[labels[a]] += 1;
        }
    }
    let m = m as f64;
    (0..c)
        .map(|i| internal[i] as f64 / m - (total[i] as f64 / (2.0 * m)).powi(2))
        .sum()
}

/// Fast modularity value for a partition of `view`.
pub fn modularity_value(view: &NetworkView, partition: &Partition) -> f64 {
    modularity_of_labels(&view.network, partition.assignment())
}

/// Runs all six method combinations, in [`Method::ALL`] order.
pub fn detect_all(view: &NetworkView, seed: u64) -> Vec<Partition> {
    let bases = [Method::Spectral1, Method::Spectral2, Method::Louvain];
    let pairs: Vec<(Partition, Partition)> = bases
        .par_iter()
        .map(|&base| {
            let (raw, refined_method) = match base {
                Method::Spectral1 => (spectral_partition(view, SpectralMode::One), Method::Spectral1Kl),
                Method::Spectral2 => (spectral_partition(view, SpectralMode::Two), Method::Spectral2Kl),
                _ => (louvain(view, seed), Method::LouvainKl),
            };
            let raw = raw.with_provenance(Provenance::Detected { method: base, seed });
            let refined = kl_refine(view, &raw).with_provenance(Provenance::Detected {
                method: refined_method,
                seed,
            });
            (raw, refined)
        })
        .collect();
    pairs.into_iter().flat_map(|(a, b)| [a, b]).collect()
}

/// Runs a single method.
pub fn detect(view: &NetworkView, method: Method, seed: u64) -> Partition {
    let raw = match method {
        Method::Spectral1 | Method::Spectral1Kl => spectral_partition(view, SpectralMode::One),
        Method::Spectral2 | Method::Spectral2Kl => spectral_partition(view, SpectralMode::Two),
        Method::Louvain | Method::LouvainKl => louvain(view, seed),
    };
    let out = if method.refined() { kl_refine(view, &raw) } else { raw };
    out.with_provenance(Provenance::Detected { method, seed })
}
