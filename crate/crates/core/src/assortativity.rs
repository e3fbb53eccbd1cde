//! Categorical mixing matrices and the scalar assortativity coefficient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Attribute, NetworkView, MISSING};

/// Whether nodes with a Missing code take part in a computation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissingPolicy {
    /// Missing is an ordinary category.
    #[default]
    Include,
    /// Nodes with a Missing code are dropped (for mixing matrices, every
    /// edge with a Missing endpoint).
    Exclude,
}

impl MissingPolicy {
    pub fn name(self) -> &'static str {
        match self {
            MissingPolicy::Include => "include",
            MissingPolicy::Exclude => "exclude",
        }
    }
}

/// Edge-end counts by category pair.
///
/// Each undirected edge between categories `s` and `t` adds one to both
/// `counts[s][t]` and `counts[t][s]`, so the total is twice the edge count
/// and within-category edges add two to the diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct MixingMatrix {
    pub categories: Vec<u32>,
    pub counts: Vec<Vec<u64>>,
    pub normalized: Vec<Vec<f64>>,
}

impl MixingMatrix {
    /// Builds a matrix from symmetric raw counts.
    pub fn from_counts(categories: Vec<u32>, counts: Vec<Vec<u64>>) -> Result<Self> {
        let k = categories.len();
        if counts.len() != k || counts.iter().any(|row| row.len() != k) {
            return Err(Error::Domain(format!("mixing matrix must be {k}x{k}")));
        }
        for i in 0..k {
            for j in 0..i {
                if counts[i][j] != counts[j][i] {
                    return Err(Error::Domain("mixing counts must be symmetric".into()));
                }
            }
        }
        let total: u64 = counts.iter().flatten().sum();
        if total == 0 {
            return Err(Error::DegenerateInput("mixing matrix has no edges".into()));
        }
        let total = total as f64;
        let normalized = counts
            .iter()
            .map(|row| row.iter().map(|&c| c as f64 / total).collect())
            .collect();
        Ok(MixingMatrix {
            categories,
            counts,
            normalized,
        })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

/// Mixing matrix of `attribute` over the view's edges.
///
/// Categories are the distinct codes present among the view's nodes, in
/// ascending order (Missing included unless excluded by `policy`).
pub fn mixing_matrix(view: &NetworkView, attribute: Attribute, policy: MissingPolicy) -> Result<MixingMatrix> {
    let net = &view.network;
    let keep = |code: u32| policy == MissingPolicy::Include || code != MISSING;
    let mut categories: Vec<u32> = (0..net.node_count())
        .map(|v| net.attribute(v, attribute))
        .filter(|&c| keep(c))
        .collect();
    categories.sort_unstable();
    categories.dedup();
    let k = categories.len();
    let slot = |code: u32| categories.binary_search(&code).expect("category present");
    let mut counts = vec![vec![0u64; k]; k];
    let mut used = 0usize;
    for &(a, b) in net.edges() {
        let (ca, cb) = (net.attribute(a, attribute), net.attribute(b, attribute));
        if !keep(ca) || !keep(cb) {
            continue;
        }
        let (s, t) = (slot(ca), slot(cb));
        counts[s][t] += 1;
        counts[t][s] += 1;
        used += 1;
    }
    if used == 0 {
        return Err(Error::DegenerateInput(format!(
            "{} view has no edges to tabulate for {attribute}",
            view.kind
        )));
    }
    MixingMatrix::from_counts(categories, counts)
}

/// Newman's categorical assortativity `r = (tr e - ||e^2||) / (1 - ||e^2||)`
/// where `||.||` is the entry-wise sum.
pub fn assortativity(mm: &MixingMatrix) -> Result<f64> {
    let e = &mm.normalized;
    let k = e.len();
    let trace: f64 = (0..k).map(|i| e[i][i]).sum();
    // ||e^2|| = sum_i (row_i . col_i products) = sum_{i,j} (e^2)_{ij}
    //         = sum_k (sum_i e_ik)(sum_j e_kj)
    let row: Vec<f64> = e.iter().map(|r| r.iter().sum()).collect();
    let col: Vec<f64> = (0..k).map(|j| e.iter().map(|r| r[j]).sum()).collect();
    let sq: f64 = (0..k).map(|m| col[m] * row[m]).sum();
    let denom = 1.0 - sq;
    if denom.abs() < 1e-12 {
        return Err(Error::UndefinedAssortativity);
    }
    Ok(((trace - sq) / denom).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Network, NodeAttributes, ViewKind};

    fn view_with(codes: &[u32], edges: &[(usize, usize)]) -> NetworkView {
        let attrs = codes
            .iter()
            .map(|&year| NodeAttributes {
                year,
                ..Default::default()
            })
            .collect();
        NetworkView::whole(ViewKind::Full, Network::new(attrs, None, edges.iter().copied()).unwrap())
    }

    fn from_normalized(e: [[u64; 2]; 2]) -> MixingMatrix {
        MixingMatrix::from_counts(vec![1, 2], e.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn single_within_type_edge() {
        let v = view_with(&[1, 1], &[(0, 1)]);
        let mm = mixing_matrix(&v, Attribute::Year, MissingPolicy::Include).unwrap();
        assert_eq!(mm.counts, vec![vec![2]]);
        assert_eq!(mm.normalized, vec![vec![1.0]]);
        assert!(matches!(assortativity(&mm), Err(Error::UndefinedAssortativity)));
    }

    #[test]
    fn alternating_four_cycle_is_disassortative() {
        let v = view_with(&[1, 2, 1, 2], &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let mm = mixing_matrix(&v, Attribute::Year, MissingPolicy::Include).unwrap();
        assert_eq!(mm.normalized, vec![vec![0.0, 0.5], vec![0.5, 0.0]]);
        assert!((assortativity(&mm).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn textbook_values() {
        assert!((assortativity(&from_normalized([[1, 0], [0, 1]])).unwrap() - 1.0).abs() < 1e-12);
        assert!(assortativity(&from_normalized([[1, 1], [1, 1]])).unwrap().abs() < 1e-12);
        // tr e = 0.8, ||e^2|| = 0.5 -> 0.3 / 0.5
        assert!((assortativity(&from_normalized([[4, 1], [1, 4]])).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn mixed_example_matches_edge_enumeration() {
        let codes = [0, 1, 1, 2, 2, 3];
        let edges = [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (4, 5), (1, 5)];
        let v = view_with(&codes, &edges);
        let mm = mixing_matrix(&v, Attribute::Year, MissingPolicy::Include).unwrap();
        assert_eq!(mm.categories, vec![0, 1, 2, 3]);
        // brute force: every ordered (edge end, other end) pair
        let mut oracle = [[0u64; 4]; 4];
        for &(a, b) in &edges {
            for (x, y) in [(a, b), (b, a)] {
                oracle[codes[x] as usize][codes[y] as usize] += 1;
            }
        }
        for i in 0..4 {
            assert_eq!(mm.counts[i], oracle[i].to_vec());
        }
        assert_eq!(mm.total(), 14);
    }

    #[test]
    fn exclude_missing_drops_incident_edges() {
        let v = view_with(&[0, 1, 1, 2], &[(0, 1), (1, 2), (2, 3)]);
        let mm = mixing_matrix(&v, Attribute::Year, MissingPolicy::Exclude).unwrap();
        assert_eq!(mm.categories, vec![1, 2]);
        assert_eq!(mm.total(), 4);
    }

    #[test]
    fn edgeless_is_degenerate() {
        let v = view_with(&[1, 2], &[]);
        assert!(matches!(
            mixing_matrix(&v, Attribute::Year, MissingPolicy::Include),
            Err(Error::DegenerateInput(_))
        ));
    }
}
