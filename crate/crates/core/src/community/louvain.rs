//! Two-phase greedy modularity optimization (Louvain).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::community::{Partition, Provenance};
use crate::graph::NetworkView;

/// Moves smaller than this are treated as no improvement.
const EPS: f64 = 1e-12;

/// Weighted graph used across aggregation levels. `loops[i]` is the weight
/// of edges internal to super-node `i`.
struct Level {
    adjacency: Vec<Vec<(usize, f64)>>,
    loops: Vec<f64>,
    degree: Vec<f64>,
}

impl Level {
    fn len(&self) -> usize {
        self.adjacency.len()
    }
}

/// Louvain partition of `view`.
///
/// Each level shuffles the node sweep order with a ChaCha8 stream seeded by
/// `seed`. A node only leaves its community for a strictly better one; ties
/// between candidate communities go to the lowest community index.
pub fn louvain(view: &NetworkView, seed: u64) -> Partition {
    let net = &view.network;
    let n = net.node_count();
    let m = net.edge_count() as f64;
    if net.edge_count() == 0 {
        return Partition::single(n, Provenance::External);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = Level {
        adjacency: (0..n)
            .map(|v| net.neighbors(v).iter().map(|&u| (u, 1.0)).collect())
            .collect(),
        loops: vec![0.0; n],
        degree: (0..n).map(|v| net.degree(v) as f64).collect(),
    };
    // membership of each original node in the current level's super-nodes
    let mut membership: Vec<usize> = (0..n).collect();

    loop {
        let (community, moved) = local_moves(&level, m, &mut rng);
        if !moved {
            break;
        }
        let (relabeled, count) = renumber(&community);
        for c in membership.iter_mut() {
            *c = relabeled[*c];
        }
        level = aggregate(&level, &relabeled, count);
        if count == 1 {
            break;
        }
    }
    Partition::from_assignment(&membership, Provenance::External)
}

fn local_moves(level: &Level, m: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
    let n = level.len();
    let two_m = 2.0 * m;
    let mut community: Vec<usize> = (0..n).collect();
    let mut total: Vec<f64> = level.degree.clone();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut link = vec![0.0f64; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut any_move = false;
    loop {
        let mut moved = false;
        for &v in &order {
            let own = community[v];
            let k = level.degree[v];
            for &(u, w) in &level.adjacency[v] {
                let c = community[u];
                if link[c] == 0.0 {
                    touched.push(c);
                }
                link[c] += w;
            }
            total[own] -= k;
            // gain of inserting v into c, up to the constant factor 1/m
            let gain = |c: usize, link: &[f64]| link[c] - total[c] * k / two_m;
            let stay = gain(own, &link);
            let mut best = own;
            let mut best_gain = stay;
            // ascending order so equal gains keep the lowest index
            touched.sort_unstable();
            for &c in &touched {
                if c == own {
                    continue;
                }
                let g = gain(c, &link);
                if g > best_gain + EPS {
                    best = c;
                    best_gain = g;
                }
            }
            total[best] += k;
            if best != own {
                community[v] = best;
                moved = true;
                any_move = true;
            }
            for &c in &touched {
                link[c] = 0.0;
            }
            touched.clear();
        }
        if !moved {
            break;
        }
    }
    (community, any_move)
}

fn renumber(community: &[usize]) -> (Vec<usize>, usize) {
    let mut map = vec![usize::MAX; community.len()];
    let mut next = 0;
    let out = community
        .iter()
        .map(|&c| {
            if map[c] == usize::MAX {
                map[c] = next;
                next += 1;
            }
            map[c]
        })
        .collect();
    (out, next)
}

fn aggregate(level: &Level, community: &[usize], count: usize) -> Level {
    let mut weights: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); count];
    let mut loops = vec![0.0; count];
    let mut degree = vec![0.0; count];
    for v in 0..level.len() {
        let cv = community[v];
        loops[cv] += level.loops[v];
        degree[cv] += level.degree[v];
        for &(u, w) in &level.adjacency[v] {
            let cu = community[u];
            if cu == cv {
                // each internal edge is seen from both ends
                loops[cv] += w / 2.0;
            } else {
                *weights[cv].entry(cu).or_default() += w;
            }
        }
    }
    Level {
        adjacency: weights.into_iter().map(|m| m.into_iter().collect()).collect(),
        loops,
        degree,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::test_graphs::*;
    use crate::community::modularity_value;

    #[test]
    fn recovers_bridged_cliques() {
        let v = bridged_cliques();
        let (opt, _) = brute_force_optimum(&v);
        let p = louvain(&v, 7);
        assert_eq!(p.assignment(), &[0, 0, 0, 0, 1, 1, 1, 1]);
        assert!((modularity_value(&v, &p) - opt).abs() < 1e-12);
    }

    #[test]
    fn star_is_not_worse_than_any_single_split() {
        // S5: hub 0 with five leaves.
        let v = view(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]);
        let q = modularity_value(&v, &louvain(&v, 3));
        // every bipartition {S, V \ S}
        let mut best_split = f64::NEG_INFINITY;
        for mask in 1u32..(1 << 6) - 1 {
            let labels: Vec<usize> = (0..6).map(|i| ((mask >> i) & 1) as usize).collect();
            best_split = best_split.max(direct_q(&v, &labels));
        }
        assert!(q >= best_split - 1e-12, "{q} < {best_split}");
        let (opt, _) = brute_force_optimum(&v);
        assert!(q <= opt + 1e-12);
    }

    #[test]
    fn same_seed_same_partition() {
        let mut e = clique_edges(0..5);
        e.extend(clique_edges(5..10));
        e.extend(clique_edges(10..15));
        e.extend([(4, 5), (9, 10), (14, 0), (2, 7), (8, 12)]);
        let v = view(15, &e);
        assert_eq!(louvain(&v, 11), louvain(&v, 11));
    }

    #[test]
    fn level_weights_are_conserved() {
        let v = bridged_cliques();
        let n = v.node_count();
        let level = Level {
            adjacency: (0..n)
                .map(|i| v.network.neighbors(i).iter().map(|&u| (u, 1.0)).collect())
                .collect(),
            loops: vec![0.0; n],
            degree: (0..n).map(|i| v.network.degree(i) as f64).collect(),
        };
        let agg = aggregate(&level, &[0, 0, 0, 0, 1, 1, 1, 1], 2);
        assert_eq!(agg.loops, vec![6.0, 6.0]);
        assert_eq!(agg.adjacency, vec![vec![(1, 1.0)], vec![(0, 1.0)]]);
        assert_eq!(agg.degree, vec![13.0, 13.0]);
    }
}
