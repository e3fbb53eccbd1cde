//! Kernighan-Lin style node-move refinement.
//!
//! Each pass moves every node exactly once, always taking the best
//! available move even when it lowers modularity, then rolls back to the
//! best prefix of the move sequence. Passes repeat until one yields no
//! improvement.
//!
//! Gains are kept as exact integers scaled by `2 m^2`:
//! moving `i` from `A` to `B` changes modularity by
//! `[2m (k_iB - k_iA) - k_i (K_B - K_A + k_i)] / 2m^2`.

use crate::community::{Partition, Provenance};
use crate::graph::NetworkView;

/// Refines `partition`; the result never has lower modularity.
pub fn kl_refine(view: &NetworkView, partition: &Partition) -> Partition {
    let net = &view.network;
    let n = net.node_count();
    assert_eq!(partition.len(), n, "partition does not cover the view");
    let m = net.edge_count() as i64;
    if m == 0 || n < 2 {
        return partition.clone();
    }
    let degree: Vec<i64> = (0..n).map(|v| net.degree(v) as i64).collect();
    let mut labels: Vec<usize> = partition.assignment().to_vec();
    // Room for every node to open a fresh community.
    let capacity = partition.community_count() + n;
    let mut total = vec![0i64; capacity];
    for v in 0..n {
        total[labels[v]] += degree[v];
    }
    let mut free: Vec<usize> = (partition.community_count()..capacity).rev().collect();
    let mut size = vec![0usize; capacity];
    for &c in &labels {
        size[c] += 1;
    }

    let mut link = vec![0i64; capacity];
    let mut touched: Vec<usize> = Vec::new();
    loop {
        let mut moved = vec![false; n];
        let mut history: Vec<(usize, usize, usize)> = Vec::with_capacity(n);
        let mut running: i128 = 0;
        let mut best_total: i128 = 0;
        let mut best_len = 0usize;
        for _ in 0..n {
            // (gain, node, target)
            let mut best: Option<(i64, usize, usize)> = None;
            for v in 0..n {
                if moved[v] {
                    continue;
                }
                for &u in net.neighbors(v) {
                    if link[labels[u]] == 0 {
                        touched.push(labels[u]);
                    }
                    link[labels[u]] += 1;
                }
                touched.sort_unstable();
                let own = labels[v];
                let k_own = link[own];
                let k = degree[v];
                let gain_to = |k_to: i64, total_to: i64| 2 * m * (k_to - k_own) - k * (total_to - total[own] + k);
                for &c in touched.iter().filter(|&&c| c != own) {
                    let g = gain_to(link[c], total[c]);
                    if best.map_or(true, |(bg, _, _)| g > bg) {
                        best = Some((g, v, c));
                    }
                }
                for &c in &touched {
                    link[c] = 0;
                }
                touched.clear();
                // A fresh community, unless v is already alone.
                if size[own] > 1 {
                    let g = gain_to(0, 0);
                    if best.map_or(true, |(bg, _, _)| g > bg) {
                        best = Some((g, v, usize::MAX));
                    }
                }
            }
            let Some((gain, v, target)) = best else { break };
            let from = labels[v];
            let to = if target == usize::MAX {
                free.pop().expect("fresh community available")
            } else {
                target
            };
            apply_move(v, from, to, degree[v], &mut labels, &mut total, &mut size, &mut free);
            moved[v] = true;
            history.push((v, from, to));
            running += gain as i128;
            if running > best_total {
                best_total = running;
                best_len = history.len();
            }
        }
        for &(v, from, to) in history[best_len..].iter().rev() {
            apply_move(v, to, from, degree[v], &mut labels, &mut total, &mut size, &mut free);
        }
        if best_total <= 0 {
            break;
        }
    }
    Partition::from_assignment(&labels, Provenance::External).with_provenance(partition.provenance)
}

#[allow(clippy::too_many_arguments)]
fn apply_move(
    v: usize,
    from: usize,
    to: usize,
    k: i64,
    labels: &mut [usize],
    total: &mut [i64],
    size: &mut [usize],
    free: &mut Vec<usize>,
) {
    labels[v] = to;
    total[from] -= k;
    total[to] += k;
    size[from] -= 1;
    size[to] += 1;
    if size[from] == 0 {
        free.push(from);
    }
    if size[to] == 1 {
        if let Some(pos) = free.iter().rposition(|&c| c == to) {
            free.remove(pos);
        }
    }
}
