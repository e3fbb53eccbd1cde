//! Recursive spectral division of the modularity matrix.
//!
//! A group `g` is divided using the generalized modularity matrix
//! `B(g)_ij = A_ij - k_i k_j / 2m - delta_ij (k_i(g) - k_i K_g / 2m)`,
//! applied as an operator without forming the dense matrix. Every candidate
//! split is scored by its exact modularity change, and recursion stops when
//! no candidate improves modularity.

use std::f64::consts::PI;

use crate::community::{Partition, Provenance};
use crate::graph::{Network, NetworkView};

/// Number of leading eigenvectors used per division.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectralMode {
    /// Bisect by the sign of the leading eigenvector.
    One,
    /// Vector partitioning in the plane of the two leading eigenvectors,
    /// into two or three angular sectors.
    Two,
}

const MAX_ITERATIONS: usize = 100_000;
const RAYLEIGH_TOL: f64 = 1e-10;
const MIN_GAIN: f64 = 1e-10;
/// Groups up to this size get exhaustive three-sector search.
const EXHAUSTIVE_SECTORS: usize = 64;

/// Partitions a view by recursive spectral division.
pub fn spectral_partition(view: &NetworkView, mode: SpectralMode) -> Partition {
    let net = &view.network;
    let n = net.node_count();
    let provenance = Provenance::External;
    if net.edge_count() == 0 {
        return Partition::single(n, provenance);
    }
    let divider = Divider::new(net);
    let mut pending = vec![(0..n).collect::<Vec<usize>>()];
    let mut done = Vec::new();
    while let Some(group) = pending.pop() {
        match divider.divide(&group, mode) {
            Some(parts) => pending.extend(parts.into_iter().rev()),
            None => done.push(group),
        }
    }
    let mut labels = vec![0usize; n];
    for (c, group) in done.iter().enumerate() {
        for &v in group {
            labels[v] = c;
        }
    }
    Partition::from_assignment(&labels, provenance)
}

struct Divider<'a> {
    net: &'a Network,
    two_m: f64,
    degree: Vec<f64>,
}

/// `B(g)` restricted to one group, in local indices.
struct GroupOperator {
    adjacency: Vec<Vec<usize>>,
    degree: Vec<f64>,
    diagonal: Vec<f64>,
    two_m: f64,
    shift: f64,
}

impl GroupOperator {
    fn len(&self) -> usize {
        self.degree.len()
    }

    /// `y = B(g) x`
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let kx: f64 = self.degree.iter().zip(x).map(|(k, v)| k * v).sum::<f64>() / self.two_m;
        for i in 0..self.len() {
            let ax: f64 = self.adjacency[i].iter().map(|&j| x[j]).sum();
            y[i] = ax - self.degree[i] * kx - self.diagonal[i] * x[i];
        }
    }

    /// Leading eigenpair by shifted power iteration, orthogonal to `deflate`.
    fn leading_eigenpair(&self, deflate: &[&[f64]]) -> (f64, Vec<f64>) {
        let n = self.len();
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + start_perturbation(i)).collect();
        project_out(&mut x, deflate);
        normalize(&mut x);
        let mut y = vec![0.0; n];
        let mut previous = f64::NAN;
        let mut rayleigh = 0.0;
        for iteration in 0..MAX_ITERATIONS {
            self.apply(&x, &mut y);
            rayleigh = dot(&x, &y);
            for (yi, xi) in y.iter_mut().zip(&x) {
                *yi += self.shift * xi;
            }
            project_out(&mut y, deflate);
            if normalize(&mut y) == 0.0 {
                break;
            }
            std::mem::swap(&mut x, &mut y);
            if iteration > 2 && (rayleigh - previous).abs() < RAYLEIGH_TOL {
                break;
            }
            previous = rayleigh;
        }
        (rayleigh, x)
    }
}

/// Fixed, seed-free perturbation of the all-ones start vector.
fn start_perturbation(i: usize) -> f64 {
    let h = (i as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    ((h >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 0.5
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = dot(x, x).sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

fn project_out(x: &mut [f64], basis: &[&[f64]]) {
    for b in basis {
        let c = dot(x, b);
        x.iter_mut().zip(b.iter()).for_each(|(v, bv)| *v -= c * bv);
    }
}

impl<'a> Divider<'a> {
    fn new(net: &'a Network) -> Self {
        Divider {
            net,
            two_m: 2.0 * net.edge_count() as f64,
            degree: (0..net.node_count()).map(|v| net.degree(v) as f64).collect(),
        }
    }

    fn operator(&self, group: &[usize]) -> GroupOperator {
        let mut local = vec![usize::MAX; self.net.node_count()];
        for (i, &v) in group.iter().enumerate() {
            local[v] = i;
        }
        let adjacency: Vec<Vec<usize>> = group
            .iter()
            .map(|&v| {
                self.net
                    .neighbors(v)
                    .iter()
                    .filter_map(|&u| (local[u] != usize::MAX).then_some(local[u]))
                    .collect()
            })
            .collect();
        let degree: Vec<f64> = group.iter().map(|&v| self.degree[v]).collect();
        let group_degree: f64 = degree.iter().sum();
        let diagonal: Vec<f64> = adjacency
            .iter()
            .zip(&degree)
            .map(|(adj, k)| adj.len() as f64 - k * group_degree / self.two_m)
            .collect();
        // Gershgorin bound on the spectral radius of B(g).
        let shift = adjacency
            .iter()
            .zip(&degree)
            .map(|(adj, k)| 2.0 * (adj.len() as f64 + k * group_degree / self.two_m))
            .fold(0.0, f64::max);
        GroupOperator {
            adjacency,
            degree,
            diagonal,
            two_m: self.two_m,
            shift,
        }
    }

    /// Exact modularity change from splitting `group` by local `labels`.
    fn gain(&self, op: &GroupOperator, labels: &[usize], parts: usize) -> f64 {
        let m = self.two_m / 2.0;
        let mut internal = vec![0.0; parts];
        let mut total = vec![0.0; parts];
        let mut group_internal = 0.0;
        for i in 0..op.len() {
            total[labels[i]] += op.degree[i];
            for &j in &op.adjacency[i] {
                if j > i {
                    group_internal += 1.0;
                    if labels[i] == labels[j] {
                        internal[labels[i]] += 1.0;
                    }
                }
            }
        }
        let group_total: f64 = total.iter().sum();
        let after: f64 = (0..parts)
            .map(|c| internal[c] / m - (total[c] / self.two_m).powi(2))
            .sum();
        after - (group_internal / m - (group_total / self.two_m).powi(2))
    }

    fn divide(&self, group: &[usize], mode: SpectralMode) -> Option<Vec<Vec<usize>>> {
        if group.len() < 2 {
            return None;
        }
        let op = self.operator(group);
        let (lambda1, v1) = op.leading_eigenpair(&[]);
        if lambda1 <= MIN_GAIN {
            return None;
        }
        let sign_split: Vec<usize> = v1.iter().map(|&x| usize::from(x < 0.0)).collect();
        let mut candidates: Vec<(Vec<usize>, usize)> = vec![(sign_split, 2)];
        if mode == SpectralMode::Two {
            let (lambda2, v2) = op.leading_eigenpair(&[&v1]);
            let s1 = lambda1.sqrt();
            let s2 = if lambda2 > MIN_GAIN { lambda2.sqrt() } else { 0.0 };
            let vectors: Vec<[f64; 2]> = v1.iter().zip(&v2).map(|(a, b)| [s1 * a, s2 * b]).collect();
            candidates.extend(sector_candidates(&vectors));
        }
        let mut best: Option<(f64, Vec<usize>, usize)> = None;
        for (labels, parts) in candidates {
            let used = compact(&labels, parts);
            if used.1 < 2 {
                continue;
            }
            let g = self.gain(&op, &used.0, used.1);
            if best.as_ref().map_or(true, |(b, _, _)| g > *b + 1e-15) {
                best = Some((g, used.0, used.1));
            }
        }
        let (g, labels, parts) = best?;
        if g <= MIN_GAIN {
            return None;
        }
        let mut out = vec![Vec::new(); parts];
        for (i, &v) in group.iter().enumerate() {
            out[labels[i]].push(v);
        }
        Some(out)
    }
}

/// Drops empty parts and renumbers by first appearance.
fn compact(labels: &[usize], parts: usize) -> (Vec<usize>, usize) {
    let mut map = vec![usize::MAX; parts];
    let mut next = 0;
    let out = labels
        .iter()
        .map(|&l| {
            if map[l] == usize::MAX {
                map[l] = next;
                next += 1;
            }
            map[l]
        })
        .collect();
    (out, next)
}

fn sq(v: [f64; 2]) -> f64 {
    v[0] * v[0] + v[1] * v[1]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

/// Candidate two- and three-sector partitions of planar node vectors.
///
/// Sectors are contiguous arcs in angular order. Candidates are ranked by
/// the vector objective `sum_s |R_s|^2` (`R_s` the vector sum of sector `s`);
/// the caller rescores them exactly.
fn sector_candidates(vectors: &[[f64; 2]]) -> Vec<(Vec<usize>, usize)> {
    let n = vectors.len();
    let mut order: Vec<usize> = (0..n).collect();
    let angle = |i: usize| vectors[i][1].atan2(vectors[i][0]);
    order.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)).then(a.cmp(&b)));
    let angles: Vec<f64> = order.iter().map(|&i| angle(i)).collect();
    // prefix[t] = sum of the first t vectors in angular order
    let mut prefix = vec![[0.0, 0.0]; n + 1];
    for t in 0..n {
        let v = vectors[order[t]];
        prefix[t + 1] = [prefix[t][0] + v[0], prefix[t][1] + v[1]];
    }
    let total = prefix[n];
    // sum over the circular arc [a, b) of positions
    let arc = |a: usize, b: usize| -> [f64; 2] {
        if a <= b {
            sub(prefix[b], prefix[a])
        } else {
            let tail = sub(total, prefix[a]);
            [tail[0] + prefix[b][0], tail[1] + prefix[b][1]]
        }
    };
    let labels_for = |cuts: &[usize]| -> Vec<usize> {
        let mut labels = vec![0usize; n];
        for (s, &start) in cuts.iter().enumerate() {
            let end = cuts[(s + 1) % cuts.len()];
            let mut t = start;
            loop {
                labels[order[t]] = s;
                t = (t + 1) % n;
                if t == end {
                    break;
                }
            }
        }
        labels
    };

    let mut out = Vec::new();

    // Half-plane sweep: every maximal arc of angular width below pi.
    let mut halves: Vec<(f64, usize, usize)> = Vec::with_capacity(n);
    let mut end = 0usize;
    for start in 0..n {
        if end < start + 1 {
            end = start + 1;
        }
        while end < start + n && {
            let a = angles[end % n] + if end >= n { 2.0 * PI } else { 0.0 };
            a - angles[start] < PI
        } {
            end += 1;
        }
        let e = end % n;
        if e != start {
            let r = arc(start, e);
            let rest = sub(total, r);
            halves.push((sq(r) + sq(rest), start, e));
        }
    }
    halves.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, s, e) in halves.iter().take(4) {
        out.push((labels_for(&[s, e]), 2));
    }

    if n < 3 {
        return out;
    }
    if n <= EXHAUSTIVE_SECTORS {
        let mut best = (f64::NEG_INFINITY, [0usize; 3]);
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    let score = sq(arc(a, b)) + sq(arc(b, c)) + sq(arc(c, a));
                    if score > best.0 {
                        best = (score, [a, b, c]);
                    }
                }
            }
        }
        out.push((labels_for(&best.1), 3));
    } else {
        let seeds: Vec<f64> = halves
            .iter()
            .take(4)
            .map(|&(_, s, e)| {
                let r = arc(s, e);
                r[1].atan2(r[0])
            })
            .collect();
        for phi in seeds {
            out.push((refine_sectors(vectors, phi), 3));
        }
    }
    out
}

/// Three-direction vector partitioning: assign each vector to the sector
/// whose running sum it projects onto most strongly, until stable.
fn refine_sectors(vectors: &[[f64; 2]], phi: f64) -> Vec<usize> {
    let mut dirs: [[f64; 2]; 3] = std::array::from_fn(|s| {
        let t = phi + 2.0 * PI * s as f64 / 3.0;
        [t.cos(), t.sin()]
    });
    let mut labels = vec![usize::MAX; vectors.len()];
    for _ in 0..100 {
        let mut changed = false;
        for (i, v) in vectors.iter().enumerate() {
            let mut best = 0;
            let mut best_dot = f64::NEG_INFINITY;
            for (s, d) in dirs.iter().enumerate() {
                let p = v[0] * d[0] + v[1] * d[1];
                if p > best_dot {
                    best_dot = p;
                    best = s;
                }
            }
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = [[0.0; 2]; 3];
        for (v, &l) in vectors.iter().zip(&labels) {
            sums[l][0] += v[0];
            sums[l][1] += v[1];
        }
        for s in 0..3 {
            if sq(sums[s]) > 0.0 {
                dirs[s] = sums[s];
            }
        }
    }
    labels
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::modularity_value;
    use crate::community::test_graphs::*;

    #[test]
    fn operator_matches_dense_generalized_matrix() {
        let v = bridged_cliques();
        let net = &v.network;
        let divider = Divider::new(net);
        let group = [0, 1, 2, 3, 4, 6];
        let op = divider.operator(&group);
        let two_m = 2.0 * net.edge_count() as f64;
        let kg: f64 = group.iter().map(|&i| net.degree(i) as f64).sum();
        let x: Vec<f64> = (0..group.len()).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut y = vec![0.0; group.len()];
        op.apply(&x, &mut y);
        for (r, &i) in group.iter().enumerate() {
            let ki = net.degree(i) as f64;
            let kin = group.iter().filter(|&&j| net.has_edge(i, j)).count() as f64;
            let mut expect = 0.0;
            for (c, &j) in group.iter().enumerate() {
                let a = if net.has_edge(i, j) { 1.0 } else { 0.0 };
                let mut b = a - ki * net.degree(j) as f64 / two_m;
                if i == j {
                    b -= kin - ki * kg / two_m;
                }
                expect += b * x[c];
            }
            assert!((y[r] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn bisects_bridged_cliques() {
        let v = bridged_cliques();
        let (opt, _) = brute_force_optimum(&v);
        for mode in [SpectralMode::One, SpectralMode::Two] {
            let p = spectral_partition(&v, mode);
            assert_eq!(p.assignment(), &[0, 0, 0, 0, 1, 1, 1, 1]);
            assert!((modularity_value(&v, &p) - opt).abs() < 1e-12);
        }
    }

    #[test]
    fn complete_graph_is_indivisible() {
        let v = view(5, &clique_edges(0..5));
        assert_eq!(spectral_partition(&v, SpectralMode::One).community_count(), 1);
        assert_eq!(spectral_partition(&v, SpectralMode::Two).community_count(), 1);
    }

    #[test]
    fn three_loose_cliques_split_three_ways() {
        let mut e = clique_edges(0..5);
        e.extend(clique_edges(5..10));
        e.extend(clique_edges(10..15));
        e.extend([(4, 5), (9, 10), (14, 0)]);
        let v = view(15, &e);
        // Clique-respecting candidates: {one group, three groups, 2+1 merges}.
        let cliques = [0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2];
        let mut best = f64::NEG_INFINITY;
        let mut best_labels = Vec::new();
        for merge in [[0, 0, 0], [0, 1, 2], [0, 0, 1], [0, 1, 0], [0, 1, 1]] {
            let labels: Vec<usize> = cliques.iter().map(|&c| merge[c]).collect();
            let q = direct_q(&v, &labels);
            if q > best {
                best = q;
                best_labels = labels;
            }
        }
        assert_eq!(best_labels, cliques.to_vec());
        let p = spectral_partition(&v, SpectralMode::Two);
        assert_eq!(p.assignment(), &cliques);
        assert!((modularity_value(&v, &p) - best).abs() < 1e-12);
    }

    #[test]
    fn leading_eigenvector_of_known_operator() {
        // Path 0-1-2-3: the returned pair must satisfy B v = lambda v.
        let v = view(4, &[(0, 1), (1, 2), (2, 3)]);
        let divider = Divider::new(&v.network);
        let op = divider.operator(&[0, 1, 2, 3]);
        let (lambda, x) = op.leading_eigenpair(&[]);
        let mut y = vec![0.0; 4];
        op.apply(&x, &mut y);
        for i in 0..4 {
            assert!((y[i] - lambda * x[i]).abs() < 1e-4, "{y:?} vs {lambda} {x:?}");
        }
        assert!(lambda > 0.0);
        assert!(x[0] * x[3] < 0.0);
    }
}
