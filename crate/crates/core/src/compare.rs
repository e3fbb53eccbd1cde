//! Rand coefficient and its permutation z-score between two partitions.
//!
//! Pair counts and the cubic marginal sums are exact integers, and the
//! variance of `w` is evaluated as an exact rational before the single
//! conversion to floating point. At ~4e4 nodes the terms of the variance
//! exceed 1e37 and cancel almost completely.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::assortativity::MissingPolicy;
use crate::community::{Method, Partition, Provenance};
use crate::error::{Error, Result};
use crate::graph::{Attribute, NetworkView, MISSING};

/// Cross-classification of two partitions with its pair statistics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContingencyTable {
    /// Nonzero cells `n_ij`.
    pub cells: BTreeMap<(usize, usize), u64>,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub n: u64,
    /// All pairs, `n (n - 1) / 2`.
    pub pairs: u128,
    /// Pairs together in the first partition.
    pub same_first: u128,
    /// Pairs together in the second partition.
    pub same_second: u128,
    /// Pairs together in both.
    pub same_both: u128,
}

fn choose2(x: u64) -> u128 {
    let x = x as u128;
    x * x.saturating_sub(1) / 2
}

/// Builds the contingency table of two partitions over the same nodes.
pub fn contingency(first: &Partition, second: &Partition) -> Result<ContingencyTable> {
    if first.len() != second.len() {
        return Err(Error::Domain(format!(
            "partitions cover {} and {} nodes",
            first.len(),
            second.len()
        )));
    }
    let mut cells: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut row_sums = vec![0u64; first.community_count()];
    let mut col_sums = vec![0u64; second.community_count()];
    for (&a, &b) in first.assignment().iter().zip(second.assignment()) {
        *cells.entry((a, b)).or_default() += 1;
        row_sums[a] += 1;
        col_sums[b] += 1;
    }
    let n = first.len() as u64;
    Ok(ContingencyTable {
        pairs: choose2(n),
        same_first: row_sums.iter().map(|&x| choose2(x)).sum(),
        same_second: col_sums.iter().map(|&x| choose2(x)).sum(),
        same_both: cells.values().map(|&x| choose2(x)).sum(),
        cells,
        row_sums,
        col_sums,
        n,
    })
}

/// Fraction of pairs on which the partitions agree.
pub fn rand_coefficient(ct: &ContingencyTable) -> Result<f64> {
    if ct.n < 2 {
        return Err(Error::Domain("Rand coefficient needs at least two nodes".into()));
    }
    let agree = 2 * ct.same_both + ct.pairs - ct.same_first - ct.same_second;
    Ok(agree as f64 / ct.pairs as f64)
}

fn big(x: impl Into<BigInt>) -> BigInt {
    x.into()
}

fn ratio(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

fn cubic_coefficient(n: &BigInt, same: u128, sums: &[u64]) -> BigInt {
    let cubes: BigInt = sums.iter().map(|&x| big(x).pow(3)).sum();
    n * (n * n - big(3) * n - big(2)) - big(8) * (n + big(1)) * big(same) + big(4) * cubes
}

/// Exact permutation variance of `w` for fixed marginals.
pub fn w_variance(ct: &ContingencyTable) -> Result<BigRational> {
    if ct.n < 4 {
        return Err(Error::Domain(format!("z-score needs at least 4 nodes, got {}", ct.n)));
    }
    let n = big(ct.n);
    let m = big(ct.pairs);
    let a = big(4) * big(ct.same_first) - big(2) * &m;
    let b = big(4) * big(ct.same_second) - big(2) * &m;
    let c1 = cubic_coefficient(&n, ct.same_first, &ct.row_sums);
    let c2 = cubic_coefficient(&n, ct.same_second, &ct.col_sums);
    let n3 = &n * (&n - big(1)) * (&n - big(2));
    let n4 = &n3 * (&n - big(3));
    let a2 = &a * &a;
    let b2 = &b * &b;

    let t1 = ratio(m.clone(), big(16));
    let t2 = ratio(&a2 * &b2, big(256) * &m * &m);
    let t3 = ratio(&c1 * &c2, big(16) * &n3);
    let t4 = ratio(
        (&a2 - big(4) * &c1 - big(4) * &m) * (&b2 - big(4) * &c2 - big(4) * &m),
        big(64) * n4,
    );
    Ok(t1 - t2 + t3 + t4)
}

fn to_f64(r: &BigRational) -> f64 {
    // Scale down huge numerators and denominators together so both fit in f64.
    let (num, den) = (r.numer(), r.denom());
    let shift = num.bits().max(den.bits()).saturating_sub(1000);
    let (num, den) = (num >> shift, den >> shift);
    num.to_f64().unwrap_or(f64::NAN) / den.to_f64().unwrap_or(f64::NAN)
}

/// Expected `w` under random relabeling, `M1 M2 / M`.
pub fn expected_w(ct: &ContingencyTable) -> f64 {
    to_f64(&ratio(big(ct.same_first) * big(ct.same_second), big(ct.pairs)))
}

/// `z = (w - M1 M2 / M) / sigma_w`.
pub fn rand_zscore(ct: &ContingencyTable) -> Result<f64> {
    let variance = w_variance(ct)?;
    if !variance.is_positive() {
        return Err(Error::DegenerateVariance(to_f64(&variance)));
    }
    let m = big(ct.pairs);
    let excess = ratio(big(ct.same_both) * &m - big(ct.same_first) * big(ct.same_second), m);
    if excess.is_zero() {
        return Ok(0.0);
    }
    Ok(to_f64(&excess) / to_f64(&variance).sqrt())
}

/// One community per distinct code; Missing forms its own group.
pub fn attribute_partition(view: &NetworkView, attribute: Attribute) -> Partition {
    let codes: Vec<u32> = (0..view.node_count())
        .map(|v| view.network.attribute(v, attribute))
        .collect();
    Partition::from_assignment(&codes, Provenance::Attribute(attribute))
}

/// Restriction of `partition` to `nodes`.
fn restrict(partition: &Partition, nodes: &[usize]) -> Partition {
    let labels: Vec<usize> = nodes.iter().map(|&v| partition.community(v)).collect();
    Partition::from_assignment(&labels, partition.provenance)
}

/// `S` and `z` of one (partition, attribute) pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub method: Option<Method>,
    pub attribute: Attribute,
    pub nodes: usize,
    pub rand: Option<f64>,
    pub z: Option<f64>,
    /// Why `z` (or `rand`) is absent.
    pub note: Option<String>,
}

pub fn compare_with_attribute(
    view: &NetworkView,
    partition: &Partition,
    attribute: Attribute,
    policy: MissingPolicy,
) -> Comparison {
    let attr = attribute_partition(view, attribute);
    let (first, second) = match policy {
        MissingPolicy::Include => (partition.clone(), attr),
        MissingPolicy::Exclude => {
            let keep: Vec<usize> = (0..view.node_count())
                .filter(|&v| view.network.attribute(v, attribute) != MISSING)
                .collect();
            (restrict(partition, &keep), restrict(&attr, &keep))
        }
    };
    let mut out = Comparison {
        method: partition.method(),
        attribute,
        nodes: first.len(),
        rand: None,
        z: None,
        note: None,
    };
    match contingency(&first, &second) {
        Ok(ct) => {
            out.rand = rand_coefficient(&ct).ok();
            match rand_zscore(&ct) {
                Ok(z) => out.z = Some(z),
                Err(e) => out.note = Some(e.to_string()),
            }
        }
        Err(e) => out.note = Some(e.to_string()),
    }
    out
}

/// The four community-attribute z-scores of one partition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZScoreQuad {
    pub method: Option<Method>,
    /// Major, Residence, Year, High school; `None` where degenerate.
    pub z: [Option<f64>; 4],
}

impl ZScoreQuad {
    pub fn get(&self, attribute: Attribute) -> Option<f64> {
        Attribute::COMMUNITY
            .iter()
            .position(|&a| a == attribute)
            .and_then(|i| self.z[i])
    }
}

/// Largest z-score over methods for one attribute.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttributeMax {
    pub attribute: Attribute,
    pub max_z: Option<f64>,
    pub method: Option<Method>,
    /// `max_z >= 2`.
    pub significant: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttributeScores {
    pub missing: MissingPolicy,
    pub comparisons: Vec<Comparison>,
    pub quads: Vec<ZScoreQuad>,
    pub maxima: Vec<AttributeMax>,
    /// Some attribute reaches `z >= 5`.
    pub strong: bool,
}

/// Threshold for a strongly significant organizing attribute.
pub const STRONG_Z: f64 = 5.0;
/// Threshold for a significant attribute.
pub const SIGNIFICANT_Z: f64 = 2.0;

/// Scores every partition against Major, Residence, Year and High school.
pub fn score_against_attributes(
    view: &NetworkView,
    partitions: &[Partition],
    policy: MissingPolicy,
) -> AttributeScores {
    let mut comparisons = Vec::new();
    let mut quads = Vec::new();
    for p in partitions {
        let row: Vec<Comparison> = Attribute::COMMUNITY
            .iter()
            .map(|&a| compare_with_attribute(view, p, a, policy))
            .collect();
        quads.push(ZScoreQuad {
            method: p.method(),
            z: std::array::from_fn(|i| row[i].z),
        });
        comparisons.extend(row);
    }
    let maxima: Vec<AttributeMax> = Attribute::COMMUNITY
        .iter()
        .enumerate()
        .map(|(i, &attribute)| {
            let mut best: Option<(f64, Option<Method>)> = None;
            for q in &quads {
                if let Some(z) = q.z[i] {
                    if best.map_or(true, |(b, _)| z > b) {
                        best = Some((z, q.method));
                    }
                }
            }
            AttributeMax {
                attribute,
                max_z: best.map(|b| b.0),
                method: best.and_then(|b| b.1),
                significant: best.is_some_and(|b| b.0 >= SIGNIFICANT_Z),
            }
        })
        .collect();
    let strong = maxima.iter().any(|m| m.max_z.is_some_and(|z| z >= STRONG_Z));
    AttributeScores {
        missing: policy,
        comparisons,
        quads,
        maxima,
        strong,
    }
}
