//! Dyad-level models: nodematch logistic regression and the triangle ERGM
//! fitted by maximum pseudo-likelihood.
//!
//! All covariates are small integers, so the `n (n - 1) / 2` dyads are
//! streamed once and collapsed into counts per distinct covariate vector.
//! The binomial likelihood over those patterns equals the per-dyad
//! Bernoulli likelihood exactly.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Attribute, Network, NetworkView, ViewKind, MISSING};

/// Model terms, in coefficient order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Covariate {
    Edges,
    Year,
    Residence,
    HighSchool,
    Major,
    Triangle,
}

impl Covariate {
    pub const MATCHES: [Covariate; 4] = [
        Covariate::Year,
        Covariate::Residence,
        Covariate::HighSchool,
        Covariate::Major,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Covariate::Edges => "edges",
            Covariate::Year => "year",
            Covariate::Residence => "residence",
            Covariate::HighSchool => "high_school",
            Covariate::Major => "major",
            Covariate::Triangle => "triangle",
        }
    }

    fn attribute(self) -> Option<Attribute> {
        match self {
            Covariate::Year => Some(Attribute::Year),
            Covariate::Residence => Some(Attribute::Residence),
            Covariate::HighSchool => Some(Attribute::HighSchool),
            Covariate::Major => Some(Attribute::Major),
            _ => None,
        }
    }
}

impl fmt::Display for Covariate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Nodematch: equal and both known. Missing never matches.
pub fn node_match(net: &Network, a: usize, b: usize, attribute: Attribute) -> bool {
    let (x, y) = (net.attribute(a, attribute), net.attribute(b, attribute));
    x != MISSING && x == y
}

/// One unordered node pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dyad {
    pub i: usize,
    pub j: usize,
    pub tie: bool,
    /// Year, Residence, High school, Major.
    pub matches: [bool; 4],
    /// Common neighbors: the change in triangle count from toggling the tie.
    pub triangle_change: Option<u32>,
}

/// Streams every dyad `i < j` of a view.
pub fn dyads(view: &NetworkView, with_triangle: bool) -> impl Iterator<Item = Dyad> + '_ {
    let net = &view.network;
    let n = net.node_count();
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| dyad(net, i, j, with_triangle)))
}

fn dyad(net: &Network, i: usize, j: usize, with_triangle: bool) -> Dyad {
    Dyad {
        i,
        j,
        tie: net.has_edge(i, j),
        matches: Covariate::MATCHES.map(|c| node_match(net, i, j, c.attribute().expect("match term"))),
        triangle_change: with_triangle.then(|| net.common_neighbors(i, j) as u32),
    }
}

/// Dyads sharing a covariate vector.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DyadPattern {
    pub x: Vec<f64>,
    pub trials: u64,
    pub ties: u64,
}

/// Collapsed design matrix for the dyad models.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DyadDesign {
    pub covariates: Vec<Covariate>,
    pub patterns: Vec<DyadPattern>,
    pub dyad_count: u64,
    pub tie_count: u64,
}

impl DyadDesign {
    pub fn has_triangle(&self) -> bool {
        self.covariates.contains(&Covariate::Triangle)
    }

    /// Design restricted to the listed covariates (others removed).
    pub fn select(&self, keep: &[Covariate]) -> DyadDesign {
        let idx: Vec<usize> = keep
            .iter()
            .filter_map(|c| self.covariates.iter().position(|d| d == c))
            .collect();
        let mut merged: BTreeMap<Vec<u64>, (u64, u64)> = BTreeMap::new();
        for p in &self.patterns {
            let key: Vec<u64> = idx.iter().map(|&i| p.x[i].to_bits()).collect();
            let e = merged.entry(key).or_default();
            e.0 += p.trials;
            e.1 += p.ties;
        }
        DyadDesign {
            covariates: idx.iter().map(|&i| self.covariates[i]).collect(),
            patterns: merged
                .into_iter()
                .map(|(k, (trials, ties))| DyadPattern {
                    x: k.into_iter().map(f64::from_bits).collect(),
                    trials,
                    ties,
                })
                .collect(),
            dyad_count: self.dyad_count,
            tie_count: self.tie_count,
        }
    }
}

/// Fixed shard count keeps the reduction order independent of thread count.
const SHARDS: usize = 64;

/// Builds the collapsed design in one streaming pass over all dyads.
pub fn build_design(view: &NetworkView, with_triangle: bool) -> Result<DyadDesign> {
    let net = &view.network;
    let n = net.node_count();
    if n < 2 {
        return Err(Error::Domain(format!("dyad models need at least 2 nodes, got {n}")));
    }
    type Counts = BTreeMap<(u8, u32), (u64, u64)>;
    let shard = |s: usize| -> Counts {
        let mut counts = Counts::new();
        for i in (s..n).step_by(SHARDS) {
            for j in i + 1..n {
                let d = dyad(net, i, j, with_triangle);
                let bits = d.matches.iter().enumerate().fold(0u8, |acc, (k, &b)| acc | (u8::from(b) << k));
                let e = counts.entry((bits, d.triangle_change.unwrap_or(0))).or_default();
                e.0 += 1;
                e.1 += u64::from(d.tie);
            }
        }
        counts
    };
    let shards: Vec<Counts> = (0..SHARDS).into_par_iter().map(shard).collect();
    let mut counts = Counts::new();
    for part in shards {
        for (k, (t, y)) in part {
            let e = counts.entry(k).or_default();
            e.0 += t;
            e.1 += y;
        }
    }
    let mut covariates = vec![Covariate::Edges];
    covariates.extend(Covariate::MATCHES);
    if with_triangle {
        covariates.push(Covariate::Triangle);
    }
    let patterns = counts
        .into_iter()
        .map(|((bits, tri), (trials, ties))| {
            let mut x = vec![1.0];
            x.extend((0..4).map(|k| f64::from((bits >> k) & 1)));
            if with_triangle {
                x.push(f64::from(tri));
            }
            DyadPattern { x, trials, ties }
        })
        .collect();
    Ok(DyadDesign {
        covariates,
        patterns,
        dyad_count: (n as u64) * (n as u64 - 1) / 2,
        tie_count: net.edge_count() as u64,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    /// Maximum likelihood under dyad independence.
    Mle,
    /// Maximum pseudo-likelihood on change statistics.
    Mple,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadModelFit {
    pub estimator: Estimator,
    pub coefficients: Vec<Coefficient>,
    /// Terms removed as non-identifiable when dropping was requested.
    pub dropped: Vec<String>,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
    pub dyads: u64,
}

impl DyadModelFit {
    pub fn estimate(&self, covariate: Covariate) -> Option<f64> {
        self.coefficient(covariate).map(|c| c.estimate)
    }

    pub fn coefficient(&self, covariate: Covariate) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == covariate.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Drop constant or collinear covariates instead of failing.
    pub drop_degenerate: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 200,
            drop_degenerate: false,
        }
    }
}

const SCORE_TOL: f64 = 1e-8;
const LOGLIK_TOL: f64 = 1e-10;
/// Coefficients this large only arise from a likelihood without a maximum.
const DIVERGED: f64 = 40.0;

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Log-likelihood of the binomial pattern model.
pub fn log_likelihood(design: &DyadDesign, theta: &[f64]) -> f64 {
    design
        .patterns
        .iter()
        .map(|p| {
            let eta: f64 = p.x.iter().zip(theta).map(|(x, t)| x * t).sum();
            let misses = (p.trials - p.ties) as f64;
            -(p.ties as f64) * softplus(-eta) - misses * softplus(eta)
        })
        .sum()
}

/// Gradient of [`log_likelihood`].
pub fn score(design: &DyadDesign, theta: &[f64]) -> Vec<f64> {
    let k = theta.len();
    let mut g = vec![0.0; k];
    for p in &design.patterns {
        let eta: f64 = p.x.iter().zip(theta).map(|(x, t)| x * t).sum();
        let r = p.ties as f64 - p.trials as f64 * sigmoid(eta);
        for a in 0..k {
            g[a] += r * p.x[a];
        }
    }
    g
}

/// Observed (= expected) information matrix.
fn information(design: &DyadDesign, theta: &[f64]) -> Vec<Vec<f64>> {
    let k = theta.len();
    let mut h = vec![vec![0.0; k]; k];
    for p in &design.patterns {
        let eta: f64 = p.x.iter().zip(theta).map(|(x, t)| x * t).sum();
        let s = sigmoid(eta);
        let w = p.trials as f64 * s * (1.0 - s);
        for a in 0..k {
            for b in 0..=a {
                h[a][b] += w * p.x[a] * p.x[b];
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            h[b][a] = h[a][b];
        }
    }
    h
}

/// Cholesky factor; `Err(j)` names the first column with a vanishing pivot.
fn cholesky(a: &[Vec<f64>]) -> std::result::Result<Vec<Vec<f64>>, usize> {
    let k = a.len();
    let mut l = vec![vec![0.0; k]; k];
    for j in 0..k {
        let mut d = a[j][j];
        for p in 0..j {
            d -= l[j][p] * l[j][p];
        }
        if !(d > 1e-10 * a[j][j].abs().max(1e-300)) {
            return Err(j);
        }
        l[j][j] = d.sqrt();
        for i in j + 1..k {
            let mut s = a[i][j];
            for p in 0..j {
                s -= l[i][p] * l[j][p];
            }
            l[i][j] = s / l[j][j];
        }
    }
    Ok(l)
}

fn cholesky_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let k = b.len();
    let mut y = vec![0.0; k];
    for i in 0..k {
        let s: f64 = (0..i).map(|p| l[i][p] * y[p]).sum();
        y[i] = (b[i] - s) / l[i][i];
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|p| l[p][i] * x[p]).sum();
        x[i] = (y[i] - s) / l[i][i];
    }
    x
}

/// Constant and collinear covariates, in column order.
fn degenerate_columns(design: &DyadDesign) -> Vec<usize> {
    let k = design.covariates.len();
    let mut bad = Vec::new();
    let mut keep: Vec<usize> = Vec::new();
    for j in 0..k {
        let mut cols = keep.clone();
        cols.push(j);
        let gram: Vec<Vec<f64>> = cols
            .iter()
            .map(|&a| {
                cols.iter()
                    .map(|&b| design.patterns.iter().map(|p| p.trials as f64 * p.x[a] * p.x[b]).sum())
                    .collect()
            })
            .collect();
        // A column that is constant is collinear with the intercept.
        if cholesky(&gram).is_ok() {
            keep.push(j);
        } else {
            bad.push(j);
        }
    }
    bad
}

/// Quasi-complete separation of an indicator covariate.
fn separated_indicator(design: &DyadDesign, j: usize) -> bool {
    let binary = design.patterns.iter().all(|p| p.x[j] == 0.0 || p.x[j] == 1.0);
    if !binary {
        return false;
    }
    let (trials, ties) = design
        .patterns
        .iter()
        .filter(|p| p.x[j] == 1.0)
        .fold((0, 0), |(t, y), p| (t + p.trials, y + p.ties));
    trials > 0 && (ties == 0 || ties == trials)
}

/// Newton-Raphson maximum likelihood with step halving.
pub fn fit_logistic_with(design: &DyadDesign, options: &FitOptions) -> Result<DyadModelFit> {
    fit(design, options, Estimator::Mle)
}

pub fn fit_logistic(design: &DyadDesign) -> Result<DyadModelFit> {
    fit(design, &FitOptions::default(), Estimator::Mle)
}

/// Pseudo-likelihood fit of the model with the triangle term.
pub fn fit_ergm_mple_with(design: &DyadDesign, options: &FitOptions) -> Result<DyadModelFit> {
    if !design.has_triangle() {
        return Err(Error::Domain("ERGM fit needs a design built with the triangle term".into()));
    }
    fit(design, options, Estimator::Mple)
}

pub fn fit_ergm_mple(design: &DyadDesign) -> Result<DyadModelFit> {
    fit_ergm_mple_with(design, &FitOptions::default())
}

fn fit(design: &DyadDesign, options: &FitOptions, estimator: Estimator) -> Result<DyadModelFit> {
    if design.tie_count == 0 || design.tie_count == design.dyad_count {
        return Err(Error::Separation(Covariate::Edges.name().into()));
    }
    let bad = degenerate_columns(design);
    let mut dropped = Vec::new();
    let design = if bad.is_empty() {
        design.clone()
    } else if options.drop_degenerate && !bad.contains(&0) {
        let keep: Vec<Covariate> = (0..design.covariates.len())
            .filter(|j| !bad.contains(j))
            .map(|j| design.covariates[j])
            .collect();
        dropped = bad.iter().map(|&j| design.covariates[j].name().to_string()).collect();
        design.select(&keep)
    } else {
        return Err(Error::NotIdentifiable(design.covariates[bad[0]].name().into()));
    };
    for j in 1..design.covariates.len() {
        if separated_indicator(&design, j) {
            return Err(Error::Separation(design.covariates[j].name().into()));
        }
    }

    let k = design.covariates.len();
    let mut theta = vec![0.0; k];
    let density = design.tie_count as f64 / design.dyad_count as f64;
    theta[0] = (density / (1.0 - density)).ln();
    let mut ll = log_likelihood(&design, &theta);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < options.max_iterations {
        let g = score(&design, &theta);
        if g.iter().all(|v| v.abs() < SCORE_TOL) {
            converged = true;
            break;
        }
        iterations += 1;
        let h = information(&design, &theta);
        let l = cholesky(&h).map_err(|j| Error::NotIdentifiable(design.covariates[j].name().into()))?;
        let step = cholesky_solve(&l, &g);
        let mut t = 1.0;
        let mut next;
        let mut next_ll;
        loop {
            next = theta.iter().zip(&step).map(|(a, s)| a + t * s).collect::<Vec<_>>();
            next_ll = log_likelihood(&design, &next);
            if next_ll >= ll || t < 1e-10 {
                break;
            }
            t *= 0.5;
        }
        if next_ll < ll {
            // no ascent direction left at machine precision
            converged = g.iter().all(|v| v.abs() < 1e-4 * design.dyad_count as f64);
            break;
        }
        debug_assert!(next_ll >= ll);
        let change = (next_ll - ll).abs() / ll.abs().max(1.0);
        theta = next;
        ll = next_ll;
        if let Some(j) = (1..k).find(|&j| theta[j].abs() > DIVERGED) {
            return Err(Error::Separation(design.covariates[j].name().into()));
        }
        if change < LOGLIK_TOL {
            converged = true;
            break;
        }
    }
    let h = information(&design, &theta);
    let l = cholesky(&h).map_err(|j| Error::NotIdentifiable(design.covariates[j].name().into()))?;
    let coefficients = (0..k)
        .map(|j| {
            let mut e = vec![0.0; k];
            e[j] = 1.0;
            let col = cholesky_solve(&l, &e);
            Coefficient {
                name: design.covariates[j].name().into(),
                estimate: theta[j],
                std_error: col[j].sqrt(),
            }
        })
        .collect();
    Ok(DyadModelFit {
        estimator,
        coefficients,
        dropped,
        log_likelihood: ll,
        converged,
        iterations,
        dyads: design.dyad_count,
    })
}

/// A fit labeled with its institution and view.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledFit {
    pub institution: String,
    pub view: ViewKind,
    pub fit: DyadModelFit,
}

/// Box-plot statistics of one coefficient over institutions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxStats {
    pub view: ViewKind,
    /// Coefficient name; the density term is reported negated as `-edges`.
    pub coefficient: String,
    pub count: usize,
    pub median: f64,
    pub lower_hinge: f64,
    pub upper_hinge: f64,
    pub lower_whisker: f64,
    pub upper_whisker: f64,
    pub outliers: Vec<(String, f64)>,
}

/// Tukey five-number summary (min, lower hinge, median, upper hinge, max)
/// of sorted data.
pub fn five_numbers(sorted: &[f64]) -> [f64; 5] {
    let n = sorted.len();
    assert!(n > 0);
    let n4 = ((n + 3) / 2) as f64 / 2.0;
    let at = |pos: f64| {
        // 1-based, averaging the two neighbors of half-integer positions
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        0.5 * (sorted[lo - 1] + sorted[hi - 1])
    };
    [
        sorted[0],
        at(n4),
        at((n as f64 + 1.0) / 2.0),
        at(n as f64 + 1.0 - n4),
        sorted[n - 1],
    ]
}

/// Per view and coefficient: median, hinges, 1.5 IQR whiskers and outliers.
pub fn coefficient_summary(fits: &[LabeledFit]) -> Result<Vec<BoxStats>> {
    if fits.len() < 2 {
        return Err(Error::Arity {
            expected: 2,
            got: fits.len(),
        });
    }
    let mut groups: BTreeMap<(ViewKind, Covariate), Vec<(String, f64)>> = BTreeMap::new();
    for f in fits {
        for c in &f.fit.coefficients {
            let Some(cov) = [
                Covariate::Edges,
                Covariate::Year,
                Covariate::Residence,
                Covariate::HighSchool,
                Covariate::Major,
                Covariate::Triangle,
            ]
            .into_iter()
            .find(|k| k.name() == c.name) else {
                continue;
            };
            let value = if cov == Covariate::Edges { -c.estimate } else { c.estimate };
            groups.entry((f.view, cov)).or_default().push((f.institution.clone(), value));
        }
    }
    let mut out = Vec::new();
    for ((view, cov), mut values) in groups {
        values.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        let sorted: Vec<f64> = values.iter().map(|v| v.1).collect();
        let [_, lower, median, upper, _] = five_numbers(&sorted);
        let reach = 1.5 * (upper - lower);
        let (lo_fence, hi_fence) = (lower - reach, upper + reach);
        let inside: Vec<f64> = sorted.iter().copied().filter(|v| *v >= lo_fence && *v <= hi_fence).collect();
        out.push(BoxStats {
            view,
            coefficient: if cov == Covariate::Edges { "-edges".into() } else { cov.name().into() },
            count: sorted.len(),
            median,
            lower_hinge: lower,
            upper_hinge: upper,
            lower_whisker: inside.first().copied().unwrap_or(lower),
            upper_whisker: inside.last().copied().unwrap_or(upper),
            outliers: values.into_iter().filter(|v| v.1 < lo_fence || v.1 > hi_fence).collect(),
        });
    }
    Ok(out)
}
