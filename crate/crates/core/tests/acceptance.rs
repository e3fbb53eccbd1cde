//! Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//!
//! Run with `cargo test -p campusnet-core --test acceptance`. Criteria that
//! need the public Caltech network look for `Caltech36.nodes.tsv` and
//! `Caltech36.edges.tsv` in the directory named by `CAMPUSNET_FB100_DIR`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use campusnet::community::{detect_all, kl_refine, modularity_value, Partition, Provenance};
use campusnet::compare::{contingency, rand_zscore};
use campusnet::dyad::{build_design, fit_ergm_mple, fit_logistic, Covariate};
use campusnet::graph::{extract_views, Attribute, Network, NetworkView, ViewKind};
use campusnet::pipeline::{batch, Config};
use campusnet::synthetic::{self, Categories};
use campusnet::tetra::{barycentric, size_bin, summarize_runs, tetra_point, TetraPoint, VERTICES};
use campusnet::{assortativity, io, mixing_matrix, score_against_attributes, MissingPolicy};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

// Tolerances and limits.
const Z_TOL: f64 = 0.1;
const Z_PAIRS: usize = 20;
const Z_SAMPLES: usize = 100_000;
const Z_SECONDS: f64 = 30.0;
const Q_GRAPHS: usize = 50;
const Q_TOL: f64 = 0.05;
const KL_SLACK: f64 = 1e-12;
const GOLDEN_SE_MULTIPLE: f64 = 2.0;
const GOLDEN_SECONDS: f64 = 60.0;
const RECOVERY_REPLICATES: usize = 100;
const RECOVERY_NODES: usize = 300;
const RECOVERY_SE_MULTIPLE: f64 = 3.0;
const RECOVERY_COVERAGE: f64 = 0.95;
const STRONG_Z: f64 = 5.0;
const GEOMETRY_TOL: f64 = 1e-10;
const SHUFFLES: usize = 200;
const SHUFFLE_MEAN_ABS_R: f64 = 0.05;
const ASSORT_SECONDS: f64 = 5.0;

/// Caltech (36) Full view, logistic model: estimate and standard error for
/// edges, year, residence, high school, major.
const CALTECH_THETA: [(f64, f64); 5] = [
    (-3.6903, 0.012891),
    (1.5382, 0.018233),
    (2.4151, 0.018644),
    (2.3789, 0.14869),
    (0.53388, 0.02881),
];
const COEFFICIENTS: [Covariate; 5] = [
    Covariate::Edges,
    Covariate::Year,
    Covariate::Residence,
    Covariate::HighSchool,
    Covariate::Major,
];

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn caltech() -> Option<(PathBuf, PathBuf)> {
    let dir = PathBuf::from(std::env::var_os("CAMPUSNET_FB100_DIR")?);
    let nodes = dir.join("Caltech36.nodes.tsv");
    let edges = dir.join("Caltech36.edges.tsv");
    (nodes.is_file() && edges.is_file()).then_some((nodes, edges))
}

fn caltech_full() -> Option<NetworkView> {
    let (nodes, edges) = caltech()?;
    let (net, codes) = io::load_network_with_codes(&nodes, &edges).expect("Caltech files must parse");
    Some(extract_views(&net, codes).full)
}

fn w_of(a: &[usize], b: &[usize], kb: usize, cells: &mut [u64]) -> u64 {
    cells.iter_mut().for_each(|c| *c = 0);
    for (x, y) in a.iter().zip(b) {
        cells[x * kb + y] += 1;
    }
    cells.iter().map(|&c| c * c.saturating_sub(1) / 2).sum()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let deltas: Vec<(usize, f64, f64)> = (0..Z_PAIRS)
        .into_par_iter()
        .map(|pair| {
            let mut rng = synthetic::rng(1000 + pair as u64);
            let n = rng.random_range(20..=200);
            let ka = rng.random_range(2..=12);
            let kb = rng.random_range(2..=12);
            let a: Vec<usize> = (0..n).map(|_| rng.random_range(0..ka)).collect();
            // Partly aligned with `a` so that z covers more than noise.
            let align: f64 = rng.random_range(0.0..0.25);
            let b: Vec<usize> = a
                .iter()
                .map(|&x| if rng.random::<f64>() < align { x % kb } else { rng.random_range(0..kb) })
                .collect();
            let pa = Partition::from_assignment(&a, Provenance::External);
            let pb = Partition::from_assignment(&b, Provenance::External);
            let z = rand_zscore(&contingency(&pa, &pb).unwrap()).unwrap();
            let (a, b) = (pa.assignment().to_vec(), pb.assignment().to_vec());
            let kb = pb.community_count();
            let mut cells = vec![0u64; pa.community_count() * kb];
            let w = w_of(&a, &b, kb, &mut cells) as f64;
            let mut perm = b.clone();
            let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
            for _ in 0..Z_SAMPLES {
                perm.shuffle(&mut rng);
                let x = w_of(&a, &perm, kb, &mut cells) as f64;
                sum += x;
                sum_sq += x * x;
            }
            let mean = sum / Z_SAMPLES as f64;
            let sd = (sum_sq / Z_SAMPLES as f64 - mean * mean).sqrt();
            (n, z, (w - mean) / sd)
        })
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let worst = deltas.iter().map(|(_, z, mc)| (z - mc).abs()).fold(0.0, f64::max);
    let z_range = deltas.iter().map(|d| d.1).fold((f64::MAX, f64::MIN), |(lo, hi), z| (lo.min(z), hi.max(z)));
    verdict(
        worst <= Z_TOL && secs < Z_SECONDS,
        format!(
            "{Z_PAIRS} pairs, z in [{:.2}, {:.2}], max |z - z_mc| = {worst:.4} (tol {Z_TOL}), {secs:.1} s (limit {Z_SECONDS} s)",
            z_range.0, z_range.1
        ),
    )
}

/// Maximum modularity over all set partitions (restricted growth strings).
fn brute_force_q(view: &NetworkView) -> f64 {
    let n = view.node_count();
    let mut labels = vec![0usize; n];
    let mut maxes = vec![0usize; n];
    let mut best = f64::NEG_INFINITY;
    loop {
        let p = Partition::from_assignment(&labels, Provenance::External);
        best = best.max(modularity_value(view, &p));
        // next restricted growth string
        let mut i = n - 1;
        loop {
            if i == 0 {
                return best;
            }
            if labels[i] <= maxes[i - 1] {
                labels[i] += 1;
                let m = maxes[i - 1].max(labels[i]);
                maxes[i] = m;
                for j in i + 1..n {
                    labels[j] = 0;
                    maxes[j] = m;
                }
                break;
            }
            i -= 1;
        }
    }
}

fn criterion_2() -> Outcome {
    let results: Vec<(f64, f64, f64)> = (0..Q_GRAPHS)
        .into_par_iter()
        .map(|g| {
            let mut rng = synthetic::rng(2000 + g as u64);
            let n = rng.random_range(5..=10);
            let p = rng.random_range(0.25..0.6);
            let mut net = synthetic::gnp(n, p, &mut rng);
            while net.edge_count() == 0 {
                net = synthetic::gnp(n, p, &mut rng);
            }
            let view = NetworkView::whole(ViewKind::Full, net);
            let opt = brute_force_q(&view);
            let parts = detect_all(&view, 42);
            let best = parts.iter().map(|p| modularity_value(&view, p)).fold(f64::NEG_INFINITY, f64::max);
            // refinement of every raw partition and of random starts
            let mut worst_kl = f64::INFINITY;
            let mut starts: Vec<Partition> = parts.iter().step_by(2).cloned().collect();
            for _ in 0..5 {
                let k = rng.random_range(1..=n);
                let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
                starts.push(Partition::from_assignment(&labels, Provenance::External));
            }
            for s in &starts {
                let before = modularity_value(&view, s);
                let after = modularity_value(&view, &kl_refine(&view, s));
                worst_kl = worst_kl.min(after - before);
            }
            (opt, best, worst_kl)
        })
        .collect();
    let worst_gap = results.iter().map(|(o, b, _)| o - b).fold(0.0, f64::max);
    let worst_kl = results.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    verdict(
        worst_gap <= Q_TOL && worst_kl >= -KL_SLACK,
        format!(
            "{Q_GRAPHS} graphs (n <= 10): max Q_opt - Q_best = {worst_gap:.4} (tol {Q_TOL}); min KL change = {worst_kl:.2e} over {} calls",
            results.len() * 8
        ),
    )
}

fn criterion_3() -> Outcome {
    if let Some(full) = caltech_full() {
        let start = Instant::now();
        let fit = match build_design(&full, false).and_then(|d| fit_logistic(&d)) {
            Ok(f) => f,
            Err(e) => return Outcome::Fail(format!("Caltech fit failed: {e}")),
        };
        let secs = start.elapsed().as_secs_f64();
        let mut worst: f64 = 0.0;
        let mut parts = Vec::new();
        for (c, (want, se)) in COEFFICIENTS.iter().zip(CALTECH_THETA) {
            let got = fit.estimate(*c).unwrap_or(f64::NAN);
            let k = (got - want).abs() / se;
            worst = worst.max(if k.is_nan() { f64::INFINITY } else { k });
            parts.push(format!("{c}={got:.4}"));
        }
        return verdict(
            worst <= GOLDEN_SE_MULTIPLE && secs < GOLDEN_SECONDS,
            format!(
                "Caltech Full: {} ; worst deviation {worst:.2} SE (tol {GOLDEN_SE_MULTIPLE}), {secs:.1} s (limit {GOLDEN_SECONDS} s)",
                parts.join(" ")
            ),
        );
    }
    // Synthetic recovery: known coefficients, nominal coverage of 3-SE intervals.
    let theta = CALTECH_THETA.map(|t| t.0);
    let categories = Categories {
        status: 2,
        gender: 2,
        major: 30,
        residence: 9,
        year: 6,
        high_school: 150,
        missing: 0.05,
    };
    let covered: Vec<Option<bool>> = (0..RECOVERY_REPLICATES)
        .into_par_iter()
        .map(|r| {
            let mut rng = synthetic::rng(3000 + r as u64);
            let attrs = synthetic::random_attributes(RECOVERY_NODES, &categories, &mut rng);
            let net = synthetic::dyad_model(attrs, theta, &mut rng).ok()?;
            let view = NetworkView::whole(ViewKind::Full, net);
            let fit = fit_logistic(&build_design(&view, false).ok()?).ok()?;
            Some(COEFFICIENTS.iter().zip(theta).all(|(c, t)| {
                let co = fit.coefficient(*c).expect("all terms fitted");
                (co.estimate - t).abs() <= RECOVERY_SE_MULTIPLE * co.std_error
            }))
        })
        .collect();
    let failed_fits = covered.iter().filter(|c| c.is_none()).count();
    let hits = covered.iter().filter(|c| **c == Some(true)).count();
    let coverage = hits as f64 / RECOVERY_REPLICATES as f64;
    verdict(
        coverage >= RECOVERY_COVERAGE,
        format!(
            "dataset absent; synthetic recovery: {hits}/{RECOVERY_REPLICATES} replicates (n={RECOVERY_NODES}) cover all 5 coefficients at {RECOVERY_SE_MULTIPLE} SE (need {:.0}%), {failed_fits} fits failed",
            RECOVERY_COVERAGE * 100.0
        ),
    )
}

fn criterion_4() -> Outcome {
    let Some(full) = caltech_full() else {
        return Outcome::Skip("needs the Caltech network (set CAMPUSNET_FB100_DIR)".into());
    };
    let parts = detect_all(&full, 42);
    let scores = score_against_attributes(&full, &parts, MissingPolicy::Include);
    let residence = Attribute::COMMUNITY.iter().position(|&a| a == Attribute::Residence).unwrap();
    let mut residence_top = 0;
    let mut strongest = f64::NEG_INFINITY;
    for q in &scores.quads {
        let z: Vec<f64> = q.z.iter().map(|z| z.unwrap_or(f64::NEG_INFINITY)).collect();
        strongest = strongest.max(z.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        if (0..4).all(|k| k == residence || z[k] < z[residence]) {
            residence_top += 1;
        }
    }
    verdict(
        residence_top == 6 && strongest > STRONG_Z,
        format!("residence has the largest z in {residence_top}/6 partitions; largest z = {strongest:.2} (need > {STRONG_Z})"),
    )
}

fn criterion_5() -> Outcome {
    let Some(full) = caltech_full() else {
        return Outcome::Skip("needs the Caltech network (set CAMPUSNET_FB100_DIR)".into());
    };
    match build_design(&full, true).and_then(|d| fit_ergm_mple(&d)) {
        Ok(fit) => {
            let hs = fit.estimate(Covariate::HighSchool).unwrap_or(f64::NAN);
            let res = fit.estimate(Covariate::Residence).unwrap_or(f64::NAN);
            verdict(hs > res, format!("MPLE theta_hs = {hs:.4}, theta_residence = {res:.4}"))
        }
        Err(e) => Outcome::Fail(format!("MPLE fit failed: {e}")),
    }
}

fn close3(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn criterion_6() -> Outcome {
    let mut problems = Vec::new();
    for (i, v) in VERTICES.iter().enumerate() {
        let mut z = [0.0; 4];
        z[i] = 1.0;
        if tetra_point(z).x != *v {
            problems.push(format!("vertex {}", i + 1));
        }
    }
    let mut rng = synthetic::rng(6);
    let mut worst_affine: f64 = 0.0;
    let mut worst_round_trip: f64 = 0.0;
    let random_z = |rng: &mut rand_chacha::ChaCha8Rng| {
        let raw: [f64; 4] = std::array::from_fn(|_| rng.random::<f64>());
        let s: f64 = raw.iter().sum();
        raw.map(|x| x / s)
    };
    for _ in 0..10_000 {
        let (a, b) = (random_z(&mut rng), random_z(&mut rng));
        let l: f64 = rng.random();
        let mix: [f64; 4] = std::array::from_fn(|k| l * a[k] + (1.0 - l) * b[k]);
        let (pa, pb, pm) = (tetra_point(a).x, tetra_point(b).x, tetra_point(mix).x);
        let lin: [f64; 3] = std::array::from_fn(|k| l * pa[k] + (1.0 - l) * pb[k]);
        worst_affine = worst_affine.max((0..3).map(|k| (lin[k] - pm[k]).abs()).fold(0.0, f64::max));
        let back = barycentric(pa);
        worst_round_trip = worst_round_trip.max((0..4).map(|k| (back[k] - a[k]).abs()).fold(0.0, f64::max));
    }
    if worst_affine > GEOMETRY_TOL {
        problems.push(format!("affine error {worst_affine:.1e}"));
    }
    if worst_round_trip > GEOMETRY_TOL {
        problems.push(format!("round-trip error {worst_round_trip:.1e}"));
    }
    // six points spread along a line with a prescribed maximum separation
    let spread = |d: f64| -> Vec<TetraPoint> {
        let base = tetra_point([0.25; 4]);
        let dir = [1.0, 0.0, 0.0];
        (0..6)
            .map(|i| {
                let t = d * i as f64 / 5.0;
                TetraPoint {
                    x: std::array::from_fn(|k| base.x[k] + t * dir[k]),
                    ..base
                }
            })
            .collect()
    };
    for (d, bin) in [(0.1581, 1), (0.0141, 0)] {
        let s = summarize_runs(&spread(d)).unwrap();
        if s.size_bin != bin || (s.max_distance - d).abs() > 1e-12 {
            problems.push(format!("d={d} gave bin {}", s.size_bin));
        }
    }
    if size_bin(0.1) != 1 {
        problems.push("d=0.1 not in bin 1".into());
    }
    let same = summarize_runs(&[tetra_point([0.1, 0.2, 0.3, 0.4]); 6]).unwrap();
    if same.max_distance != 0.0 || same.size_bin != 0 || !close3(same.center, tetra_point([0.1, 0.2, 0.3, 0.4]).x, 1e-15) {
        problems.push("identical points".into());
    }
    verdict(
        problems.is_empty(),
        if problems.is_empty() {
            format!(
                "vertices exact; affine {worst_affine:.1e}, round trip {worst_round_trip:.1e} (tol {GEOMETRY_TOL:.0e}); d=0.1581 -> bin 1, d=0.0141 -> bin 0"
            )
        } else {
            problems.join("; ")
        },
    )
}

fn r_of(view: &NetworkView, attribute: Attribute) -> f64 {
    assortativity(&mixing_matrix(view, attribute, MissingPolicy::Include).unwrap()).unwrap()
}

fn criterion_7() -> Outcome {
    let mut problems = Vec::new();
    // pure within-type: three cliques, each its own residence
    let mut attrs = Vec::new();
    let mut edges = Vec::new();
    for g in 0..3usize {
        for i in 0..5 {
            attrs.push(campusnet::NodeAttributes {
                residence: g as u32 + 1,
                ..Default::default()
            });
            for j in i + 1..5 {
                edges.push((g * 5 + i, g * 5 + j));
            }
        }
    }
    let cliques = NetworkView::whole(ViewKind::Full, Network::new(attrs, None, edges).unwrap());
    let pure = r_of(&cliques, Attribute::Residence);
    if pure != 1.0 {
        problems.push(format!("pure within-type r = {pure}"));
    }

    let mut rng = synthetic::rng(7);
    let mut net = synthetic::gnp(100, 0.2, &mut rng);
    let attrs = synthetic::random_attributes(100, &Categories::default(), &mut rng);
    net = Network::new(attrs, None, net.edges().iter().copied()).unwrap();
    let (mut sum_abs, mut sum) = (0.0, 0.0);
    for _ in 0..SHUFFLES {
        let s = synthetic::shuffle_attribute(&net, Attribute::Residence, &mut rng);
        let r = r_of(&NetworkView::whole(ViewKind::Full, s), Attribute::Residence);
        sum_abs += r.abs();
        sum += r;
    }
    let mean_abs = sum_abs / SHUFFLES as f64;
    if mean_abs >= SHUFFLE_MEAN_ABS_R {
        problems.push(format!("shuffled mean |r| = {mean_abs:.4}"));
    }

    // relabeling category codes leaves r unchanged
    let view = NetworkView::whole(ViewKind::Full, net.clone());
    let mut relabeled = net.all_attributes().to_vec();
    for a in relabeled.iter_mut() {
        if a.residence != 0 {
            a.residence = 100 - a.residence;
        }
    }
    let relabeled = NetworkView::whole(ViewKind::Full, Network::new(relabeled, None, net.edges().iter().copied()).unwrap());
    let (r0, r1) = (r_of(&view, Attribute::Residence), r_of(&relabeled, Attribute::Residence));
    if (r0 - r1).abs() > 1e-12 {
        problems.push(format!("relabeling changed r: {r0} vs {r1}"));
    }

    // a full per-institution run: all views, all attributes
    let (institution, source) = match caltech() {
        Some((n, e)) => (io::load_network_with_codes(&n, &e).map(|(net, _)| net).unwrap(), "Caltech"),
        None => (synthetic::toy_institution(4000, 70), "synthetic n=4000"),
    };
    let start = Instant::now();
    let views = extract_views(&institution, Default::default());
    let mut rows = 0;
    for v in views.iter().filter(|v| !v.is_empty()) {
        for a in Attribute::ALL {
            let _ = mixing_matrix(v, a, MissingPolicy::Include).and_then(|m| assortativity(&m));
            rows += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= ASSORT_SECONDS {
        problems.push(format!("assortativity run took {secs:.2} s"));
    }
    let detail = format!(
        "pure r = {pure}; mean |r| over {SHUFFLES} shuffles = {mean_abs:.4} (mean r = {:.4}, tol {SHUFFLE_MEAN_ABS_R}); relabel |dr| = {:.1e}; {rows} rows on {source} in {secs:.2} s (limit {ASSORT_SECONDS} s)",
        sum / SHUFFLES as f64,
        (r0 - r1).abs()
    );
    verdict(problems.is_empty(), if problems.is_empty() { detail } else { problems.join("; ") })
}

fn files(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn criterion_8() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in");
    fs::create_dir_all(&input).unwrap();
    for (i, n) in [(1, 120), (2, 90), (3, 150)] {
        let net = synthetic::toy_institution(n, i);
        io::write_network(
            &net,
            Default::default(),
            &input.join(format!("Toy{i}.nodes.tsv")),
            &input.join(format!("Toy{i}.edges.tsv")),
        )
        .unwrap();
    }
    let run = |out: &Path, workers: usize| {
        let config = Config {
            workers,
            ..Config::default()
        };
        batch(&input, out, &config).unwrap()
    };
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let ra = run(&a, 1);
    let rb = run(&b, 4);
    let (fa, fb) = (files(&a), files(&b));
    let compared: Vec<&PathBuf> = fa
        .iter()
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("tsv" | "json" | "svg")))
        .collect();
    let differing: Vec<String> = compared
        .iter()
        .filter(|p| fs::read(a.join(p)).ok() != fs::read(b.join(p)).ok())
        .map(|p| p.display().to_string())
        .collect();
    verdict(
        fa == fb && differing.is_empty() && ra.succeeded() && rb.succeeded(),
        format!(
            "{} TSV/JSON/SVG files compared across 1 and 4 workers, {} differ{}",
            compared.len(),
            differing.len(),
            if differing.is_empty() { String::new() } else { format!(": {}", differing.join(", ")) }
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("rand z-score exactness", criterion_1),
        ("modularity optimizer quality", criterion_2),
        ("logistic regression golden test", criterion_3),
        ("Caltech community structure", criterion_4),
        ("ERGM-MPLE ordering", criterion_5),
        ("tetra geometry", criterion_6),
        ("assortativity properties", criterion_7),
        ("batch determinism", criterion_8),
    ];
    // `cargo test -- --list` and filters are not meaningful for this target.
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (tag, detail) = match check() {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("[{tag}] {} {name}: {detail}", i + 1);
    }
    println!("acceptance: {} criteria, {failed} failed", criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
