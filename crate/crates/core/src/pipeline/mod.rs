//! End-to-end analysis of one institution and batch runs over a directory.
//!
//! Each institution writes into its own directory:
//!
//! ```text
//! <out>/<name>/views.tsv
//!              assortativity.tsv
//!              communities/<view>/<method>.tsv, runs.json
//!              compare.tsv, compare_max.tsv
//!              tetra.tsv
//!              regress.json, regress.tsv
//!              manifest.json
//!              timings.log
//! ```
//!
//! Everything except `timings.log` is a deterministic function of the
//! inputs and the configuration.

pub mod report;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::assortativity::{assortativity, mixing_matrix, MissingPolicy};
use crate::community::{detect_all, modularity_value, Partition};
use crate::compare::score_against_attributes;
use crate::dyad::{build_design, coefficient_summary, fit_ergm_mple, fit_logistic, DyadModelFit, LabeledFit};
use crate::error::{Error, Result};
use crate::graph::{extract_views, Attribute, NetworkView, ViewCodes, ViewKind};
use crate::io::load_network_with_codes;
use crate::tetra::{render_svg, FigureOptions, Projection};

use report::*;

/// Dyad-level model families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "logit")]
    Logit,
    #[serde(rename = "ergm-mple")]
    ErgmMple,
}

impl Model {
    pub const ALL: [Model; 2] = [Model::Logit, Model::ErgmMple];

    pub fn name(self) -> &'static str {
        match self {
            Model::Logit => "logit",
            Model::ErgmMple => "ergm-mple",
        }
    }

    pub fn fit(self, view: &NetworkView) -> Result<DyadModelFit> {
        match self {
            Model::Logit => fit_logistic(&build_design(view, false)?),
            Model::ErgmMple => fit_ergm_mple(&build_design(view, true)?),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Model::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown model `{s}` (expected logit or ergm-mple)")))
    }
}

/// Run settings. Read from a `key = value` file; command-line flags
/// override individual keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub seed: u64,
    /// Worker threads; 0 uses every core. Not recorded, as it cannot
    /// change any output.
    #[serde(skip)]
    pub workers: usize,
    pub missing: MissingPolicy,
    /// Dyad models run only on networks with at most this many nodes.
    pub dyad_guard: usize,
    /// Ignore the guard.
    pub force_dyad: bool,
    pub models: Vec<Model>,
    pub zoom_year: bool,
    pub projection: Projection,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 42,
            workers: 0,
            missing: MissingPolicy::Include,
            dyad_guard: 10_000,
            force_dyad: false,
            models: Model::ALL.to_vec(),
            zoom_year: false,
            projection: Projection::Orthographic,
        }
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("`{key}` expects a boolean, got `{value}`"))),
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("`{key}` expects a number, got `{value}`")))
}

impl Config {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "seed" => self.seed = parse_num(key, value)?,
            "workers" => self.workers = parse_num(key, value)?,
            "exclude_missing" => {
                self.missing = if parse_bool(key, value)? {
                    MissingPolicy::Exclude
                } else {
                    MissingPolicy::Include
                }
            }
            "dyad_guard" => self.dyad_guard = parse_num(key, value)?,
            "force_dyad" => self.force_dyad = parse_bool(key, value)?,
            "models" => {
                self.models = if value == "none" || value.is_empty() {
                    Vec::new()
                } else {
                    value.split(',').map(|m| m.trim().parse()).collect::<Result<_>>()?
                }
            }
            "zoom_year" => self.zoom_year = parse_bool(key, value)?,
            "perspective" => {
                self.projection = match value {
                    "off" | "none" => Projection::Orthographic,
                    h => Projection::Perspective {
                        eye_height: parse_num(key, h)?,
                    },
                }
            }
            other => return Err(Error::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Config::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("config line {}: expected `key = value`", i + 1)))?;
            config
                .set(key, value)
                .map_err(|e| Error::Config(format!("config line {}: {e}", i + 1)))?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(format!("cannot read {}", path.display()), e))?;
        Config::parse(&text)
    }

    fn figure_options(&self) -> FigureOptions {
        FigureOptions {
            projection: self.projection,
            zoom_year: self.zoom_year,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Ok,
    Failed,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub status: StageStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputFile {
    pub role: String,
    /// File name only, so manifests do not depend on where inputs live.
    pub name: String,
    pub sha256: String,
}

/// Reproducibility record of one institution's run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub institution: String,
    pub inputs: Vec<InputFile>,
    pub seed: u64,
    pub versions: BTreeMap<String, String>,
    pub config: Config,
    /// Student/Female/Male codes read from the node table, once ingested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub view_codes: Option<ViewCodes>,
    pub empty_views: Vec<ViewKind>,
    pub stages: Vec<StageRecord>,
    /// Paths relative to the institution directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn succeeded(&self) -> bool {
        self.stages.iter().all(|s| s.status != StageStatus::Failed)
    }
}

/// Outcome of one dyad-model fit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegressRecord {
    pub view: ViewKind,
    pub model: Model,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<DyadModelFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Everything one institution produced, also persisted under its directory.
#[derive(Clone, Debug, Default)]
pub struct InstitutionReport {
    pub views: Vec<ViewRow>,
    pub assortativity: Vec<AssortRow>,
    pub partitions: BTreeMap<ViewKind, Vec<Partition>>,
    pub compare: Vec<CompareRow>,
    pub maxima: Vec<MaxRow>,
    pub tetra: Vec<TetraRow>,
    pub regress: Vec<RegressRecord>,
    pub manifest: Option<RunManifest>,
}

impl InstitutionReport {
    pub fn manifest(&self) -> &RunManifest {
        self.manifest.as_ref().expect("manifest is set once the run finishes")
    }

    pub fn succeeded(&self) -> bool {
        self.manifest().succeeded()
    }

    pub fn fit_rows(&self) -> Vec<FitRow> {
        fit_rows(&self.manifest().institution, &self.regress)
    }
}

/// Long-format coefficient table of the successful fits.
pub fn fit_rows(institution: &str, records: &[RegressRecord]) -> Vec<FitRow> {
    records
        .iter()
        .filter_map(|r| r.fit.as_ref().map(|f| (r, f)))
        .flat_map(|(r, f)| {
            f.coefficients.iter().map(move |c| FitRow {
                institution: institution.to_string(),
                view: r.view,
                model: r.model,
                coefficient: c.name.clone(),
                estimate: c.estimate,
                std_error: c.std_error,
            })
        })
        .collect()
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(format!("cannot read {}", path.display()), e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

struct Run {
    dir: PathBuf,
    manifest: RunManifest,
    timings: Vec<(String, f64)>,
    blocked: bool,
}

impl Run {
    /// Runs a stage unless an earlier one failed. Stage failures are recorded.
    fn stage<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Option<T> {
        if self.blocked {
            self.record(name, StageStatus::Skipped, Some("an earlier stage failed".into()));
            return None;
        }
        let start = Instant::now();
        let out = f(self);
        self.timings.push((name.to_string(), start.elapsed().as_secs_f64()));
        match out {
            Ok(v) => {
                if !self.manifest.stages.iter().any(|s| s.stage == name) {
                    self.record(name, StageStatus::Ok, None);
                }
                Some(v)
            }
            Err(e) => {
                self.record(name, StageStatus::Failed, Some(e.to_string()));
                self.blocked = true;
                None
            }
        }
    }

    fn record(&mut self, stage: &str, status: StageStatus, detail: Option<String>) {
        self.manifest.stages.push(StageRecord {
            stage: stage.to_string(),
            status,
            detail,
        });
    }

    fn write_tsv<R: TsvRow>(&mut self, rel: &str, rows: &[R]) -> Result<()> {
        write_tsv(&self.dir.join(rel), rows)?;
        self.manifest.outputs.push(rel.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        write_json(&self.dir.join(rel), value)?;
        self.manifest.outputs.push(rel.to_string());
        Ok(())
    }

    fn write_text(&mut self, rel: &str, text: &str) -> Result<()> {
        report::write_file(&self.dir.join(rel), text.as_bytes())?;
        self.manifest.outputs.push(rel.to_string());
        Ok(())
    }
}

/// Analyzes one institution into `out_dir/<name>/`.
///
/// Stage failures are recorded in the manifest and skip the remaining
/// stages; the returned report then has `succeeded() == false`. `Err` is
/// returned only when the manifest itself cannot be written.
pub fn analyze_institution(
    name: &str,
    nodes: &Path,
    edges: &Path,
    config: &Config,
    out_dir: &Path,
) -> Result<InstitutionReport> {
    let dir = out_dir.join(name);
    fs::create_dir_all(&dir).map_err(|e| Error::io(format!("cannot create {}", dir.display()), e))?;
    let mut run = Run {
        dir,
        manifest: RunManifest {
            institution: name.to_string(),
            inputs: Vec::new(),
            seed: config.seed,
            versions: BTreeMap::from([("campusnet".to_string(), env!("CARGO_PKG_VERSION").to_string())]),
            config: config.clone(),
            view_codes: None,
            empty_views: Vec::new(),
            stages: Vec::new(),
            outputs: Vec::new(),
        },
        timings: Vec::new(),
        blocked: false,
    };
    let mut report = InstitutionReport::default();

    let loaded = run.stage("ingest", |run| {
        for (role, path) in [("nodes", nodes), ("edges", edges)] {
            let sha256 = sha256_file(path)?;
            run.manifest.inputs.push(InputFile {
                role: role.into(),
                name: file_name(path),
                sha256,
            });
        }
        load_network_with_codes(nodes, edges)
    });

    let views = run.stage("views", |run| {
        let (network, codes) = loaded.ok_or(Error::EmptyInput("network"))?;
        run.manifest.view_codes = Some(codes);
        let views = extract_views(&network, codes);
        report.views = views
            .iter()
            .map(|v| ViewRow {
                institution: name.to_string(),
                view: v.kind,
                nodes: v.node_count(),
                edges: v.edge_count(),
            })
            .collect();
        run.manifest.empty_views = views.iter().filter(|v| v.is_empty()).map(|v| v.kind).collect();
        run.write_tsv("views.tsv", &report.views)?;
        Ok((network.node_count(), views))
    });
    let Some((loaded_nodes, views)) = views else {
        for stage in ["assortativity", "communities", "compare", "tetra", "regress"] {
            run.stage(stage, |_| Ok(()));
        }
        return finish(run, report);
    };
    let active: Vec<&NetworkView> = views.iter().filter(|v| !v.is_empty()).collect();

    run.stage("assortativity", |run| {
        for view in &active {
            for attribute in Attribute::ALL {
                let r = mixing_matrix(view, attribute, config.missing).and_then(|mm| assortativity(&mm));
                report.assortativity.push(AssortRow {
                    institution: name.to_string(),
                    view: view.kind,
                    attribute,
                    r: r.ok(),
                });
            }
        }
        run.write_tsv("assortativity.tsv", &report.assortativity)
    });

    let detected = run.stage("communities", |run| {
        for view in &active {
            let parts = detect_all(view, config.seed);
            let mut records = Vec::new();
            for p in &parts {
                let method = p.method().expect("detected partitions carry their method");
                let file = partition_file_name(method);
                run.write_text(&format!("communities/{}/{file}", view.kind), &format_partition(view, p))?;
                records.push(RunRecord {
                    method,
                    seed: config.seed,
                    modularity: modularity_value(view, p),
                    communities: p.community_count(),
                    file,
                });
            }
            run.write_json(&format!("communities/{}/runs.json", view.kind), &records)?;
            report.partitions.insert(view.kind, parts);
        }
        Ok(())
    });

    let compared = run.stage("compare", |run| {
        detected.ok_or(Error::EmptyInput("partitions"))?;
        for view in &active {
            let scores = score_against_attributes(view, &report.partitions[&view.kind], config.missing);
            report.compare.extend(scores.comparisons.iter().map(|c| CompareRow {
                institution: name.to_string(),
                view: view.kind,
                method: c.method.expect("detected partitions carry their method"),
                attribute: c.attribute,
                rand: c.rand,
                z: c.z,
            }));
            report.maxima.extend(scores.maxima.iter().map(|m| MaxRow {
                institution: name.to_string(),
                view: view.kind,
                attribute: m.attribute,
                max_z: m.max_z,
                method: m.method,
                significant: m.significant,
            }));
        }
        run.write_tsv("compare.tsv", &report.compare)?;
        run.write_tsv("compare_max.tsv", &report.maxima)
    });

    run.stage("tetra", |run| {
        compared.ok_or(Error::EmptyInput("comparisons"))?;
        let (rows, notes) = tetra_rows(&report.compare);
        report.tetra = rows;
        run.write_tsv("tetra.tsv", &report.tetra)?;
        if !notes.is_empty() {
            run.record("tetra", StageStatus::Ok, Some(notes.join("; ")));
        }
        Ok(())
    });

    if config.models.is_empty() {
        run.record("regress", StageStatus::Skipped, Some("no models requested".into()));
    } else if loaded_nodes > config.dyad_guard && !config.force_dyad {
        run.record(
            "regress",
            StageStatus::Skipped,
            Some(format!("{loaded_nodes} nodes exceed the dyad guard of {}", config.dyad_guard)),
        );
    } else {
        run.stage("regress", |run| {
            let jobs: Vec<(&NetworkView, Model)> = active
                .iter()
                .flat_map(|v| config.models.iter().map(move |m| (*v, *m)))
                .collect();
            report.regress = jobs
                .par_iter()
                .map(|(view, model)| {
                    let fit = model.fit(view);
                    RegressRecord {
                        view: view.kind,
                        model: *model,
                        error: fit.as_ref().err().map(|e| e.to_string()),
                        fit: fit.ok(),
                    }
                })
                .collect();
            run.write_json("regress.json", &report.regress)?;
            let rows = fit_rows(name, &report.regress);
            run.write_tsv("regress.tsv", &rows)?;
            let failed = report.regress.iter().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                run.record(
                    "regress",
                    StageStatus::Ok,
                    Some(format!("{failed} of {} fits failed; see regress.json", report.regress.len())),
                );
            }
            Ok(())
        });
    }
    finish(run, report)
}

fn finish(mut run: Run, mut report: InstitutionReport) -> Result<InstitutionReport> {
    let timings: String = run
        .timings
        .iter()
        .map(|(stage, secs)| format!("{stage}\t{:.3}\n", secs * 1e3))
        .collect();
    report::write_file(&run.dir.join("timings.log"), format!("stage\tms\n{timings}").as_bytes())?;
    run.manifest.outputs.push("manifest.json".into());
    write_json(&run.dir.join("manifest.json"), &run.manifest)?;
    report.manifest = Some(run.manifest);
    Ok(report)
}

/// Per-institution outcome of a batch.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchEntry {
    pub institution: String,
    pub succeeded: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchSummary {
    pub seed: u64,
    pub institutions: Vec<BatchEntry>,
    pub outputs: Vec<String>,
}

pub struct BatchReport {
    pub summary: BatchSummary,
    pub reports: Vec<InstitutionReport>,
}

impl BatchReport {
    pub fn succeeded(&self) -> bool {
        self.summary.institutions.iter().all(|e| e.succeeded)
    }
}

/// Institutions in `dir`: every `NAME.nodes.tsv`, paired with
/// `NAME.edges.tsv`, sorted by name.
pub fn discover(dir: &Path) -> Result<Vec<(String, PathBuf, PathBuf)>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(format!("cannot list {}", dir.display()), e))?;
    let mut names = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(format!("cannot list {}", dir.display()), e))?;
        let file = entry.file_name().to_string_lossy().into_owned();
        if let Some(name) = file.strip_suffix(".nodes.tsv") {
            names.push(name.to_string());
        }
    }
    if names.is_empty() {
        return Err(Error::EmptyInput("no `*.nodes.tsv` files in the batch directory"));
    }
    names.sort();
    Ok(names
        .into_iter()
        .map(|n| {
            let nodes = dir.join(format!("{n}.nodes.tsv"));
            let edges = dir.join(format!("{n}.edges.tsv"));
            (n, nodes, edges)
        })
        .collect())
}

/// Analyzes every institution in `input`, then writes the concatenated
/// tables, one tetrahedron figure per view and the model summary to `out`.
pub fn batch(input: &Path, out: &Path, config: &Config) -> Result<BatchReport> {
    let institutions = discover(input)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<(String, Result<InstitutionReport>)> = pool.install(|| {
        institutions
            .par_iter()
            .map(|(name, nodes, edges)| (name.clone(), analyze_institution(name, nodes, edges, config, out)))
            .collect()
    });

    let mut entries = Vec::new();
    let mut reports = Vec::new();
    for (name, result) in results {
        match result {
            Ok(r) => {
                let failed: Vec<String> = r
                    .manifest()
                    .stages
                    .iter()
                    .filter(|s| s.status == StageStatus::Failed)
                    .map(|s| format!("{}: {}", s.stage, s.detail.as_deref().unwrap_or("failed")))
                    .collect();
                entries.push(BatchEntry {
                    institution: name,
                    succeeded: failed.is_empty(),
                    error: (!failed.is_empty()).then(|| failed.join("; ")),
                });
                reports.push(r);
            }
            Err(e) => entries.push(BatchEntry {
                institution: name,
                succeeded: false,
                error: Some(e.to_string()),
            }),
        }
    }

    let mut outputs = Vec::new();
    let mut emit_tsv = |rel: &str, text: String| -> Result<()> {
        report::write_file(&out.join(rel), text.as_bytes())?;
        outputs.push(rel.to_string());
        Ok(())
    };
    let concat = |f: &dyn Fn(&InstitutionReport) -> String| reports.iter().map(f).collect::<String>();
    emit_tsv(
        "views.tsv",
        header::<ViewRow>() + &concat(&|r| body(&r.views)),
    )?;
    emit_tsv(
        "assortativity.tsv",
        header::<AssortRow>() + &concat(&|r| body(&r.assortativity)),
    )?;
    emit_tsv("compare.tsv", header::<CompareRow>() + &concat(&|r| body(&r.compare)))?;
    emit_tsv("compare_max.tsv", header::<MaxRow>() + &concat(&|r| body(&r.maxima)))?;
    emit_tsv("tetra.tsv", header::<TetraRow>() + &concat(&|r| body(&r.tetra)))?;
    emit_tsv("regress.tsv", header::<FitRow>() + &concat(&|r| body(&r.fit_rows())))?;

    let mut boxes = Vec::new();
    for model in &config.models {
        let fits: Vec<LabeledFit> = reports
            .iter()
            .flat_map(|r| {
                r.regress.iter().filter(|x| x.model == *model).filter_map(|x| {
                    x.fit.as_ref().map(|f| LabeledFit {
                        institution: r.manifest().institution.clone(),
                        view: x.view,
                        fit: f.clone(),
                    })
                })
            })
            .collect();
        if fits.len() >= 2 {
            boxes.extend(coefficient_summary(&fits)?.into_iter().map(|stats| BoxRow { model: *model, stats }));
        }
    }
    emit_tsv("regress_summary.tsv", format_tsv(&boxes))?;

    for kind in ViewKind::ALL {
        let disks: Vec<_> = reports
            .iter()
            .flat_map(|r| r.tetra.iter().filter(|t| t.view == kind).map(TetraRow::disk))
            .collect();
        let svg = render_svg(kind, &disks, &config.figure_options())?;
        emit_tsv(&format!("tetra_{kind}.svg"), svg)?;
    }

    let summary = BatchSummary {
        seed: config.seed,
        institutions: entries,
        outputs: {
            let mut o = outputs;
            o.push("batch.json".into());
            o
        },
    };
    write_json(&out.join("batch.json"), &summary)?;
    Ok(BatchReport { summary, reports })
}

fn header<R: TsvRow>() -> String {
    format!("{}\n", R::HEADER.join("\t"))
}

fn body<R: TsvRow>(rows: &[R]) -> String {
    let text = format_tsv(rows);
    text.split_once('\n').map(|(_, b)| b.to_string()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parses_and_overrides() {
        let c = Config::parse("# run\nseed = 7\nexclude_missing = yes\nmodels = logit\nperspective = 3\n").unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.missing, MissingPolicy::Exclude);
        assert_eq!(c.models, vec![Model::Logit]);
        assert_eq!(c.projection, Projection::Perspective { eye_height: 3.0 });
        assert_eq!(Config::parse("").unwrap(), Config::default());
        assert!(Config::parse("colour = red").is_err());
        assert!(Config::parse("seed").is_err());
        let mut c = Config::default();
        c.set("models", "none").unwrap();
        assert!(c.models.is_empty());
    }
}
