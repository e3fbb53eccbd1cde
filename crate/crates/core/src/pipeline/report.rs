//! Tabular outputs: row types, TSV formatting and the readers needed to run
//! stages from each other's files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::community::{Method, Partition, Provenance};
use crate::compare::ZScoreQuad;
use crate::dyad::BoxStats;
use crate::error::{Error, Result};
use crate::graph::{Attribute, NetworkView, ViewKind};
use crate::pipeline::Model;
use crate::tetra::{self, Disk, TetraSummary, Vec3};

/// A row of a tab-separated table.
pub trait TsvRow {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), num)
}

pub fn format_tsv<R: TsvRow>(rows: &[R]) -> String {
    let mut out = R::HEADER.join("\t");
    out.push('\n');
    for r in rows {
        out.push_str(&r.fields().join("\t"));
        out.push('\n');
    }
    out
}

pub fn write_tsv<R: TsvRow>(path: &Path, rows: &[R]) -> Result<()> {
    write_file(path, format_tsv(rows).as_bytes())
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(format!("cannot create {}", dir.display()), e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(format!("cannot write {}", path.display()), e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ViewRow {
    pub institution: String,
    pub view: ViewKind,
    pub nodes: usize,
    pub edges: usize,
}

impl TsvRow for ViewRow {
    const HEADER: &'static [&'static str] = &["institution", "view", "nodes", "edges"];
    fn fields(&self) -> Vec<String> {
        vec![
            self.institution.clone(),
            self.view.to_string(),
            self.nodes.to_string(),
            self.edges.to_string(),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssortRow {
    pub institution: String,
    pub view: ViewKind,
    pub attribute: Attribute,
    /// `None` where undefined (a single category carries every edge).
    pub r: Option<f64>,
}

impl TsvRow for AssortRow {
    const HEADER: &'static [&'static str] = &["institution", "view", "attribute", "r"];
    fn fields(&self) -> Vec<String> {
        vec![
            self.institution.clone(),
            self.view.to_string(),
            self.attribute.to_string(),
            opt(self.r),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareRow {
    pub institution: String,
    pub view: ViewKind,
    pub method: Method,
    pub attribute: Attribute,
    pub rand: Option<f64>,
    pub z: Option<f64>,
}

impl TsvRow for CompareRow {
    const HEADER: &'static [&'static str] = &["institution", "view", "method", "attribute", "S", "z"];
    fn fields(&self) -> Vec<String> {
        vec![
            self.institution.clone(),
            self.view.to_string(),
            self.method.to_string(),
            self.attribute.to_string(),
            opt(self.rand),
            opt(self.z),
        ]
    }
}

fn parse_opt(field: &str, path: &Path, line: usize) -> Result<Option<f64>> {
    if field == "NA" {
        return Ok(None);
    }
    field.parse().map(Some).map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("expected a number or NA, got `{field}`"),
    })
}

/// Reads a table written from [`CompareRow`]s.
pub fn parse_compare_tsv(text: &str, path: &Path) -> Result<Vec<CompareRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.split('\t').eq(CompareRow::HEADER.iter().copied()) => {}
        _ => {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: format!("expected header `{}`", CompareRow::HEADER.join("\t")),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 6 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("expected 6 fields, got {}", f.len()),
            });
        }
        let wrap = |e: Error| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message: e.to_string(),
        };
        rows.push(CompareRow {
            institution: f[0].to_string(),
            view: f[1].parse().map_err(wrap)?,
            method: f[2].parse().map_err(wrap)?,
            attribute: f[3].parse().map_err(wrap)?,
            rand: parse_opt(f[4], path, line_no)?,
            z: parse_opt(f[5], path, line_no)?,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaxRow {
    pub institution: String,
    pub view: ViewKind,
    pub attribute: Attribute,
    pub max_z: Option<f64>,
    pub method: Option<Method>,
    pub significant: bool,
}

impl TsvRow for MaxRow {
    const HEADER: &'static [&'static str] = &["institution", "view", "attribute", "max_z", "method", "significant"];
    fn fields(&self) -> Vec<String> {
        vec![
            self.institution.clone(),
            self.view.to_string(),
            self.attribute.to_string(),
            opt(self.max_z),
            self.method.map_or_else(|| "NA".into(), |m| m.to_string()),
            self.significant.to_string(),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TetraRow {
    pub institution: String,
    pub view: ViewKind,
    /// Mean normalized z-scores of the six runs (barycentric coordinates
    /// of the center).
    pub z_norm: [f64; 4],
    pub center: Vec3,
    pub max_distance: f64,
    pub size_bin: u32,
    pub year_distance: f64,
    /// Attributes whose score was undefined and entered as zero.
    pub degenerate: Vec<Attribute>,
}

impl TetraRow {
    pub fn summary(&self) -> TetraSummary {
        TetraSummary {
            center: self.center,
            max_distance: self.max_distance,
            size_bin: self.size_bin,
            year_distance: self.year_distance,
        }
    }

    /// Figure label: trailing digits of the institution name, if any.
    pub fn label(&self) -> String {
        let digits: String = self
            .institution
            .chars()
            .rev()
            .take_while(char::is_ascii_digit)
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect();
        if digits.is_empty() {
            self.institution.clone()
        } else {
            digits
        }
    }

    pub fn disk(&self) -> Disk {
        Disk {
            label: self.label(),
            summary: self.summary(),
        }
    }
}

impl TsvRow for TetraRow {
    const HEADER: &'static [&'static str] = &[
        "institution",
        "view",
        "z_major",
        "z_residence",
        "z_year",
        "z_high_school",
        "x",
        "y",
        "z",
        "d",
        "size_bin",
        "year_distance",
        "zeroed",
    ];
    fn fields(&self) -> Vec<String> {
        let mut f = vec![self.institution.clone(), self.view.to_string()];
        f.extend(self.z_norm.iter().map(|v| num(*v)));
        f.extend(self.center.iter().map(|v| num(*v)));
        f.push(num(self.max_distance));
        f.push(self.size_bin.to_string());
        f.push(num(self.year_distance));
        f.push(if self.degenerate.is_empty() {
            "-".into()
        } else {
            self.degenerate.iter().map(|a| a.name()).collect::<Vec<_>>().join(",")
        });
        f
    }
}

/// Tetrahedral summaries from comparison rows; groups that cannot be
/// summarized are explained in the returned notes.
pub fn tetra_rows(rows: &[CompareRow]) -> (Vec<TetraRow>, Vec<String>) {
    let mut groups: BTreeMap<(&str, ViewKind), BTreeMap<Method, [Option<f64>; 4]>> = BTreeMap::new();
    for r in rows {
        let Some(k) = Attribute::COMMUNITY.iter().position(|&a| a == r.attribute) else {
            continue;
        };
        groups
            .entry((r.institution.as_str(), r.view))
            .or_default()
            .entry(r.method)
            .or_insert([None; 4])[k] = r.z;
    }
    let mut out = Vec::new();
    let mut notes = Vec::new();
    for ((institution, view), runs) in groups {
        let quads: Vec<ZScoreQuad> = runs
            .iter()
            .map(|(&m, &z)| ZScoreQuad { method: Some(m), z })
            .collect();
        let mut points: Vec<tetra::TetraPoint> = Vec::new();
        let mut degenerate = Vec::new();
        let mut failed = None;
        for q in &quads {
            match tetra::normalize_quad(q) {
                Ok(z) => points.push(tetra::tetra_point(z)),
                Err(e) => {
                    failed = Some(format!("{}: {e}", q.method.map_or("?", Method::name)));
                    break;
                }
            }
            for a in tetra::degenerate_attributes(q) {
                if !degenerate.contains(&a) {
                    degenerate.push(a);
                }
            }
        }
        if let Some(reason) = failed {
            notes.push(format!("{institution}/{view}: {reason}"));
            continue;
        }
        match tetra::summarize_runs(&points) {
            Ok(s) => {
                degenerate.sort();
                out.push(TetraRow {
                    institution: institution.to_string(),
                    view,
                    z_norm: mean_z_norm(&points),
                    center: s.center,
                    max_distance: s.max_distance,
                    size_bin: s.size_bin,
                    year_distance: s.year_distance,
                    degenerate,
                });
            }
            Err(e) => notes.push(format!("{institution}/{view}: {e}")),
        }
    }
    (out, notes)
}

fn mean_z_norm(points: &[tetra::TetraPoint]) -> [f64; 4] {
    let mut z = [0.0; 4];
    for p in points {
        for k in 0..3 {
            z[k] += p.z_norm[k] / points.len() as f64;
        }
    }
    z[3] = 1.0 - (z[0] + z[1] + z[2]);
    z
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitRow {
    pub institution: String,
    pub view: ViewKind,
    pub model: Model,
    pub coefficient: String,
    pub estimate: f64,
    pub std_error: f64,
}

impl TsvRow for FitRow {
    const HEADER: &'static [&'static str] = &["institution", "view", "model", "coefficient", "estimate", "std_error"];
    fn fields(&self) -> Vec<String> {
        vec![
            self.institution.clone(),
            self.view.to_string(),
            self.model.to_string(),
            self.coefficient.clone(),
            num(self.estimate),
            num(self.std_error),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxRow {
    pub model: Model,
    pub stats: BoxStats,
}

impl TsvRow for BoxRow {
    const HEADER: &'static [&'static str] = &[
        "view",
        "model",
        "coefficient",
        "count",
        "median",
        "lower_hinge",
        "upper_hinge",
        "lower_whisker",
        "upper_whisker",
        "outliers",
    ];
    fn fields(&self) -> Vec<String> {
        let s = &self.stats;
        let outliers = if s.outliers.is_empty() {
            "-".to_string()
        } else {
            s.outliers
                .iter()
                .map(|(name, v)| format!("{name}:{v}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        vec![
            s.view.to_string(),
            self.model.to_string(),
            s.coefficient.clone(),
            s.count.to_string(),
            num(s.median),
            num(s.lower_hinge),
            num(s.upper_hinge),
            num(s.lower_whisker),
            num(s.upper_whisker),
            outliers,
        ]
    }
}

/// One detection run as listed in `communities/<view>/runs.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: Method,
    pub seed: u64,
    pub modularity: f64,
    pub communities: usize,
    pub file: String,
}

pub fn partition_file_name(method: Method) -> String {
    format!("{}.tsv", method.name())
}

/// `node_id<TAB>community`, in view order.
pub fn format_partition(view: &NetworkView, partition: &Partition) -> String {
    let mut out = String::from("node_id\tcommunity\n");
    for (v, c) in partition.assignment().iter().enumerate() {
        out.push_str(view.network.label(v));
        out.push('\t');
        out.push_str(&c.to_string());
        out.push('\n');
    }
    out
}

/// Reads a partition file written by [`format_partition`] for `view`.
pub fn read_partition(path: &Path, view: &NetworkView, provenance: Provenance) -> Result<Partition> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(format!("cannot read {}", path.display()), e))?;
    let index: BTreeMap<&str, usize> = view.network.labels().iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut labels = vec![usize::MAX; view.node_count()];
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let (id, c) = line.split_once('\t').ok_or_else(|| err("expected `node_id<TAB>community`".into()))?;
        let &v = index.get(id).ok_or_else(|| err(format!("node `{id}` is not in the {} view", view.kind)))?;
        labels[v] = c.trim().parse().map_err(|_| err(format!("bad community `{c}`")))?;
    }
    if let Some(v) = labels.iter().position(|&c| c == usize::MAX) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("node `{}` has no community", view.network.label(v)),
        });
    }
    Ok(Partition::from_assignment(&labels, provenance))
}

/// Reads every run listed in `dir/runs.json`.
pub fn read_runs(dir: &Path, view: &NetworkView) -> Result<Vec<Partition>> {
    let path = dir.join("runs.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(format!("cannot read {}", path.display()), e))?;
    let runs: Vec<RunRecord> = serde_json::from_str(&text)?;
    runs.iter()
        .map(|r| {
            read_partition(
                &dir.join(&r.file),
                view,
                Provenance::Detected {
                    method: r.method,
                    seed: r.seed,
                },
            )
        })
        .collect()
}
