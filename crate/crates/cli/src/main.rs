use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use campusnet::community::{detect, modularity_value, Method, Partition};
use campusnet::compare::score_against_attributes;
use campusnet::graph::{extract_views, Attribute, Network, ViewCodes, ViewKind, Views};
use campusnet::io::{load_network_with_codes, write_network};
use campusnet::pipeline::report::{
    format_partition, format_tsv, parse_compare_tsv, partition_file_name, read_runs, tetra_rows, AssortRow, CompareRow,
    MaxRow, RunRecord, TsvRow, ViewRow,
};
use campusnet::pipeline::{analyze_institution, batch, fit_rows, Config, Model, RegressRecord};
use campusnet::tetra::{render_svg, FigureOptions, Projection};
use campusnet::{assortativity, mixing_matrix, Error, Result};
use clap::{Args, Parser, Subcommand};

/// Attributed friendship-network analysis: views, assortativity, community
/// detection, Rand z-scores, dyad models and tetrahedral summaries.
#[derive(Parser, Debug)]
#[command(name = "campusnet", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Seed for every randomized step [default: 42]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores)
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Drop Missing codes instead of treating them as a category
    #[arg(long, global = true)]
    exclude_missing: bool,
    /// Largest network (in nodes) on which dyad models run [default: 10000]
    #[arg(long, global = true)]
    dyad_guard: Option<usize>,
    /// Run dyad models regardless of the guard
    #[arg(long, global = true)]
    force_dyad: bool,
    /// `key = value` configuration file; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct Input {
    /// Node table (`id status gender major residence year high_school`)
    #[arg(long)]
    nodes: PathBuf,
    /// Edge list (`id1<TAB>id2`)
    #[arg(long)]
    edges: PathBuf,
    /// Institution name [default: node file name without `.nodes.tsv`]
    #[arg(long)]
    name: Option<String>,
}

impl Input {
    fn name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            let file = self.nodes.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
            file.strip_suffix(".nodes.tsv")
                .or_else(|| file.strip_suffix(".tsv"))
                .unwrap_or(&file)
                .to_string()
        })
    }

    fn load(&self) -> Result<(Network, ViewCodes)> {
        load_network_with_codes(&self.nodes, &self.edges)
    }

    fn views(&self) -> Result<Views> {
        let (net, codes) = self.load()?;
        Ok(extract_views(&net, codes))
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate inputs and write canonical copies
    Ingest(Input),
    /// Extract the Full, Student, Female and Male views
    Views(Input),
    /// Assortativity of every attribute in every view
    Assort(Input),
    /// Detect communities with the six method combinations
    Communities {
        #[command(flatten)]
        input: Input,
        /// View to partition
        #[arg(long, default_value = "full")]
        view: ViewKind,
        /// `all` or a comma-separated list such as `louvain,spectral2+kl`
        #[arg(long, default_value = "all")]
        methods: String,
    },
    /// Rand coefficients and z-scores of communities against attributes
    Compare {
        #[command(flatten)]
        input: Input,
        /// `all` or a comma-separated list of views
        #[arg(long, default_value = "all")]
        views: String,
        /// Partitions written by `communities` (a directory holding
        /// runs.json) instead of detecting afresh; single view only
        #[arg(long)]
        partitions: Option<PathBuf>,
        /// Also write the per-attribute maximum over methods
        #[arg(long)]
        max: bool,
    },
    /// Fit dyad-level models
    Regress {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "logit")]
        model: Model,
        /// `all` or a comma-separated list of views
        #[arg(long, default_value = "all")]
        views: String,
    },
    /// Tetrahedral summaries and figures from a compare table
    Tetra {
        /// Table written by `compare`
        #[arg(long)]
        compare: PathBuf,
        /// Add a magnified panel around the Year vertex
        #[arg(long)]
        zoom_year: bool,
        /// Central projection with the eye at this multiple of the
        /// tetrahedron height (orthographic if absent)
        #[arg(long)]
        perspective: Option<f64>,
    },
    /// Full analysis of one institution
    Analyze(Input),
    /// Analyze every `NAME.nodes.tsv`/`NAME.edges.tsv` pair in a directory
    Batch {
        #[arg(long)]
        input: PathBuf,
    },
}

fn config(global: &Global) -> Result<Config> {
    let mut c = match &global.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = global.seed {
        c.seed = seed;
    }
    if let Some(w) = global.workers {
        c.workers = w;
    }
    if global.exclude_missing {
        c.set("exclude_missing", "true")?;
    }
    if let Some(g) = global.dyad_guard {
        c.dyad_guard = g;
    }
    if global.force_dyad {
        c.force_dyad = true;
    }
    Ok(c)
}

fn parse_list<T: std::str::FromStr<Err = Error> + Copy>(text: &str, all: &[T]) -> Result<Vec<T>> {
    if text == "all" {
        return Ok(all.to_vec());
    }
    text.split(',').map(|s| s.trim().parse()).collect()
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_tsv<R: TsvRow>(path: &Path, rows: &[R]) -> Result<()> {
    write(path, &format_tsv(rows))
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = config(&cli.global)?;
    if cfg.workers > 0 {
        // An already-initialized pool just keeps its size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build_global();
    }
    let out = &cli.global.out_dir;
    match cli.command {
        Command::Ingest(input) => {
            let (net, codes) = input.load()?;
            let name = input.name();
            let (_, components) = net.components();
            println!(
                "{name}: {} nodes, {} edges, {components} components",
                net.node_count(),
                net.edge_count()
            );
            for a in Attribute::ALL {
                let missing = (0..net.node_count()).filter(|&v| net.attribute(v, a) == 0).count();
                println!("  {a}: {missing} missing");
            }
            let dir = out.join(&name);
            fs::create_dir_all(&dir).map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
            let (nodes, edges) = (dir.join(format!("{name}.nodes.tsv")), dir.join(format!("{name}.edges.tsv")));
            write_network(&net, codes, &nodes, &edges)?;
            println!("wrote {}\nwrote {}", nodes.display(), edges.display());
        }
        Command::Views(input) => {
            let name = input.name();
            let rows: Vec<ViewRow> = input
                .views()?
                .iter()
                .map(|v| ViewRow {
                    institution: name.clone(),
                    view: v.kind,
                    nodes: v.node_count(),
                    edges: v.edge_count(),
                })
                .collect();
            write_tsv(&out.join(&name).join("views.tsv"), &rows)?;
        }
        Command::Assort(input) => {
            let name = input.name();
            let mut rows = Vec::new();
            for view in input.views()?.iter().filter(|v| !v.is_empty()) {
                for attribute in Attribute::ALL {
                    let r = mixing_matrix(view, attribute, cfg.missing).and_then(|mm| assortativity(&mm));
                    rows.push(AssortRow {
                        institution: name.clone(),
                        view: view.kind,
                        attribute,
                        r: r.ok(),
                    });
                }
            }
            write_tsv(&out.join(&name).join("assortativity.tsv"), &rows)?;
        }
        Command::Communities { input, view, methods } => {
            let name = input.name();
            let methods = parse_list(&methods, &Method::ALL)?;
            let views = input.views()?;
            let v = views.get(view);
            if v.is_empty() {
                return Err(Error::DegenerateInput(format!("the {view} view is empty")));
            }
            let dir = out.join(&name).join("communities").join(view.name());
            let mut records = Vec::new();
            for m in methods {
                let p = detect(v, m, cfg.seed);
                let file = partition_file_name(m);
                write(&dir.join(&file), &format_partition(v, &p))?;
                let q = modularity_value(v, &p);
                println!("  {m}: Q = {q:.6}, {} communities", p.community_count());
                records.push(RunRecord {
                    method: m,
                    seed: cfg.seed,
                    modularity: q,
                    communities: p.community_count(),
                    file,
                });
            }
            let json = serde_json::to_string_pretty(&records).map_err(Error::from)? + "\n";
            write(&dir.join("runs.json"), &json)?;
        }
        Command::Compare {
            input,
            views,
            partitions,
            max,
        } => {
            let name = input.name();
            let kinds = parse_list(&views, &ViewKind::ALL)?;
            if partitions.is_some() && kinds.len() != 1 {
                return Err(Error::Config("--partitions needs exactly one --views entry".into()));
            }
            let all = input.views()?;
            let mut rows = Vec::new();
            let mut maxima = Vec::new();
            for kind in kinds {
                let view = all.get(kind);
                if view.is_empty() {
                    eprintln!("{name}: {kind} view is empty; skipped");
                    continue;
                }
                let parts: Vec<Partition> = match &partitions {
                    Some(dir) => read_runs(dir, view)?,
                    None => campusnet::detect_all(view, cfg.seed),
                };
                let scores = score_against_attributes(view, &parts, cfg.missing);
                for c in &scores.comparisons {
                    let Some(method) = c.method else {
                        return Err(Error::Config("partitions must name their detection method".into()));
                    };
                    rows.push(CompareRow {
                        institution: name.clone(),
                        view: kind,
                        method,
                        attribute: c.attribute,
                        rand: c.rand,
                        z: c.z,
                    });
                }
                maxima.extend(scores.maxima.iter().map(|m| MaxRow {
                    institution: name.clone(),
                    view: kind,
                    attribute: m.attribute,
                    max_z: m.max_z,
                    method: m.method,
                    significant: m.significant,
                }));
            }
            write_tsv(&out.join(&name).join("compare.tsv"), &rows)?;
            if max {
                write_tsv(&out.join(&name).join("compare_max.tsv"), &maxima)?;
            }
        }
        Command::Regress { input, model, views } => {
            let name = input.name();
            let kinds = parse_list(&views, &ViewKind::ALL)?;
            let (net, codes) = input.load()?;
            if net.node_count() > cfg.dyad_guard && !cfg.force_dyad {
                return Err(Error::Config(format!(
                    "{} nodes exceed the dyad guard of {}; raise --dyad-guard or pass --force-dyad",
                    net.node_count(),
                    cfg.dyad_guard
                )));
            }
            let all = extract_views(&net, codes);
            let mut records = Vec::new();
            for kind in kinds {
                let view = all.get(kind);
                if view.is_empty() {
                    eprintln!("{name}: {kind} view is empty; skipped");
                    continue;
                }
                let fit = model.fit(view);
                match &fit {
                    Ok(f) => {
                        println!("{name} {kind} {model}: {} iterations", f.iterations);
                        for c in &f.coefficients {
                            println!("  {:<12} {:>10.5} ({:.5})", c.name, c.estimate, c.std_error);
                        }
                    }
                    Err(e) => eprintln!("{name} {kind} {model}: {e}"),
                }
                records.push(RegressRecord {
                    view: kind,
                    model,
                    error: fit.as_ref().err().map(|e| e.to_string()),
                    fit: fit.ok(),
                });
            }
            let dir = out.join(&name);
            let json = serde_json::to_string_pretty(&records).map_err(Error::from)? + "\n";
            write(&dir.join(format!("regress_{model}.json")), &json)?;
            write_tsv(&dir.join(format!("regress_{model}.tsv")), &fit_rows(&name, &records))?;
            return Ok(records.iter().all(|r| r.error.is_none()));
        }
        Command::Tetra {
            compare,
            zoom_year,
            perspective,
        } => {
            let text = fs::read_to_string(&compare)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", compare.display())))?;
            let rows = parse_compare_tsv(&text, &compare)?;
            let (tetra, notes) = tetra_rows(&rows);
            for n in &notes {
                eprintln!("skipped {n}");
            }
            write_tsv(&out.join("tetra.tsv"), &tetra)?;
            let options = FigureOptions {
                projection: match perspective {
                    Some(h) => Projection::Perspective { eye_height: h },
                    None => cfg.projection,
                },
                zoom_year: zoom_year || cfg.zoom_year,
            };
            for kind in ViewKind::ALL {
                let disks: Vec<_> = tetra.iter().filter(|t| t.view == kind).map(|t| t.disk()).collect();
                write(&out.join(format!("tetra_{kind}.svg")), &render_svg(kind, &disks, &options)?)?;
            }
        }
        Command::Analyze(input) => {
            let name = input.name();
            let report = analyze_institution(&name, &input.nodes, &input.edges, &cfg, out)?;
            for s in &report.manifest().stages {
                let detail = s.detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default();
                println!("{:<14} {:?}{detail}", s.stage, s.status);
            }
            println!("wrote {}", out.join(&name).display());
            return Ok(report.succeeded());
        }
        Command::Batch { input } => {
            let report = batch(&input, out, &cfg)?;
            for e in &report.summary.institutions {
                match &e.error {
                    None => println!("{:<24} ok", e.institution),
                    Some(err) => println!("{:<24} FAILED: {err}", e.institution),
                }
            }
            println!("wrote {}", out.display());
            return Ok(report.succeeded());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
