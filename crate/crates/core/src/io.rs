//! Node-table and edge-list ingestion.
//!
//! Node table: tab-separated with the header
//! `id status gender major residence year high_school`, one row per node and
//! integer codes with `0` for Missing. Comment lines start with `#`; before
//! the header they may carry view-code directives such as `# student=1`,
//! `# female=1` or `# male=2`.
//!
//! Edge list: one `id1<TAB>id2` per line, undirected, each pair at most once.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Attribute, Network, NodeAttributes, ViewCodes};

pub const NODE_HEADER: [&str; 7] = [
    "id",
    "status",
    "gender",
    "major",
    "residence",
    "year",
    "high_school",
];

/// Parsed node table: labels, attribute rows and any view-code directives.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeTable {
    pub labels: Vec<String>,
    pub attributes: Vec<NodeAttributes>,
    pub codes: ViewCodes,
}

fn parse_directive(body: &str, codes: &mut ViewCodes, path: &Path, line: usize) -> Result<()> {
    let Some((key, value)) = body.split_once('=') else {
        return Ok(());
    };
    let key = key.trim();
    let slot = match key {
        "student" => &mut codes.student,
        "female" => &mut codes.female,
        "male" => &mut codes.male,
        _ => return Ok(()),
    };
    *slot = value.trim().parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("directive `{key}` needs a non-negative integer code"),
    })?;
    Ok(())
}

pub fn parse_node_table(reader: impl BufRead, path: &Path) -> Result<NodeTable> {
    let mut codes = ViewCodes::default();
    let mut labels = Vec::new();
    let mut attributes = Vec::new();
    let mut seen = HashSet::new();
    let mut header_seen = false;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path.display().to_string(), e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(body) = line.strip_prefix('#') {
            if !header_seen {
                parse_directive(body, &mut codes, path, lineno)?;
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if !header_seen {
            if fields != NODE_HEADER {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno,
                    message: format!("expected header `{}`", NODE_HEADER.join("\\t")),
                });
            }
            header_seen = true;
            continue;
        }
        if fields.len() != NODE_HEADER.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno,
                message: format!("expected {} fields, found {}", NODE_HEADER.len(), fields.len()),
            });
        }
        let id = fields[0].trim();
        if id.is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno,
                message: "empty node id".into(),
            });
        }
        if !seen.insert(id.to_string()) {
            return Err(Error::DuplicateNode {
                path: path.to_path_buf(),
                line: lineno,
                id: id.to_string(),
            });
        }
        let mut record = NodeAttributes::default();
        for (attribute, raw) in Attribute::ALL.iter().zip(&fields[1..]) {
            let code = raw.trim().parse::<u32>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: lineno,
                message: format!("{attribute}: `{raw}` is not a non-negative integer code"),
            })?;
            record.set(*attribute, code);
        }
        labels.push(id.to_string());
        attributes.push(record);
    }
    if !header_seen {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "missing header".into(),
        });
    }
    Ok(NodeTable {
        labels,
        attributes,
        codes,
    })
}

/// Resolves an edge list against known node labels.
pub fn parse_edge_list(
    reader: impl BufRead,
    path: &Path,
    labels: &[String],
) -> Result<Vec<(usize, usize)>> {
    let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path.display().to_string(), e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno,
                message: format!("expected 2 node ids, found {}", fields.len()),
            });
        }
        let lookup = |id: &str| {
            index.get(id).copied().ok_or_else(|| Error::UnknownNode {
                path: path.to_path_buf(),
                line: lineno,
                id: id.to_string(),
            })
        };
        let (a, b) = (lookup(fields[0])?, lookup(fields[1])?);
        if a == b {
            return Err(Error::SelfLoop {
                path: path.to_path_buf(),
                line: lineno,
                id: fields[0].to_string(),
            });
        }
        if !seen.insert((a.min(b), a.max(b))) {
            return Err(Error::DuplicateEdge {
                path: path.to_path_buf(),
                line: lineno,
                a: fields[0].to_string(),
                b: fields[1].to_string(),
            });
        }
        edges.push((a, b));
    }
    Ok(edges)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(format!("cannot open {}", path.display()), e))
}

/// Loads a network together with the view codes declared in the node table.
pub fn load_network_with_codes(nodes: &Path, edges: &Path) -> Result<(Network, ViewCodes)> {
    let table = parse_node_table(open(nodes)?, nodes)?;
    let edge_list = parse_edge_list(open(edges)?, edges, &table.labels)?;
    let network = Network::new(table.attributes, Some(table.labels), edge_list)?;
    Ok((network, table.codes))
}

pub fn load_network(nodes: &Path, edges: &Path) -> Result<Network> {
    load_network_with_codes(nodes, edges).map(|(net, _)| net)
}

/// Writes the canonical node table (with view-code directives) and edge list.
pub fn write_network(network: &Network, codes: ViewCodes, nodes: &Path, edges: &Path) -> Result<()> {
    let create = |p: &Path| {
        File::create(p)
            .map(BufWriter::new)
            .map_err(|e| Error::io(format!("cannot create {}", p.display()), e))
    };

    let mut out = create(nodes)?;
    (|| -> std::io::Result<()> {
        writeln!(out, "# student={}", codes.student)?;
        writeln!(out, "# female={}", codes.female)?;
        writeln!(out, "# male={}", codes.male)?;
        writeln!(out, "{}", NODE_HEADER.join("\t"))?;
        for v in 0..network.node_count() {
            let a = network.attributes(v);
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                network.label(v),
                a.status,
                a.gender,
                a.major,
                a.residence,
                a.year,
                a.high_school
            )?;
        }
        out.flush()
    })()
    .map_err(|e| Error::io(format!("writing {}", nodes.display()), e))?;

    let mut out = create(edges)?;
    (|| -> std::io::Result<()> {
        for &(a, b) in network.edges() {
            writeln!(out, "{}\t{}", network.label(a), network.label(b))?;
        }
        out.flush()
    })()
    .map_err(|e| Error::io(format!("writing {}", edges.display()), e))
}
