//! Attributed undirected networks and the four canonical views.
//!
//! A [`Network`] is a simple undirected graph on densified node indices
//! `0..n` together with six categorical attributes per node. Code `0` means
//! Missing in every attribute. Views are largest connected components of
//! attribute-selected induced subgraphs.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Attribute code reserved for "not volunteered".
pub const MISSING: u32 = 0;

/// One of the six categorical node fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribute {
    Status,
    Gender,
    Major,
    Residence,
    Year,
    HighSchool,
}

impl Attribute {
    pub const ALL: [Attribute; 6] = [
        Attribute::Status,
        Attribute::Gender,
        Attribute::Major,
        Attribute::Residence,
        Attribute::Year,
        Attribute::HighSchool,
    ];

    /// The four attributes compared against detected communities, in the
    /// order used by the tetrahedral coordinates.
    pub const COMMUNITY: [Attribute; 4] = [
        Attribute::Major,
        Attribute::Residence,
        Attribute::Year,
        Attribute::HighSchool,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Attribute::Status => "status",
            Attribute::Gender => "gender",
            Attribute::Major => "major",
            Attribute::Residence => "residence",
            Attribute::Year => "year",
            Attribute::HighSchool => "high_school",
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Attribute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "status" => Ok(Attribute::Status),
            "gender" => Ok(Attribute::Gender),
            "major" => Ok(Attribute::Major),
            "residence" | "dorm" => Ok(Attribute::Residence),
            "year" => Ok(Attribute::Year),
            "high_school" | "highschool" | "hs" => Ok(Attribute::HighSchool),
            other => Err(Error::Config(format!("unknown attribute `{other}`"))),
        }
    }
}

/// The six categorical codes of a node.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodeAttributes {
    pub status: u32,
    pub gender: u32,
    pub major: u32,
    pub residence: u32,
    pub year: u32,
    pub high_school: u32,
}

impl NodeAttributes {
    pub fn get(&self, attribute: Attribute) -> u32 {
        match attribute {
            Attribute::Status => self.status,
            Attribute::Gender => self.gender,
            Attribute::Major => self.major,
            Attribute::Residence => self.residence,
            Attribute::Year => self.year,
            Attribute::HighSchool => self.high_school,
        }
    }

    pub fn set(&mut self, attribute: Attribute, code: u32) {
        match attribute {
            Attribute::Status => self.status = code,
            Attribute::Gender => self.gender = code,
            Attribute::Major => self.major = code,
            Attribute::Residence => self.residence = code,
            Attribute::Year => self.year = code,
            Attribute::HighSchool => self.high_school = code,
        }
    }
}

#[inline]
fn pair_key(a: usize, b: usize) -> u64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    ((lo as u64) << 32) | hi as u64
}

/// Undirected simple graph with per-node attributes.
///
/// Neighbor lists are sorted, and an edge hash set gives O(1) amortized
/// adjacency tests.
#[derive(Clone, Debug)]
pub struct Network {
    adjacency: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    edge_set: HashSet<u64>,
    attributes: Vec<NodeAttributes>,
    labels: Vec<String>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.edges == other.edges
            && self.attributes == other.attributes
            && self.labels == other.labels
    }
}

impl Network {
    /// Builds a network, rejecting self-loops, duplicate edges and
    /// out-of-range endpoints. `labels` defaults to the decimal index.
    pub fn new(
        attributes: Vec<NodeAttributes>,
        labels: Option<Vec<String>>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let n = attributes.len();
        if n > u32::MAX as usize {
            return Err(Error::InvalidNetwork(format!("{n} nodes exceeds the supported maximum")));
        }
        let labels = match labels {
            Some(labels) if labels.len() != n => {
                return Err(Error::InvalidNetwork(format!(
                    "{} labels for {n} nodes",
                    labels.len()
                )))
            }
            Some(labels) => labels,
            None => (0..n).map(|i| i.to_string()).collect(),
        };
        let mut adjacency = vec![Vec::new(); n];
        let mut edge_list = Vec::new();
        let mut edge_set = HashSet::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidNetwork(format!(
                    "edge ({a}, {b}) out of range for {n} nodes"
                )));
            }
            if a == b {
                return Err(Error::InvalidNetwork(format!("self-loop on node {a}")));
            }
            if !edge_set.insert(pair_key(a, b)) {
                return Err(Error::InvalidNetwork(format!("duplicate edge ({a}, {b})")));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
            edge_list.push((a.min(b), a.max(b)));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        edge_list.sort_unstable();
        Ok(Network {
            adjacency,
            edges: edge_list,
            edge_set,
            attributes,
            labels,
        })
    }

    /// Convenience constructor with every attribute Missing.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Network::new(vec![NodeAttributes::default(); n], None, edges.iter().copied())
    }

    pub fn empty() -> Self {
        Network {
            adjacency: Vec::new(),
            edges: Vec::new(),
            edge_set: HashSet::new(),
            attributes: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    /// Edges as `(lo, hi)` pairs in lexicographic order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a != b && self.edge_set.contains(&pair_key(a, b))
    }

    pub fn attributes(&self, node: usize) -> &NodeAttributes {
        &self.attributes[node]
    }

    pub fn all_attributes(&self) -> &[NodeAttributes] {
        &self.attributes
    }

    pub fn attribute(&self, node: usize, attribute: Attribute) -> u32 {
        self.attributes[node].get(attribute)
    }

    pub fn label(&self, node: usize) -> &str {
        &self.labels[node]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Number of common neighbors of `a` and `b`, scanning the shorter list.
    pub fn common_neighbors(&self, a: usize, b: usize) -> usize {
        let (short, long) = if self.degree(a) <= self.degree(b) { (a, b) } else { (b, a) };
        self.adjacency[short]
            .iter()
            .filter(|&&k| self.has_edge(k, long))
            .count()
    }

    /// Induced subgraph on `nodes` (ascending, distinct). Node `i` of the
    /// result corresponds to `nodes[i]`.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Network {
        debug_assert!(nodes.windows(2).all(|w| w[0] < w[1]));
        let mut local = vec![usize::MAX; self.node_count()];
        for (i, &v) in nodes.iter().enumerate() {
            local[v] = i;
        }
        let edges = self.edges.iter().filter_map(|&(a, b)| {
            let (la, lb) = (local[a], local[b]);
            (la != usize::MAX && lb != usize::MAX).then_some((la, lb))
        });
        let attributes = nodes.iter().map(|&v| self.attributes[v]).collect();
        let labels = nodes.iter().map(|&v| self.labels[v].clone()).collect();
        Network::new(attributes, Some(labels), edges).expect("induced subgraph of a valid network")
    }

    /// Connected component label per node; components are numbered in order
    /// of their smallest member.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let n = self.node_count();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = count;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &u in &self.adjacency[v] {
                    if label[u] == usize::MAX {
                        label[u] = count;
                        stack.push(u);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    pub fn is_connected(&self) -> bool {
        self.node_count() > 0 && self.components().1 == 1
    }
}

/// The four network subsets analysed per institution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViewKind {
    Full,
    Student,
    Female,
    Male,
}

impl ViewKind {
    pub const ALL: [ViewKind; 4] = [ViewKind::Full, ViewKind::Student, ViewKind::Female, ViewKind::Male];

    pub fn name(self) -> &'static str {
        match self {
            ViewKind::Full => "full",
            ViewKind::Student => "student",
            ViewKind::Female => "female",
            ViewKind::Male => "male",
        }
    }
}

impl fmt::Display for ViewKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ViewKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(ViewKind::Full),
            "student" => Ok(ViewKind::Student),
            "female" => Ok(ViewKind::Female),
            "male" => Ok(ViewKind::Male),
            other => Err(Error::Config(format!("unknown view `{other}`"))),
        }
    }
}

/// A connected subset of a loaded network.
///
/// `index_map[i]` is the index, in the originally loaded network, of view
/// node `i`. Views derived from other views still map to the loaded network.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkView {
    pub kind: ViewKind,
    pub network: Network,
    pub index_map: Vec<usize>,
}

impl NetworkView {
    pub fn empty(kind: ViewKind) -> Self {
        NetworkView {
            kind,
            network: Network::empty(),
            index_map: Vec::new(),
        }
    }

    /// Wraps a whole network as a view with the identity index map.
    pub fn whole(kind: ViewKind, network: Network) -> Self {
        let index_map = (0..network.node_count()).collect();
        NetworkView { kind, network, index_map }
    }

    pub fn is_empty(&self) -> bool {
        self.network.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.network.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.network.edge_count()
    }
}

/// Induced subgraph on the largest connected component.
///
/// Ties between equally large components go to the one containing the
/// smallest node index.
pub fn largest_connected_component(network: &Network) -> Result<NetworkView> {
    if network.is_empty() {
        return Err(Error::EmptyInput("largest connected component of an empty network"));
    }
    let (label, count) = network.components();
    let mut sizes = vec![0usize; count];
    for &c in &label {
        sizes[c] += 1;
    }
    // Components are numbered by smallest member, so the first maximum wins ties.
    let mut best = 0;
    for c in 1..count {
        if sizes[c] > sizes[best] {
            best = c;
        }
    }
    let nodes: Vec<usize> = (0..network.node_count()).filter(|&v| label[v] == best).collect();
    Ok(NetworkView {
        kind: ViewKind::Full,
        network: network.induced_subgraph(&nodes),
        index_map: nodes,
    })
}

/// Codes that select the Student, Female and Male views.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewCodes {
    pub student: u32,
    pub female: u32,
    pub male: u32,
}

impl Default for ViewCodes {
    fn default() -> Self {
        ViewCodes {
            student: 1,
            female: 1,
            male: 2,
        }
    }
}

/// The four views of one institution, in [`ViewKind::ALL`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct Views {
    pub full: NetworkView,
    pub student: NetworkView,
    pub female: NetworkView,
    pub male: NetworkView,
}

impl Views {
    pub fn get(&self, kind: ViewKind) -> &NetworkView {
        match kind {
            ViewKind::Full => &self.full,
            ViewKind::Student => &self.student,
            ViewKind::Female => &self.female,
            ViewKind::Male => &self.male,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &NetworkView> {
        [&self.full, &self.student, &self.female, &self.male].into_iter()
    }
}

/// LCC of the subgraph of `parent` induced by `keep`, re-based onto the
/// loaded network through `parent_map`. Selections whose largest component
/// has no edge come back empty.
fn selected_view(
    kind: ViewKind,
    parent: &Network,
    parent_map: &[usize],
    keep: impl Fn(&NodeAttributes) -> bool,
) -> NetworkView {
    let nodes: Vec<usize> = (0..parent.node_count())
        .filter(|&v| keep(parent.attributes(v)))
        .collect();
    if nodes.is_empty() {
        return NetworkView::empty(kind);
    }
    let sub = parent.induced_subgraph(&nodes);
    if sub.edge_count() == 0 {
        return NetworkView::empty(kind);
    }
    let lcc = largest_connected_component(&sub).expect("non-empty selection");
    NetworkView {
        kind,
        network: lcc.network,
        index_map: lcc.index_map.iter().map(|&i| parent_map[nodes[i]]).collect(),
    }
}

/// Full, Student, Female and Male views.
///
/// Student is drawn from the loaded network; Female and Male are drawn from
/// the Full view. Nodes with Missing gender fall in neither gender view.
pub fn extract_views(network: &Network, codes: ViewCodes) -> Views {
    let identity: Vec<usize> = (0..network.node_count()).collect();
    let full = selected_view(ViewKind::Full, network, &identity, |_| true);
    let student = selected_view(ViewKind::Student, network, &identity, |a| {
        a.status != MISSING && a.status == codes.student
    });
    let female = selected_view(ViewKind::Female, &full.network, &full.index_map, |a| {
        a.gender != MISSING && a.gender == codes.female
    });
    let male = selected_view(ViewKind::Male, &full.network, &full.index_map, |a| {
        a.gender != MISSING && a.gender == codes.male
    });
    Views {
        full,
        student,
        female,
        male,
    }
}
