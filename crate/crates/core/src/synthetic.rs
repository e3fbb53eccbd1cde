//! Random attributed networks for tests, benchmarks and recovery studies.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dyad::Covariate;
use crate::error::Result;
use crate::graph::{Attribute, Network, NodeAttributes};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdos-Renyi `G(n, p)` without attributes.
pub fn gnp<R: Rng>(n: usize, p: f64, rng: &mut R) -> Network {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Network::from_edges(n, &edges).expect("simple graph")
}

/// Number of categories per attribute, zero meaning "always Missing".
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Categories {
    pub status: u32,
    pub gender: u32,
    pub major: u32,
    pub residence: u32,
    pub year: u32,
    pub high_school: u32,
    /// Probability that any single attribute value is Missing.
    pub missing: f64,
}

impl Default for Categories {
    fn default() -> Self {
        Categories {
            status: 3,
            gender: 2,
            major: 20,
            residence: 8,
            year: 5,
            high_school: 60,
            missing: 0.05,
        }
    }
}

impl Categories {
    fn count(&self, attribute: Attribute) -> u32 {
        match attribute {
            Attribute::Status => self.status,
            Attribute::Gender => self.gender,
            Attribute::Major => self.major,
            Attribute::Residence => self.residence,
            Attribute::Year => self.year,
            Attribute::HighSchool => self.high_school,
        }
    }
}

/// Independent uniform codes in `1..=k`, Missing with the configured rate.
pub fn random_attributes<R: Rng>(n: usize, categories: &Categories, rng: &mut R) -> Vec<NodeAttributes> {
    (0..n)
        .map(|_| {
            let mut a = NodeAttributes::default();
            for attr in Attribute::ALL {
                let k = categories.count(attr);
                let code = if k == 0 || rng.random::<f64>() < categories.missing {
                    0
                } else {
                    rng.random_range(1..=k)
                };
                a.set(attr, code);
            }
            a
        })
        .collect()
}

/// Samples every dyad independently from the nodematch logistic model with
/// coefficients `(edges, year, residence, high_school, major)`.
pub fn dyad_model<R: Rng>(attributes: Vec<NodeAttributes>, theta: [f64; 5], rng: &mut R) -> Result<Network> {
    let n = attributes.len();
    let matches = |a: &NodeAttributes, b: &NodeAttributes, c: Covariate| {
        let attr = match c {
            Covariate::Year => Attribute::Year,
            Covariate::Residence => Attribute::Residence,
            Covariate::HighSchool => Attribute::HighSchool,
            _ => Attribute::Major,
        };
        let (x, y) = (a.get(attr), b.get(attr));
        x != 0 && x == y
    };
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut eta = theta[0];
            for (k, c) in Covariate::MATCHES.iter().enumerate() {
                if matches(&attributes[i], &attributes[j], *c) {
                    eta += theta[k + 1];
                }
            }
            if rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp()) {
                edges.push((i, j));
            }
        }
    }
    Network::new(attributes, None, edges)
}

/// Planted partition: `groups` blocks of `size` nodes, edge probability
/// `p_in` inside a block and `p_out` across. The block index (plus one) is
/// written to `aligned`; other attributes are random.
pub fn planted_partition<R: Rng>(
    groups: usize,
    size: usize,
    p_in: f64,
    p_out: f64,
    aligned: Attribute,
    rng: &mut R,
) -> Network {
    let n = groups * size;
    let mut attrs = random_attributes(n, &Categories::default(), rng);
    for (v, a) in attrs.iter_mut().enumerate() {
        a.set(aligned, (v / size) as u32 + 1);
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if i / size == j / size { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Network::new(attrs, None, edges).expect("simple graph")
}

/// Same edges, with one attribute's values permuted across nodes.
pub fn shuffle_attribute<R: Rng>(network: &Network, attribute: Attribute, rng: &mut R) -> Network {
    let mut values: Vec<u32> = (0..network.node_count()).map(|v| network.attribute(v, attribute)).collect();
    values.shuffle(rng);
    let mut attrs = network.all_attributes().to_vec();
    for (a, v) in attrs.iter_mut().zip(values) {
        a.set(attribute, v);
    }
    Network::new(attrs, Some(network.labels().to_vec()), network.edges().iter().copied()).expect("same edges")
}

/// A small campus: residence-driven blocks, year homophily, roughly 80%
/// students and both genders. Deterministic in `seed`.
pub fn toy_institution(n: usize, seed: u64) -> Network {
    let mut rng = rng(seed);
    let categories = Categories {
        residence: 4,
        year: 4,
        major: 6,
        high_school: 12,
        ..Default::default()
    };
    let mut attrs = random_attributes(n, &categories, &mut rng);
    for a in attrs.iter_mut() {
        a.status = if rng.random::<f64>() < 0.8 { 1 } else { 2 };
        a.gender = rng.random_range(1..=2);
    }
    let network = dyad_model(attrs, [-3.2, 0.8, 2.2, 1.0, 0.6], &mut rng).expect("simple graph");
    let labels: Vec<String> = (0..n).map(|v| format!("{}", 1000 + v)).collect();
    Network::new(network.all_attributes().to_vec(), Some(labels), network.edges().iter().copied()).expect("relabel")
}
