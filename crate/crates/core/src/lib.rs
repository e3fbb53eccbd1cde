//! Analysis of attributed friendship networks: network views, categorical
//! assortativity, dyad-level models, modularity-based community detection,
//! Rand z-score comparison against node attributes, and tetrahedral
//! summaries of which attribute organizes the communities.

pub mod assortativity;
pub mod community;
pub mod compare;
pub mod dyad;
pub mod error;
pub mod graph;
pub mod io;
pub mod pipeline;
pub mod synthetic;
pub mod tetra;

pub use assortativity::{assortativity, mixing_matrix, MissingPolicy, MixingMatrix};
pub use community::{detect, detect_all, kl_refine, modularity, Method, ModularityScore, Partition, Provenance};
pub use compare::{
    contingency, rand_coefficient, rand_zscore, score_against_attributes, AttributeScores, ContingencyTable,
    ZScoreQuad,
};
pub use dyad::{build_design, fit_ergm_mple, fit_logistic, Covariate, DyadDesign, DyadModelFit};
pub use error::{Error, Result};
pub use graph::{extract_views, Attribute, Network, NetworkView, NodeAttributes, ViewCodes, ViewKind, Views};
pub use io::{load_network, load_network_with_codes};
pub use pipeline::{analyze_institution, batch, Config, RunManifest};
pub use tetra::{summarize_runs, tetra_point, TetraPoint, TetraSummary};
