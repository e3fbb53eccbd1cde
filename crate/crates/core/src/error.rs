use std::path::PathBuf;

/// Errors produced anywhere in the analysis pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}:{line}: edge references unknown node id `{id}`")]
    UnknownNode { path: PathBuf, line: usize, id: String },

    #[error("{path}:{line}: duplicate node id `{id}`")]
    DuplicateNode { path: PathBuf, line: usize, id: String },

    #[error("{path}:{line}: duplicate edge {a} -- {b}")]
    DuplicateEdge {
        path: PathBuf,
        line: usize,
        a: String,
        b: String,
    },

    #[error("{path}:{line}: self-loop on node `{id}`")]
    SelfLoop { path: PathBuf, line: usize, id: String },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("assortativity undefined: only one category carries edges")]
    UndefinedAssortativity,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate variance: sigma_w^2 = {0:e}")]
    DegenerateVariance(f64),

    #[error("all four z-scores are non-positive after clamping")]
    DegenerateQuad,

    #[error("complete separation on covariate `{0}`; the likelihood has no finite maximum")]
    Separation(String),

    #[error("covariate `{0}` is not identifiable")]
    NotIdentifiable(String),

    #[error("expected {expected} items, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("{0}")]
    Config(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
