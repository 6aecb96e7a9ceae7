use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },

    #[error("{path}:{line}: unknown {kind} id `{id}`")]
    UnknownReference {
        path: String,
        line: usize,
        kind: &'static str,
        id: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("vocabulary is empty after document-frequency filtering")]
    EmptyVocabulary,

    #[error("topic count {k} exceeds vocabulary size {vocab}")]
    TooManyTopics { k: usize, vocab: usize },

    #[error("coordinate descent did not converge after {sweeps} sweeps (objective {objective})")]
    NotConverged { sweeps: usize, objective: f64 },

    #[error("correlation undefined: zero variance in input")]
    UndefinedCorrelation,

    #[error("tree {tree} lacks valid cover counts")]
    MissingCover { tree: usize },

    #[error("brute-force Shapley refused: {p} features exceeds the limit of {max}")]
    TooManyFeatures { p: usize, max: usize },

    #[error("experiment {0} needs a resolved best-of base experiment")]
    UnresolvedBase(String),

    #[error("feature groups are not a partition: {0}")]
    NotAPartition(String),

    #[error("user `{0}` has no retained songs")]
    EmptyUser(String),

    #[error("archive format error: {0}")]
    Archive(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
