use std::path::PathBuf;

/// Errors produced by the indexing, clustering, search and evaluation stages.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("term {0:?} is not in the vocabulary")]
    UnknownTerm(String),

    #[error("invalid cluster count k={k} for {docs} documents")]
    InvalidK { k: usize, docs: usize },

    #[error("cannot select m={m} clusters out of k={k}")]
    InvalidSelection { m: usize, k: usize },

    #[error("no clusters selected")]
    EmptySelection,

    #[error("cluster {0} is empty")]
    EmptyCluster(usize),

    #[error("deme of size {0} is too small for selection")]
    DemeTooSmall(usize),

    #[error("query {0} has no relevant documents")]
    EmptyRelevant(u32),

    #[error("malformed index: {0}")]
    IndexFormat(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_string(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
