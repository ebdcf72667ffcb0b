use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("empty batch: {0}")]
    EmptyBatch(&'static str),

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("format error in {path}{}: {message}", location(*.offset, *.line))]
    Format {
        path: PathBuf,
        offset: Option<u64>,
        line: Option<usize>,
        message: String,
    },

    #[error("count mismatch: {images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error(
        "exact partition function infeasible for n_v={n_visible}, n_h={n_hidden} \
         (smaller layer must have at most {limit} units); use the ais estimator instead"
    )]
    InfeasibleSize {
        n_visible: usize,
        n_hidden: usize,
        limit: usize,
    },

    #[error("invalid annealing schedule: {0}")]
    Schedule(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn location(offset: Option<u64>, line: Option<usize>) -> String {
    match (offset, line) {
        (Some(o), _) => format!(" at byte {o}"),
        (None, Some(l)) => format!(" at line {l}"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn dim(context: &'static str, expected: usize, found: usize) -> Self {
        Error::Dimension {
            context,
            expected,
            found,
        }
    }

    /// Process exit status used by the command-line front end.
    ///
    /// 2 for usage/configuration problems (including missing input files),
    /// 3 for malformed data, 4 for numerically infeasible requests.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Schedule(_) | Error::Json(_) => 2,
            Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => 2,
            Error::Format { .. } | Error::CountMismatch { .. } | Error::Csv(_) | Error::Io { .. } => 3,
            Error::InfeasibleSize { .. } => 4,
            Error::Dimension { .. } | Error::EmptyBatch(_) | Error::Domain(_) => 4,
        }
    }
}
