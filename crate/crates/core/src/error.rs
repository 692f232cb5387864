use std::path::PathBuf;

use thiserror::Error;

/// One field-level validation failure.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for FieldError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid configuration: {}", join_fields(.0))]
    InvalidConfig(Vec<FieldError>),

    #[error("missing configuration key `{0}`")]
    MissingKey(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("corpus-integrity error: {malformed} of {total} lines malformed (first at line {first_line})")]
    CorpusIntegrity {
        malformed: usize,
        total: usize,
        first_line: usize,
        lines: Vec<usize>,
    },

    #[error("window error for group `{group}`: {message}")]
    Window { group: String, message: String },

    #[error("insufficient population: need at least {needed} agents, got {got}")]
    InsufficientPopulation { needed: usize, got: usize },

    #[error("alignment error: {message}")]
    Alignment {
        message: String,
        /// Best partial clusters as (groups covered, representative text prefix).
        diagnostics: Vec<String>,
    },

    #[error("pipeline error: {0}")]
    Pipeline(String),

    #[error("convergence study error: {0}")]
    Study(String),

    #[error("map generation error: {0}")]
    Mapgen(String),

    #[error("synthetic spec error: {0}")]
    Spec(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("serialization error: {0}")]
    Serialization(String),
}

fn join_fields(fields: &[FieldError]) -> String {
    fields.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error stems from how the tool was invoked or configured
    /// rather than from the data being analyzed.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Usage(_) | Error::MissingKey(_) | Error::InvalidConfig(_) | Error::Config(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
