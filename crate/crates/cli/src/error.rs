//! Exit-coded error classes. Every failure prints one machine-parsable line
//! `error[<Code>]: <message>` and exits with the class's code.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}:{row}: {detail}")]
    Parse {
        path: String,
        row: usize,
        detail: String,
    },
    #[error("{path}: row {row}, column '{column}': cell '{cell}' is not numeric")]
    NonNumericCell {
        path: String,
        row: usize,
        column: String,
        cell: String,
    },
    #[error("duplicate row identifier {id}")]
    DuplicateIds { id: u64 },
    #[error("a response column is required: {0}")]
    MissingResponse(String),
    #[error("{0}")]
    ShapeMismatch(String),
    #[error("{0}")]
    SingularGram(String),
    #[error("{0}")]
    DegenerateUpdate(String),
    #[error("{0}")]
    DriftExceeded(String),
    #[error("{0}")]
    InitFailed(String),
    #[error("{0}")]
    InsufficientDof(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn code_name(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::Parse { .. } => "ParseError",
            CliError::NonNumericCell { .. } => "NonNumericCell",
            CliError::DuplicateIds { .. } => "DuplicateIds",
            CliError::MissingResponse(_) => "MissingResponse",
            CliError::ShapeMismatch(_) => "ShapeMismatch",
            CliError::SingularGram(_) => "SingularGram",
            CliError::DegenerateUpdate(_) => "DegenerateUpdate",
            CliError::DriftExceeded(_) => "DriftExceeded",
            CliError::InitFailed(_) => "InitFailed",
            CliError::InsufficientDof(_) => "InsufficientDoF",
            CliError::Io { .. } => "Io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Parse { .. } => 3,
            CliError::NonNumericCell { .. } => 4,
            CliError::DuplicateIds { .. } => 5,
            CliError::MissingResponse(_) => 6,
            CliError::ShapeMismatch(_) => 7,
            CliError::SingularGram(_) => 8,
            CliError::DegenerateUpdate(_) => 9,
            CliError::DriftExceeded(_) => 10,
            CliError::InitFailed(_) => 11,
            CliError::InsufficientDof(_) => 12,
            CliError::Io { .. } => 13,
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

impl From<odsample::Error> for CliError {
    fn from(e: odsample::Error) -> Self {
        use odsample::Error as E;
        match e {
            E::Config(m) => CliError::Config(m),
            E::MissingResponse => CliError::MissingResponse(e.to_string()),
            E::ShapeMismatch(m) => CliError::ShapeMismatch(m),
            E::SingularGram { .. } => CliError::SingularGram(e.to_string()),
            E::DegenerateRemoval { .. } | E::DegenerateSwap { .. } | E::DegenerateLeverage { .. } => {
                CliError::DegenerateUpdate(e.to_string())
            }
            E::DriftExceeded { .. } => CliError::DriftExceeded(e.to_string()),
            E::InitFailed { .. } => CliError::InitFailed(e.to_string()),
            E::InsufficientDof { .. } => CliError::InsufficientDof(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
