use thiserror::Error;

pub type Result<T> = std::result::Result<T, HociError>;

/// Every failure the library can report. Each variant maps to a stable
/// machine-readable code via [`HociError::code`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HociError {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("enumeration of {states} states exceeds the capacity of {limit}")]
    Capacity { states: u128, limit: u128 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("no common information: {0}")]
    NoCommonInformation(String),

    #[error("convergence failure after {iterations} iterations: {reason}")]
    Convergence { iterations: usize, reason: String },

    #[error("pipeline failure: {0}")]
    Pipeline(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("ingestion error at {location}: {reason}")]
    Ingestion { location: String, reason: String },

    #[error("i/o error on {path}: {reason}")]
    Io { path: String, reason: String },
}

impl HociError {
    pub fn code(&self) -> &'static str {
        match self {
            HociError::ParameterDomain(_) => "E_PARAM_DOMAIN",
            HociError::Capacity { .. } => "E_CAPACITY",
            HociError::DegenerateInput(_) => "E_DEGENERATE_INPUT",
            HociError::NoCommonInformation(_) => "E_NO_COMMON_INFO",
            HociError::Convergence { .. } => "E_CONVERGENCE",
            HociError::Pipeline(_) => "E_PIPELINE",
            HociError::Configuration(_) => "E_CONFIG",
            HociError::Ingestion { .. } => "E_INGEST",
            HociError::Io { .. } => "E_IO",
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        HociError::ParameterDomain(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        HociError::DegenerateInput(msg.into())
    }
}
