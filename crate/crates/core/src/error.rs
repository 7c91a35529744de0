use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("quadrature did not reach relative tolerance {tolerance:e} with {nodes} nodes")]
    QuadratureFailure { nodes: usize, tolerance: f64 },

    #[error("linear transform is singular (|det| = {det:e})")]
    SingularTransform { det: f64 },

    #[error("invalid jump model: {0}")]
    InvalidModel(String),

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("no root of I(c) = {target} below c = {cap}")]
    RangeExceeded { target: f64, cap: f64 },

    #[error("asymptotic predictions require x > 1, got {x}")]
    DomainError { x: f64 },

    #[error("invalid offspring law: {0}")]
    InvalidLaw(String),

    #[error("invalid configuration: {0}")]
    ConfigError(String),

    #[error("all {attempts} attempts went extinct")]
    SurvivalConditioningFailed { attempts: u32 },

    #[error("population exceeded the hard cap of {cap} particles at generation {generation}")]
    PopulationOverflow { cap: usize, generation: u64 },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("design matrix is singular (condition number {condition:e})")]
    SingularDesign { condition: f64 },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("invalid experiment plan:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag used in error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::QuadratureFailure { .. } => "QuadratureFailure",
            Error::SingularTransform { .. } => "SingularTransform",
            Error::InvalidModel(_) => "InvalidModel",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::RangeExceeded { .. } => "RangeExceeded",
            Error::DomainError { .. } => "DomainError",
            Error::InvalidLaw(_) => "InvalidLaw",
            Error::ConfigError(_) => "ConfigError",
            Error::SurvivalConditioningFailed { .. } => "SurvivalConditioningFailed",
            Error::PopulationOverflow { .. } => "PopulationOverflow",
            Error::InsufficientSamples { .. } => "InsufficientSamples",
            Error::SingularDesign { .. } => "SingularDesign",
            Error::Parse { .. } => "ParseError",
            Error::Validation(_) => "ValidationError",
            Error::Io(_) => "Io",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
        }
    }
}
