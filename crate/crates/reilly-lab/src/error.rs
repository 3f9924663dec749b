use thiserror::Error;

/// Typed failures shared by every module of the crate.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("argument error: {0}")]
    Argument(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("degenerate normal: {0}")]
    DegenerateNormal(String),
    #[error("singular chart: {0}")]
    SingularChart(String),
    #[error("invalid immersion: {0}")]
    InvalidImmersion(String),
    #[error("topology error: {0}")]
    Topology(String),
    #[error("ellipticity violation: {0}")]
    Ellipticity(String),
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    #[error("pole proximity: {0}")]
    PoleProximity(String),
    #[error("constraint violation: {0}")]
    Constraint(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::Argument(msg.into()))
}
