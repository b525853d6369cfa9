use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate hull: {0}")]
    DegenerateHull(String),

    #[error("orientation undefined: sin(2phi) and cos(2phi) are both zero")]
    OrientationUndefined,

    #[error("degenerate quantiles: sin and cos quantiles are both zero")]
    DegenerateQuantiles,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("length error: {0}")]
    Length(String),

    #[error("training diverged: {0}")]
    TrainingDiverged(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
