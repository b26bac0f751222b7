use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("domain has no active cells")]
    EmptyDomain,
    #[error("lattice too coarse: {0}")]
    TooCoarse(String),
    #[error("node lies on the lattice box boundary")]
    NodeOnBoundary,
    #[error("lattice sets live on different grids")]
    GridMismatch,
    #[error("compact set must be surrounded by at least one layer of envelope cells")]
    NotCompactlyContained,
    #[error("region has no cells")]
    EmptyRegion,
    #[error("ball does not fit inside the lattice box")]
    BallOutsideBox,
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("linear system is singular")]
    Singular,
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("missing reference value `{0}`")]
    MissingReference(&'static str),
    #[error("mask file, line {line}: {message}")]
    Mask { line: usize, message: String },
    #[error("argument out of domain: {0}")]
    OutOfDomain(String),
}

pub type Result<T> = core::result::Result<T, Error>;
