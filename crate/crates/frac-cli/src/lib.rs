//! File formats, the verification harness and the command implementations
//! behind the `frac` binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod commands;
pub mod config;
pub mod corpus;
pub mod report;
pub mod shapes;
pub mod suites;
pub mod sweep;

pub use config::Config;
pub use report::{Check, Relation, Report};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] fraccap::Error),
    #[error("shape: {0}")]
    Shape(String),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(String),
    #[error("report: {0}")]
    Report(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
