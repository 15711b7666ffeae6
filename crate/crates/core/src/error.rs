//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by the numerical, estimation and I/O layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A Fredholm determinant model index outside `1..=4`.
    #[error("invalid model index {0}; expected 1, 2, 3 or 4")]
    InvalidModel(usize),

    /// An m.g.f. was evaluated where its bracket is not positive.
    #[error("m.g.f. bracket is not positive ({value}) at u={u}, v={v}, c={c}")]
    Domain { u: f64, v: f64, c: f64, value: f64 },

    /// A quadrature did not reach its tolerance within the iteration cap.
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    /// A per-unit regression has a singular design or zero residual variance.
    #[error("degenerate regression for unit {unit}: {reason}")]
    DegenerateRegression { unit: usize, reason: String },

    /// The requested test variant is not covered by the operation.
    #[error("variant {0} is not supported by this operation")]
    UnsupportedVariant(String),

    /// A Monte Carlo run was requested with zero replications.
    #[error("empty run: at least one replication is required")]
    EmptyRun,

    /// Malformed panel CSV content.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A unit is missing one of the time stamps shared by the panel.
    #[error("ragged panel: unit '{unit}' has no observation at time {time}")]
    RaggedPanel { unit: String, time: u64 },

    /// The same (unit, time) cell appears twice.
    #[error("duplicate cell: unit '{unit}', time {time} (line {line})")]
    DuplicateCell { unit: String, time: u64, line: usize },

    /// Any other invalid argument.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// File system failure.
    #[error("i/o error: {0}")]
    Io(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
