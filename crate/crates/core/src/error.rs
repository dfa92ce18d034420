use thiserror::Error;

use crate::types::PsdKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value violated a type or operation precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The small-r approximation of the geometry factor does not hold here.
    #[error("r = {r:e} m lies outside the validity regime (r_valid_max = {r_valid_max:e} m)")]
    Regime { r: f64, r_valid_max: f64 },

    #[error("conversion {from} -> {to} needs `{field}` in the conversion context")]
    MissingContext {
        from: PsdKind,
        to: PsdKind,
        field: &'static str,
    },

    #[error("no conversion path from {from} to {to}")]
    NoConversionPath { from: PsdKind, to: PsdKind },

    #[error("requested {requested:e} Hz is outside the covered band [{lo:e}, {hi:e}] Hz")]
    Coverage { requested: f64, lo: f64, hi: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}:{line}:{column}: {message}")]
    Config {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Format { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Stable short name used in machine-readable error output.
    pub fn kind_name(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::Regime { .. } => "regime",
            Error::MissingContext { .. } => "missing_context",
            Error::NoConversionPath { .. } => "no_conversion_path",
            Error::Coverage { .. } => "coverage",
            Error::Numerical(_) => "numerical",
            Error::Config { .. } => "config",
            Error::Format { .. } => "format",
            Error::Io(_) => "io",
        }
    }

    /// Numerical failures exit with 3, everything else is a validation error (2).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) => 3,
            _ => 2,
        }
    }
}
