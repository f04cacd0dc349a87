use thiserror::Error;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: configuration, unit names, data files.
    Usage,
    /// The numerics failed on otherwise valid input.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {field}: requires {requirement} (got {value})")]
    Invariant {
        field: String,
        requirement: &'static str,
        value: String,
    },

    #[error("unsupported unit conversion {from} -> {to}")]
    UnitPair { from: String, to: String },

    #[error("unknown unit `{0}`")]
    UnknownUnit(String),

    #[error("{0}")]
    Usage(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(
        "time step fell below dt_min at t = {time:e} s (stiffest cell {cell}, local curvature {curvature:e} m/F)"
    )]
    Stiff {
        time: f64,
        cell: usize,
        curvature: f64,
    },

    #[error("step limit of {steps} reached at t = {time:e} s")]
    StepLimit { steps: usize, time: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Stiff { .. } | Error::StepLimit { .. } | Error::Fit(_) => ErrorKind::Numerical,
            _ => ErrorKind::Usage,
        }
    }

    pub(crate) fn invariant(
        field: impl Into<String>,
        requirement: &'static str,
        value: impl std::fmt::Display,
    ) -> Self {
        Error::Invariant {
            field: field.into(),
            requirement,
            value: value.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
