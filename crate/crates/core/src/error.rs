use std::path::PathBuf;

use thiserror::Error;

use crate::optimizer::Infeasibility;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the formula is defined.
    #[error("{what}: {reason}")]
    Domain { what: &'static str, reason: String },

    #[error("invalid configuration value for `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// The information surplus over the data-rate floor is not positive, so
    /// the plant cannot be held at any finite LQR cost.
    #[error("stabilization infeasible: information surplus {omega} bits is not positive")]
    StabilizationInfeasible { omega: f64 },

    #[error("Riccati iteration did not converge in {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("numerical failure: {0}")]
    Numeric(&'static str),

    #[error("resource allocation infeasible: {0}")]
    Infeasible(Infeasibility),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {reason}")]
    Output { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn domain(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            what,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
