use thiserror::Error;

use crate::hartree_fock::ScfIteration;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("basis is linearly dependent (smallest overlap eigenvalue {min_eigenvalue:e})")]
    LinearDependence { min_eigenvalue: f64 },

    #[error("orbitals violate orthonormality: {0}")]
    Orthonormality(String),

    #[error("SCF did not converge in {} iterations", trace.len())]
    NotConverged { trace: Vec<ScfIteration> },

    #[error("quadrature did not reach tolerance {tolerance:e} (error estimate {estimate:e})")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("potential is singular at nucleus {nucleus}")]
    SingularPoint { nucleus: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
