//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter is out of its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A local interpolation system is singular to working precision,
    /// typically caused by (near-)duplicate stencil nodes.
    #[error("local system at node {node} is singular to working precision{}",
            .offset.map(|o| format!(" (virtual offset {o})")).unwrap_or_default())]
    IllConditioned {
        /// Index of the stencil center node.
        node: usize,
        /// Offset index inside a virtual stencil, when applicable.
        offset: Option<usize>,
    },

    /// Global system assembly rejected the supplied operator rows.
    #[error("assembly error: {0}")]
    Assembly(String),

    /// The incomplete factorization hit a zero pivot.
    #[error("ILUT factorization failed: zero pivot in row {row}")]
    ZeroPivot { row: usize },

    /// BiCGSTAB suffered a breakdown (vanishing inner product).
    #[error("BiCGSTAB breakdown after {iterations} iterations (relative residual {residual:e})")]
    Breakdown { iterations: usize, residual: f64 },

    /// The dense direct solver is a test oracle and refuses large systems.
    #[error("dense solve limited to {max} unknowns, got {n}")]
    TooLargeForDense { n: usize, max: usize },

    /// The dense direct solver met an exactly singular matrix.
    #[error("singular matrix in dense solve")]
    SingularMatrix,

    /// Configuration file or CLI value could not be interpreted.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Numeric failures of a single benchmark run (as opposed to bad
    /// configuration or I/O); the harness records these as non-converged
    /// rows instead of aborting.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::IllConditioned { .. } | Error::ZeroPivot { .. } | Error::Breakdown { .. }
        )
    }
}
