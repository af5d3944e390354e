use thiserror::Error;

use crate::basis::Basis;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("invalid binary graph cache: {0}")]
    Cache(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator must be in rescaled mode (spectrum in [0,1])")]
    NotRescaled,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("weights sum to {sum}, expected 1")]
    Unnormalized { sum: f64 },

    #[error("basis conversion supports m <= {max}, got {m}")]
    ConversionOrder { m: usize, max: usize },

    #[error("basis mismatch: {left:?} vs {right:?}")]
    BasisMismatch { left: Basis, right: Basis },

    #[error("point {0} lies outside the domain [0, 1]")]
    OutOfDomain(f64),

    #[error(
        "maximum-entropy fit did not converge after {iterations} iterations \
         (best residual {best_residual:.3e})"
    )]
    NonConvergence {
        iterations: usize,
        best_residual: f64,
    },

    #[error(
        "density exponent overflow ({exponent:.1} > 700); \
         rescale the moments or use the chebyshev basis"
    )]
    QuadratureOverflow { exponent: f64 },

    #[error("kernel {0} has no finite moments")]
    UnsupportedKernel(&'static str),

    #[error("no spectral gap detected")]
    NoSpectralGap,

    #[error("all candidate fits failed during parameter search")]
    SearchFailed,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
