//! Error types shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while building, updating, or using a sample.
#[derive(Debug, Error)]
pub enum Error {
    /// The sampled rows do not span the factor space.
    #[error("sampled rows are rank deficient (condition estimate {cond:.3e} exceeds {limit:.1e})")]
    SingularGram { cond: f64, limit: f64 },

    /// Removing this unit would make the Gram matrix singular.
    #[error("cannot remove unit {index}: leverage {leverage} is too close to one")]
    DegenerateRemoval { index: usize, leverage: f64 },

    /// The one-exchange update denominator vanished; the swap would make the
    /// Gram matrix singular.
    #[error("degenerate exchange: denominator d = {d:.3e} is below tolerance")]
    DegenerateSwap { d: f64 },

    /// Incremental updates drifted too far from a from-scratch recomputation.
    #[error("incremental inverse drifted {drift:.3e} from the rebuilt value (limit {limit:.1e})")]
    DriftExceeded { drift: f64, limit: f64 },

    /// Initialization could not push the maximum leverage below its threshold.
    #[error(
        "initialization failed: max leverage {max_leverage:.6} still at or above \
         {threshold:.6} after {iterations} iterations"
    )]
    InitFailed {
        max_leverage: f64,
        threshold: f64,
        iterations: usize,
    },

    /// An operation needed responses but the dataset has none.
    #[error("dataset has no response vector")]
    MissingResponse,

    /// Too few rows to estimate the residual variance.
    #[error("need more than {dim} sampled rows for a residual variance estimate, got {n}")]
    InsufficientDof { n: usize, dim: usize },

    /// A leverage of (numerically) one makes the influence formula blow up.
    #[error("leverage {leverage} at position {index} is too close to one")]
    DegenerateLeverage { index: usize, leverage: f64 },

    /// Dimensions or index ranges do not line up.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// An invalid configuration value.
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
