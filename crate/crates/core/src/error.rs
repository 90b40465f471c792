use thiserror::Error;

/// Errors produced by the synthesis and simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Domain geometry is unusable (nonpositive lengths, `ω ⊄ Ω`, ...).
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    /// A parameter is outside its admissible range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A per-axis overlap interval has nonpositive length.
    #[error("empty interval: {0}")]
    EmptyInterval(String),

    /// The mode truncation does not cover the requested decay rate.
    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),

    /// The spectral constant fell below the degeneracy tolerance.
    #[error("degenerate control subdomain: {0}")]
    DegenerateSubdomain(String),

    /// The requested decay rate admits no valid gain selection.
    #[error("infeasible decay rate: {0}")]
    InfeasibleRate(String),

    /// A disturbance specification violates its stated bound.
    #[error("disturbance bound violated: {0}")]
    DisturbanceBound(String),

    /// Inputs that must share a mode count or domain do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A non-finite value appeared during evaluation or integration.
    #[error("numeric fault: {0}")]
    NumericFault(String),

    /// Decay-rate fitting had no usable window.
    #[error("no fit: {0}")]
    NoFit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
