use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type. Variants are grouped by the layer that raises them;
/// the CLI maps them onto exit codes (input vs. configuration errors).
#[derive(Debug, Error)]
pub enum Error {
    #[error("ambient dimension must be at least 3, got {0}")]
    DimensionTooSmall(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vector norm {0} is not within 1e-12 of 1")]
    NotUnitNorm(f64),

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("moment-formula degree {k} exceeds the supported maximum {max} (binomial sums lose precision beyond it)")]
    DegreeTooLarge { k: usize, max: usize },

    #[error("malformed Gram matrix: {0}")]
    MalformedGram(String),

    #[error("Gram matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("cannot place {points} points in ambient dimension {dim}")]
    TooManyPoints { points: usize, dim: usize },

    #[error("degenerate link: |c| = {0} is not below 1")]
    DegenerateLink(f64),

    #[error("link projection residual has norm {0:e}, below the 1e-14 floor")]
    LinkResidualVanishes(f64),

    #[error("inner product {got} disagrees with the declared link parameter {expected} beyond 1e-8")]
    LinkMismatch { expected: f64, got: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("diameter condition violated: {0}")]
    DiameterCondition(String),

    #[error("quadrature did not converge below tolerance by order {order}")]
    QuadratureNotConverged { order: usize },

    #[error("{context} requires a nonnegative function; found value {value:e}")]
    NegativeValue { context: &'static str, value: f64 },

    #[error("zonal functions must share one axis and dimension")]
    AxisMismatch,

    #[error("analytic measure needs every cap and band to share a single axis; use Monte Carlo mode instead")]
    AnalyticMeasureUnavailable,

    #[error("sample budget {got} is below the minimum {min}")]
    SampleBudget { got: u64, min: u64 },

    #[error("color regions fail the partition check: {0}")]
    PartitionCheck(String),

    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
}
