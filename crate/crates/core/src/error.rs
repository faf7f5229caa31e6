use thiserror::Error;

/// Errors raised by geometry construction and evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point has no coordinates")]
    EmptyPoint,

    #[error("coordinate {index} is not finite ({value})")]
    NonFiniteCoordinate { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("metric is not symmetric at ({row}, {col}): {upper} vs {lower}")]
    NonSymmetricMetric {
        row: usize,
        col: usize,
        upper: f64,
        lower: f64,
    },

    #[error("metric is not positive definite: eigenvalue {eigenvalue} <= 0")]
    NotPositiveDefinite { eigenvalue: f64 },

    #[error("metric has wrong signature for {expected}: eigenvalues {eigenvalues:?}")]
    WrongSignature {
        expected: &'static str,
        eigenvalues: Vec<f64>,
    },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("indefinite-norm vector (squared norm {squared_norm}); use is_collinear")]
    IndefiniteNorm { squared_norm: f64 },

    #[error("degenerate basis: Gram determinant {determinant}")]
    DegenerateBasis { determinant: f64 },

    #[error("singular metric at {point:?}: condition number {condition}")]
    SingularMetric { point: Vec<f64>, condition: f64 },

    #[error("singular metric on path segment {segment} at {point:?}: condition number {condition}")]
    SingularPath {
        segment: usize,
        point: Vec<f64>,
        condition: f64,
    },

    #[error("geodesic boundary-value problem did not converge (residual {residual})")]
    NoConvergence { residual: f64 },

    #[error("geodesic changes causal character along the path")]
    MixedCharacter,

    #[error("need at least {needed} points, got {found}")]
    InsufficientPoints { needed: usize, found: usize },

    #[error("dimension unresolved: singular value spectrum {spectrum:?}")]
    DimensionUnresolved { spectrum: Vec<f64> },

    #[error("no samples found: {0}")]
    EmptySampleSet(String),

    #[error("invalid tube specification: {0}")]
    InvalidTube(String),

    #[error("malformed sample file: {0}")]
    MalformedSamples(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
