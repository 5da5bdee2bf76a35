use thiserror::Error;

use crate::geometry::Point;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh level must be a positive integer, got {0}")]
    InvalidLevel(usize),

    #[error("no {kind} quadrature rule for degree {degree}")]
    UnsupportedQuadrature { kind: &'static str, degree: usize },

    #[error("degenerate element (measure {measure:e})")]
    DegenerateElement { measure: f64 },

    #[error("local index {index} out of range for {kind}")]
    InvalidLocalIndex { kind: &'static str, index: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("inadmissible coefficients: {0}")]
    Inadmissible(String),

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("linear solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("dense diagnostics limited to dimension {max}, system has {dim}")]
    DimensionGuard { dim: usize, max: usize },

    #[error("convergence rate needs positive errors, got {coarse} and {fine}")]
    NonPositiveError { coarse: f64, fine: f64 },

    #[error("invalid level sequence: {0}")]
    InvalidLevels(String),

    #[error("point ({}, {}) is not on the interface", .0[0], .0[1])]
    NotOnInterface(Point),

    #[error("solution does not match mesh: {0}")]
    MeshMismatch(String),

    #[error("level {level}: {source}")]
    AtLevel {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
