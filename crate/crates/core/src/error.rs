use thiserror::Error;

use crate::spaces::expr::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("metric not positive definite")]
    NotPositiveDefinite,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("tensor is not symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("Schouten undefined in dimension {n} (requires n >= 3)")]
    SchoutenUndefined { n: usize },

    #[error("Q-curvature implemented for dimension 4 only (got n = {n})")]
    QCurvatureDimension { n: usize },

    #[error("Weyl part nonzero (residual {residual:e})")]
    WeylNonzero { residual: f64 },

    #[error("degree {deg} out of range: {reason}")]
    DegreeOutOfRange { deg: usize, reason: String },

    #[error("dimension {n} exceeds the cap of {cap}")]
    DimensionCap { n: usize, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0}")]
    Parse(#[from] ParseError),

    #[error("chart file line {line}, column {column}: {message}")]
    ChartSyntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("positive Yamabe required (got {0})")]
    NonPositiveYamabe(f64),

    #[error("empty sample list")]
    EmptySamples,
}

impl Error {
    /// Short machine-readable identifier for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotPositiveDefinite => "not_positive_definite",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotSymmetric { .. } => "not_symmetric",
            Error::SchoutenUndefined { .. } => "schouten_undefined",
            Error::QCurvatureDimension { .. } => "q_curvature_dimension",
            Error::WeylNonzero { .. } => "weyl_nonzero",
            Error::DegreeOutOfRange { .. } => "degree_out_of_range",
            Error::DimensionCap { .. } => "dimension_cap",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Parse(_) => "parse_error",
            Error::ChartSyntax { .. } => "chart_syntax",
            Error::NonPositiveYamabe(_) => "non_positive_yamabe",
            Error::EmptySamples => "empty_samples",
        }
    }
}
