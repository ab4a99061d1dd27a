use thiserror::Error;

/// Errors raised by the evaluation, sampling, expectation and geometry layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParamDomain(String),

    #[error("input {index} is zero but the CES substitution parameter is negative")]
    NonPositiveInput { index: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degenerate technology: the focal output has no positive input requirement")]
    DegenerateTechnology,

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("level {level} is not bracketed on ray at angle {angle} rad")]
    LevelNotBracketed { angle: f64, level: f64 },

    #[error("surface decreases along ray at angle {angle} rad")]
    NonMonotoneRay { angle: f64 },

    #[error("empty level set at {level}: {diagnostic}")]
    EmptyLevelSet { level: f64, diagnostic: String },

    #[error("unknown figure `{0}`")]
    UnknownFigure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
