use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which end of a sampled grid failed a coverage check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridEnd {
    Head,
    Tail,
}

impl fmt::Display for GridEnd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridEnd::Head => f.write_str("underflow"),
            GridEnd::Tail => f.write_str("overflow"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ray inside the non-decay sector: |s| = {s} <= alpha/2 = {half_alpha}")]
    NonDecayRay { s: f64, half_alpha: f64 },

    #[error("contour configuration: {0}")]
    ContourConfig(String),

    #[error("series budget exceeded after {terms} terms")]
    SeriesBudget { terms: usize },

    #[error("quadrature stagnation: last iterates {previous} and {last}")]
    QuadratureStagnation { previous: Complex64, last: Complex64 },

    #[error("series/contour cross-check failed: relative discrepancy {0:e}")]
    CrossCheck(f64),

    #[error("bessel order {0} out of range (order must be >= -1/2)")]
    OrderOutOfRange(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("oscillatory summation failed after {blocks} blocks: {detail}")]
    OscillatorySummation { blocks: usize, detail: String },

    #[error("insufficient points: need {needed}, found {found}")]
    InsufficientPoints { needed: usize, found: usize },

    #[error("grid {end}: {detail}")]
    GridCoverage {
        end: GridEnd,
        divergent: bool,
        detail: String,
    },

    #[error("contour unavailable: {0}")]
    ContourUnavailable(String),

    #[error("domain too small: {0}")]
    DomainTooSmall(String),

    #[error("unsupported order: {0}")]
    UnsupportedOrder(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by rejected input rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::NonDecayRay { .. }
                | Error::ContourConfig(_)
                | Error::OrderOutOfRange(_)
                | Error::Domain(_)
                | Error::Hypothesis(_)
                | Error::Config(_)
                | Error::Parse(_)
                | Error::UnsupportedOrder(_)
        )
    }

    /// Short machine-readable tag used in JSON diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NonDecayRay { .. } => "non_decay_ray",
            Error::ContourConfig(_) => "contour_config",
            Error::SeriesBudget { .. } => "series_budget",
            Error::QuadratureStagnation { .. } => "quadrature_stagnation",
            Error::CrossCheck(_) => "cross_check",
            Error::OrderOutOfRange(_) => "order_out_of_range",
            Error::Domain(_) => "domain",
            Error::OscillatorySummation { .. } => "oscillatory_summation",
            Error::InsufficientPoints { .. } => "insufficient_points",
            Error::GridCoverage { .. } => "grid_coverage",
            Error::ContourUnavailable(_) => "contour_unavailable",
            Error::DomainTooSmall(_) => "domain_too_small",
            Error::UnsupportedOrder(_) => "unsupported_order",
            Error::Hypothesis(_) => "hypothesis",
            Error::Config(_) => "config",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
