//! Error type shared by every module of the crate.

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("direct evaluation out of range at {0}; use the scaled form")]
    OverflowRange(Complex64),

    #[error("point {0} is outside the domain of the operation")]
    DomainError(Complex64),

    #[error("derivative vanishes at {0}")]
    DerivativeVanishes(Complex64),

    #[error("no solution found: {0}")]
    NoSolution(String),

    #[error(
        "line at ordinate {ordinate} does not meet both level curves beyond the cutoff radius"
    )]
    OutsideStrip { ordinate: f64 },

    #[error("invalid branch index {0}")]
    InvalidIndex(i64),

    #[error("fixed-point iteration did not converge after {iterations} iterations (last step {last_step:e})")]
    NotConverged { iterations: usize, last_step: f64 },

    #[error("Newton iteration did not reach the residual target after {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("Newton iterate {at} left the basin around seed {seed}")]
    EscapedBasin { seed: Complex64, at: Complex64 },

    #[error("two zeros closer than the duplicate threshold near {0}")]
    DuplicateZero(Complex64),

    #[error("need at least {needed} records, got {got}")]
    TooFew { needed: usize, got: usize },

    #[error("contour passes through (or too close to) a zero near {at} (relative residual {residual:e})")]
    ZeroOnContour { at: Complex64, residual: f64 },

    #[error("contour quadrature stalled after {segments} segments")]
    QuadratureStalled { segments: usize },

    #[error("subdivision stalled: {0}")]
    SubdivisionStalled(String),

    #[error("record at {0} lies outside the contour")]
    RecordOutsideContour(Complex64),

    #[error("h = {h} does not exceed the threshold {threshold}")]
    PreconditionH { h: f64, threshold: f64 },

    #[error("rejection sampling failed {0} times in a row; region looks empty")]
    EmptyRegionSample(usize),

    #[error("delta = {delta} is not below the separation radius {separation}")]
    DeltaTooLarge { delta: f64, separation: f64 },

    #[error("zero list is incomplete on the sampled window: contour counts {counted}, list has {listed}")]
    IncompleteZeroList { counted: i64, listed: i64 },

    #[error("branch {nu}: {source}")]
    AtIndex { nu: i64, source: Box<Error> },
}

impl Error {
    pub(crate) fn at_index(self, nu: i64) -> Self {
        Error::AtIndex {
            nu,
            source: Box::new(self),
        }
    }

    /// The innermost error, with any index annotations removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtIndex { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self.root(),
            Error::InvalidParameter(_)
                | Error::DomainError(_)
                | Error::InvalidIndex(_)
                | Error::PreconditionH { .. }
                | Error::DeltaTooLarge { .. }
                | Error::RecordOutsideContour(_)
                | Error::TooFew { .. }
        )
    }

    /// Short machine-readable name of the innermost variant.
    pub fn kind(&self) -> &'static str {
        match self.root() {
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::OverflowRange(_) => "OverflowRange",
            Error::DomainError(_) => "DomainError",
            Error::DerivativeVanishes(_) => "DerivativeVanishes",
            Error::NoSolution(_) => "NoSolution",
            Error::OutsideStrip { .. } => "OutsideStrip",
            Error::InvalidIndex(_) => "InvalidIndex",
            Error::NotConverged { .. } => "NotConverged",
            Error::MaxIterations { .. } => "MaxIterations",
            Error::EscapedBasin { .. } => "EscapedBasin",
            Error::DuplicateZero(_) => "DuplicateZero",
            Error::TooFew { .. } => "TooFew",
            Error::ZeroOnContour { .. } => "ZeroOnContour",
            Error::QuadratureStalled { .. } => "QuadratureStalled",
            Error::SubdivisionStalled(_) => "SubdivisionStalled",
            Error::RecordOutsideContour(_) => "RecordOutsideContour",
            Error::PreconditionH { .. } => "PreconditionH",
            Error::EmptyRegionSample(_) => "EmptyRegionSample",
            Error::DeltaTooLarge { .. } => "DeltaTooLarge",
            Error::IncompleteZeroList { .. } => "IncompleteZeroList",
            Error::AtIndex { .. } => unreachable!("root() strips annotations"),
        }
    }
}
