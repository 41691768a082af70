use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("duplicate rates: {0}")]
    DuplicateRates(String),
    #[error("rates must be strictly positive and finite (got {0})")]
    NonPositiveRate(f64),
    #[error("could not produce distinct rates after {0} resampling rounds")]
    DistinctnessUnattainable(usize),
    #[error("empty landscape")]
    EmptyLandscape,
    #[error("evaluation point {0} coincides with a rate")]
    PoleHit(f64),
    #[error("no representable root inside the gap ({lo}, {hi})")]
    BracketFailure { lo: f64, hi: f64 },
    #[error("dense oracle limited to N <= {budget}, got {n}")]
    OverBudget { n: usize, budget: usize },
    #[error("negative occupation {value} at site {site}")]
    NegativeOccupation { site: usize, value: f64 },
    #[error("contour passes within {distance:e} of the spectrum")]
    ContourTooClose { distance: f64 },
    #[error("contour does not enclose the spectrum (winding {winding})")]
    ContourNotEnclosing { winding: f64 },
    #[error("denominator {value:e} too small at node {node}")]
    SmallDenominator { node: String, value: f64 },
    #[error("quadrature did not converge: {0}")]
    NoConvergence(String),
    #[error("truncation radius {radius} exceeds budget {budget}")]
    TruncationBudget { radius: f64, budget: f64 },
    #[error("omega = {0} lies on the branch cut (-inf, 0]")]
    OnCut(String),
    #[error("sector bound violated: {0}")]
    SectorBound(String),
    #[error("window [{lo}, {hi}] exceeds spectrum support {support}")]
    WindowOutsideSupport { lo: f64, hi: f64, support: f64 },
    #[error("io error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures of a numerical guard rather than of the inputs.
    pub fn is_numeric_guard(&self) -> bool {
        matches!(
            self,
            Error::SmallDenominator { .. }
                | Error::ContourTooClose { .. }
                | Error::ContourNotEnclosing { .. }
                | Error::NoConvergence(_)
                | Error::SectorBound(_)
                | Error::NegativeOccupation { .. }
                | Error::BracketFailure { .. }
                | Error::TruncationBudget { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
