//! Crate-wide error type.

use std::fmt;

/// Errors raised by trajectory construction, evaluation, and estimation.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Rotation angle within tolerance of the logarithm branch cut at pi.
    AngleAtBoundary { angle: f64 },
    /// Query time outside the segment handed to an interpolation routine.
    OutOfSegment { tau: f64, start: f64, end: f64 },
    /// Query time outside the trajectory's evaluation domain.
    OutOfRange { tau: f64, start: f64, end: f64 },
    /// Query time outside a spline's evaluation domain.
    OutOfDomain { t: f64, start: f64, end: f64 },
    /// Spline order outside the supported range.
    UnsupportedOrder { order: usize },
    /// Non-positive time interval where a strictly positive one is required.
    DegenerateInterval { dt: f64 },
    /// Reachability Gramian too ill-conditioned to invert.
    SingularGramian { condition: f64 },
    /// Normal equations are structurally or numerically rank deficient.
    RankDeficient { detail: String },
    /// Fiducial tag does not project into the camera (skipped in FOV mode).
    TagBehindCamera { tag: usize, stamp: f64 },
    /// Inputs refer to different groups or have inconsistent dimensions.
    DimensionMismatch { expected: usize, actual: usize },
    /// Invalid argument outside the numeric domain of an operation.
    InvalidArgument { detail: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::AngleAtBoundary { angle } => {
                write!(f, "rotation angle {angle} too close to pi for a unique logarithm")
            }
            Error::OutOfSegment { tau, start, end } => {
                write!(f, "time {tau} outside segment [{start}, {end}]")
            }
            Error::OutOfRange { tau, start, end } => {
                write!(f, "time {tau} outside trajectory domain [{start}, {end}]")
            }
            Error::OutOfDomain { t, start, end } => {
                write!(f, "time {t} outside spline domain [{start}, {end}]")
            }
            Error::UnsupportedOrder { order } => write!(f, "unsupported spline order {order}"),
            Error::DegenerateInterval { dt } => {
                write!(f, "interval length {dt} must be positive")
            }
            Error::SingularGramian { condition } => {
                write!(f, "reachability Gramian condition number {condition:.3e} exceeds limit")
            }
            Error::RankDeficient { detail } => write!(f, "rank-deficient problem: {detail}"),
            Error::TagBehindCamera { tag, stamp } => {
                write!(f, "tag {tag} outside camera FOV at t = {stamp}")
            }
            Error::DimensionMismatch { expected, actual } => {
                write!(f, "dimension mismatch: expected {expected}, got {actual}")
            }
            Error::InvalidArgument { detail } => write!(f, "invalid argument: {detail}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
