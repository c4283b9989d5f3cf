use crate::model::{PointId, Time};

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("two points share arrival time {t_arr}")]
    DuplicateArrival { t_arr: Time },

    #[error("point {id} has arrival time {t_arr} not before its deletion time {t_del}")]
    InvertedLifetime { id: PointId, t_arr: Time, t_del: Time },

    #[error("point id {id} appears more than once")]
    DuplicateId { id: PointId },

    #[error(
        "distance {distance} between points {a} and {b} lies outside the declared range [{d_min}, {d_max}]"
    )]
    DistanceOutOfRange {
        a: PointId,
        b: PointId,
        distance: f64,
        d_min: f64,
        d_max: f64,
    },

    #[error("invalid distance bounds: d_min = {d_min}, d_max = {d_max}")]
    InvalidBounds { d_min: f64, d_max: f64 },

    #[error("ladder ratio parameter must be positive, got {0}")]
    InvalidBeta(f64),

    #[error("approximation tolerance must be positive, got {0}")]
    InvalidEpsilon(f64),

    #[error("number of centers must be at least 1")]
    InvalidK,

    #[error("matrix index {index} out of range for a {size}x{size} metric")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("point has dimension {found}, metric expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point payload does not belong to this metric space")]
    PayloadMismatch,

    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(String),

    #[error("no centers supplied")]
    EmptyCenters,

    #[error("no points supplied")]
    EmptyPoints,

    #[error("at least two points are required, got {0}")]
    TooFewPoints(usize),

    #[error("{n} points exceed the enumeration cap of {cap}")]
    TooLargeForEnumeration { n: usize, cap: usize },

    #[error("arrival time {got} is not after the last processed arrival {last}")]
    NonMonotoneArrival { last: Time, got: Time },

    #[error("no guess yields a feasible clustering; the declared d_max is likely too small")]
    NoFeasibleGuess,

    #[error("point {id} has no live entry in guess {guess}")]
    PointNotFound { id: PointId, guess: usize },

    #[error("H must be smaller than the stream length ({h} >= {n})")]
    InvalidH { h: usize, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
