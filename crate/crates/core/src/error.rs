use thiserror::Error;

use crate::model::Mode;

/// Errors produced by the sensing library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ensemble has no resources")]
    EmptyEnsemble,

    #[error(
        "per-resource vectors have mismatched lengths ({field} has {found}, expected {expected})"
    )]
    LengthMismatch {
        field: &'static str,
        found: usize,
        expected: usize,
    },

    #[error("resource {index}: prior_empty = {value} is not in (0, 1)")]
    PriorOutOfRange { index: usize, value: f64 },

    #[error("resource {index}: {field} = {value} must be positive and finite")]
    NonPositive {
        index: usize,
        field: &'static str,
        value: f64,
    },

    #[error(
        "resource {index}: prior_empty = {prior} violates the {mode} sensing bound {bound} \
         (every resource must need sensing before use)"
    )]
    SensingBound {
        index: usize,
        prior: f64,
        bound: f64,
        mode: Mode,
    },

    #[error("phi_min = {0} must be positive and finite")]
    PhiMin(f64),

    #[error("horizon K = {0} must be at least 2")]
    HorizonTooShort(usize),

    #[error("resource index {index} out of bounds for an ensemble of {n} resources")]
    IndexOutOfBounds { index: usize, n: usize },

    #[error("cycle members must be non-empty and distinct: {0:?}")]
    InvalidMembers(Vec<usize>),

    #[error("resource {index}: busy resource has signal power {power} below phi_min {phi_min}")]
    SignalBelowFloor {
        index: usize,
        power: f64,
        phi_min: f64,
    },

    #[error("resource {index}: empty resource has non-zero signal power {power}")]
    SignalOnEmpty { index: usize, power: f64 },

    #[error("exponential mean theta = {0} must be positive and finite")]
    NonPositiveTheta(f64),

    #[error("test statistic ratio theta_min/theta_0 = {0} must exceed 1")]
    RatioNotAboveOne(f64),

    #[error("threshold gamma = {0} must be positive")]
    NonPositiveGamma(f64),

    #[error("plan uses {kappa} tests but the horizon is only {horizon}")]
    PlanExceedsHorizon { kappa: usize, horizon: usize },

    #[error(
        "maximum cycle size {requested} exceeds the default cap of {cap}; use the uncapped planner"
    )]
    CycleSizeCap { requested: usize, cap: usize },

    #[error("maximum cycle size must be at least 1")]
    ZeroCycleSize,

    #[error("resource {0} is not covered by any test")]
    NotCovered(usize),

    #[error("tests {first} and {second} share more than one resource")]
    SharedPair { first: usize, second: usize },

    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("PBD argument k = {k} exceeds n = {n}")]
    PbdIndex { k: usize, n: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("sensing matrix row {0} is all zero")]
    ZeroRow(usize),

    #[error("sensing matrix entry ({row}, {col}) = {value} must be non-negative and finite")]
    BadMatrixEntry { row: usize, col: usize, value: f64 },

    #[error("coordinate descent did not converge after {iterations} sweeps (last max change {last_change:e})")]
    NotConverged {
        iterations: usize,
        last_change: f64,
        estimate: Vec<f64>,
    },

    #[error("oracle instance too large: {0}")]
    OracleTooLarge(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown policy `{0}`")]
    UnknownPolicy(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
