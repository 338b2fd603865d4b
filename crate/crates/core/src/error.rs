use thiserror::Error;

/// Errors raised by the library surface.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite coordinate at index {index}")]
    NonFinite { index: usize },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("step t_{index} = {step} lies outside (0, {bound})")]
    StepOutOfRange { index: usize, step: f64, bound: f64 },

    #[error(
        "schedule declares k = {schedule_k}, d = {schedule_d} but the operator needs k >= {operator_k}, d >= {space_d}"
    )]
    ScheduleMismatch {
        schedule_k: f64,
        schedule_d: f64,
        operator_k: f64,
        space_d: f64,
    },

    #[error("series appears not to diverge at this budget: partial sums stayed below {target} for {cap} terms")]
    SeriesNotDivergent { target: u64, cap: u64 },

    #[error("rate {variant} needs a {expected} series, got a {found} series")]
    SeriesMismatch {
        variant: &'static str,
        expected: &'static str,
        found: &'static str,
    },

    #[error("rate {variant} needs a modulus of uniform convexity")]
    MissingModulus { variant: &'static str },

    #[error("rate argument {value} is not representable as an index")]
    IndexOverflow { value: f64 },

    #[error("{what} failed validation: max violation {max_violation:e} over {pairs} pairs")]
    ValidationFailed {
        what: String,
        max_violation: f64,
        pairs: usize,
    },

    #[error("{0}")]
    Unsupported(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
