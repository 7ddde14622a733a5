use thiserror::Error;

/// Errors produced by the estimation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("input sequence is empty")]
    EmptyInput,

    #[error("non-finite value at index {0}")]
    NonFiniteValue(usize),

    #[error("{what} = {value} is outside its domain {domain}")]
    DomainError {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("degenerate scale: {0} is zero")]
    DegenerateScale(&'static str),

    #[error("order {order} exceeds the supported maximum {max}")]
    OrderTooHigh { order: usize, max: usize },

    #[error("order {order} is outside 1..={max}")]
    OrderOutOfRange { order: usize, max: usize },

    #[error("sample has a single distinct value")]
    DegenerateSample,

    #[error("paired sequences differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error(
        "Newton iteration did not converge after {iterations} steps (max residual {residual:e})"
    )]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("Hessian is ill-conditioned and no damped step decreases the objective")]
    IllConditioned,

    #[error("too many coefficients for the exponential model ({count} > {max})")]
    TooManyCoefficients { count: usize, max: usize },

    #[error("density flavor {0} has not been fitted")]
    FlavorNotFitted(&'static str),

    #[error("reference distribution has no density")]
    NoDensity,

    #[error("density bound {0:e} is too large for accept-reject sampling")]
    UnboundedDensity(f64),

    #[error("conditional slice integrates to {0:e} before normalization")]
    DegenerateSlice(f64),

    #[error("grouping variable has a single level")]
    SingleGroup,

    #[error("grouping variable has {0} levels, expected 2")]
    NotBinary(usize),
}

pub type Result<T> = std::result::Result<T, LpError>;
