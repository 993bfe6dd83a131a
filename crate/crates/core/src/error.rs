use thiserror::Error;

/// Errors raised by the model, solvers and mechanisms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error(
        "degenerate environment: 2a/c = {ratio} must exceed 1/(gamma*alpha_delta) = {bound} \
         (no agent would sample on its own)"
    )]
    DegenerateEnv { ratio: f64, bound: f64 },

    #[error("types must be strictly increasing within [{min}, {max}]; offending index {index}")]
    TypesNotStrict { index: usize, min: f64, max: f64 },

    #[error("coalition has no pooled samples, its weighted type is undefined")]
    EmptyCoalition,

    #[error("agent index {index} out of range for {len} agents")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("fixed point did not converge after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("binding scheme with {contributors} contributors is infeasible: {reason}")]
    InfeasibleContributors { contributors: usize, reason: String },

    #[error(
        "verification floor infeasible: n° - 2(a/c)(theta_max - theta_min) = {bound} is not positive"
    )]
    InfeasibleVerification { bound: f64 },

    #[error("instance too large: {what} is {got}, limit {limit}")]
    TooLarge { what: &'static str, got: usize, limit: usize },

    #[error("empty sample set")]
    EmptySample,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { field, reason: reason.into() }
}
