use alloc::string::String;

/// Errors raised by the library.
///
/// The variants are grouped the way the command line maps them onto exit
/// codes: shape and validation problems, precondition failures, contract
/// violations, and budget overruns.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid distribution: {0}")]
    Validation(String),

    #[error("p(x,y) lacks full support: p({x},{y}) = 0")]
    NotFullSupport { x: String, y: String },

    #[error("numerically degenerate instance: {0}")]
    Degenerate(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("budget exceeded: {what} needs {needed}, limit is {limit}")]
    Budget {
        what: &'static str,
        needed: f64,
        limit: f64,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
