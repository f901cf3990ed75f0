use thiserror::Error;

/// Errors raised anywhere in the solver stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("working precision of {0} digits is below the supported minimum of 30")]
    PrecisionTooLow(u32),

    #[error("non-finite value produced in {0}")]
    NotFinite(&'static str),

    #[error("{function} requires a positive argument, got {value}")]
    NonPositiveArgument { function: &'static str, value: String },

    #[error("domain error in {function}: {detail}")]
    Domain { function: &'static str, detail: String },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("recurrence denominator {value} is within the degeneracy threshold")]
    DegenerateDenominator { value: String },

    #[error("z-parameter {z} gives a non-positive radicand for Z = {charge}, kappa = {kappa}")]
    InvalidZParameter { z: String, charge: String, kappa: i32 },

    #[error("no apparent principal number makes the coupling consistent (kappa = {kappa})")]
    NoConsistentCoupling { kappa: i32 },

    #[error("spinor norm underflowed")]
    ZeroFunction,

    #[error("basis functions {0} and {1} coincide")]
    DuplicateBasisFunction(usize, usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("overlap matrix is numerically singular (smallest eigenvalue {0})")]
    SingularOverlap(String),

    #[error("no eigenvalue lies above -c^2")]
    NoElectronicState,

    #[error("unsupported kappa {0}; only s1/2 shells (kappa = -1) can be assembled")]
    UnsupportedKappa(i32),

    #[error("SCF failed at trial exponents {point:?}: {reason}")]
    ScfFailureAtTrialPoint { point: Vec<f64>, reason: String },

    #[error("optimizer made no progress after {restarts} restarts")]
    NoProgress { restarts: usize },

    #[error("configuration error{}: {message}", location.as_ref().map(|l| format!(" ({l})")).unwrap_or_default())]
    Config { location: Option<String>, message: String },
}

impl Error {
    pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            function,
            detail: detail.into(),
        }
    }

    pub(crate) fn config(location: Option<String>, message: impl Into<String>) -> Self {
        Error::Config {
            location,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
