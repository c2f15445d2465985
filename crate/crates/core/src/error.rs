use thiserror::Error;

/// Errors produced by the numerical routines.
///
/// Times and magnitudes are reported as `f64` whatever the scalar type of the
/// failing computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no real equilibria: discriminant c^2 - 4ab = {discriminant}")]
    NoRealEquilibria { discriminant: f64 },

    #[error("step budget of {steps} steps exceeded at t = {t}")]
    StepBudgetExceeded { t: f64, steps: u64 },

    #[error("trajectory escaped (max-norm {norm:.3e}) at t = {t}")]
    Blowup { t: f64, norm: f64 },

    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("no return to the section within {max_flight} time units")]
    NoReturn { max_flight: f64 },

    #[error("Newton iteration diverged after {iterations} iterations (residual {residual:.3e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("singular Newton matrix (det = {det:.3e})")]
    SingularJacobian { det: f64 },

    #[error("return-map multipliers form a complex pair ({re} ± {im}i)")]
    ComplexMultipliers { re: f64, im: f64 },

    #[error("no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("trajectory has no qualifying section crossing before t = {horizon}")]
    NoCrossing { horizon: f64 },

    #[error("eigenbasis is degenerate (det = {det:.3e})")]
    DegenerateEigenbasis { det: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
