use thiserror::Error;

use crate::fock::FockWindow;
use crate::integrator::StepStats;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument {x} outside the validated domain |x| <= {limit}")]
    Domain { x: f64, limit: f64 },

    #[error("degenerate rotating-frame spectrum (G = 0 and detuning = 0)")]
    DegenerateSpectrum,

    #[error("step size underflow at t = {t} (h = {h:e}); {stats}")]
    StepSizeUnderflow { t: f64, h: f64, stats: StepStats },

    #[error("step limit of {limit} reached at t = {t}; {stats}")]
    TooManySteps {
        t: f64,
        limit: usize,
        stats: StepStats,
    },

    #[error("non-finite state encountered at t = {t}; {stats}")]
    NonFinite { t: f64, stats: StepStats },

    #[error(
        "Fock window {window} overflowed: boundary population {leakage:e} at t = {t}; \
         suggested window {suggested}"
    )]
    WindowOverflow {
        window: FockWindow,
        suggested: FockWindow,
        leakage: f64,
        t: f64,
    },

    #[error("state integrity violated: {0}")]
    StateIntegrity(String),

    #[error("invalid input: {0}")]
    Input(String),
}

impl Error {
    /// Integrator statistics attached to a solver failure, if any.
    pub fn step_stats(&self) -> Option<&StepStats> {
        match self {
            Error::StepSizeUnderflow { stats, .. }
            | Error::TooManySteps { stats, .. }
            | Error::NonFinite { stats, .. } => Some(stats),
            _ => None,
        }
    }
}
