use crate::field::Space;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("expected a {expected:?}-space field, found {found:?}")]
    WrongSpace { expected: Space, found: Space },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("multiplier is singular at the zero mode and no zero-mode rule was supplied")]
    SingularMultiplier,

    #[error("multiplier is not finite at wavevector {0:?}")]
    NonFiniteMultiplier([f64; 3]),

    #[error("zero mode must vanish for this operation, found magnitude {0:e}")]
    NonzeroMean(f64),

    #[error("Lebesgue exponent must be at least 1, got {0}")]
    InvalidExponent(f64),

    #[error("shell index {k} outside the active range [{min}, {max}]")]
    ShellOutOfRange { k: i32, min: i32, max: i32 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("delta = {delta} is not admissible: 3*delta < alpha needs delta < {max_delta}")]
    DeltaTooLarge { delta: f64, max_delta: f64 },

    #[error("invalid initial data: {0}")]
    InvalidData(String),

    #[error("non-finite values after the step ending at t = {t}")]
    BlowUp { t: f64 },

    #[error("relative energy drift {drift:e} exceeds {tolerance:e} at t = {t} even after halving dt")]
    EnergyDrift { drift: f64, tolerance: f64, t: f64 },

    #[error("decay fit: {0}")]
    Fit(String),

    #[error("window end t = {t1} lies beyond the wraparound time {t_wrap}")]
    BeyondWraparound { t1: f64, t_wrap: f64 },

    #[error("quadrature history: {0}")]
    Quadrature(String),

    #[error("identity check: {0}")]
    Identity(String),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("config: {0}")]
    Config(String),

    #[error("checkpoint {what}: expected {expected}, found {found}")]
    Checkpoint {
        what: &'static str,
        expected: String,
        found: String,
    },

    #[error("timeseries: {0}")]
    Timeseries(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BlowUp { .. } | Error::EnergyDrift { .. } | Error::Identity(_) | Error::CheckFailed(_) => 2,
            Error::Io(_) | Error::Checkpoint { .. } | Error::Timeseries(_) => 3,
            _ => 1,
        }
    }
}
