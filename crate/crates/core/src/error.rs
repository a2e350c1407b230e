use thiserror::Error;

/// Errors raised by the propagation engine and its drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature window [{x_min}, {x_max}] um cannot reach tolerance: {reason}")]
    WindowTooNarrow { x_min: f64, x_max: f64, reason: String },

    #[error("mode index {index} out of range (0..{limit})")]
    ModeOutOfRange { index: usize, limit: usize },

    #[error("mode {m} is evanescent: beyond the guided-mode cutoff m <= {cutoff}")]
    BeyondCutoff { m: usize, cutoff: usize },

    #[error("coupling completeness failed for source mode p={p}: sum of squares {achieved:.3e} below 1 - {tolerance:e}")]
    Incomplete { p: usize, achieved: f64, tolerance: f64 },

    #[error("numerical guard failed: {0}")]
    NumericalGuard(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("no cat state found: {0}")]
    NoCat(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. } | Error::Config(_) | Error::GridMismatch(_) => 1,
            Error::Io(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be finite, got {value}") })
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be positive and finite, got {value}") })
    }
}
