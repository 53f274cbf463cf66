use thiserror::Error;

/// Errors raised by the simulation, channel and formula layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported dimension {0} (allowed: 2, 4, 8)")]
    UnsupportedDimension(usize),

    #[error("tensor product dimension {0} exceeds 8")]
    DimensionOverflow(usize),

    #[error("invalid qubit selection {keep:?} for a {qubits}-qubit state")]
    InvalidQubitSelection { keep: Vec<usize>, qubits: usize },

    #[error("{name} = {value} is outside [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("{0} is not finite")]
    NonFinite(&'static str),

    #[error("not a valid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("Kraus operators are not complete (deviation {0:e})")]
    IncompleteKraus(f64),

    #[error("theta = {0} leaves the requested coefficients unidentifiable")]
    DegenerateTheta(f64),

    #[error("{0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Slack applied to the upper ends of angle domains so that radians typed
/// with four decimals (0.7854 for a quarter turn) are accepted.
pub const ANGLE_SLACK: f64 = 1e-4;

pub(crate) fn check_range(name: &'static str, value: f64, min: f64, max: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::NonFinite(name));
    }
    if value < min || value > max {
        return Err(Error::OutOfRange {
            name,
            value,
            min,
            max,
        });
    }
    Ok(value)
}
