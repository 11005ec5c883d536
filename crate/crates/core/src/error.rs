use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QleError {
    #[error("chain length must be at least 1")]
    EmptyChain,

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },

    #[error("invalid operator digit {0}; expected 0..=3")]
    InvalidDigit(u8),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("bond {site} does not exist in a chain of {n} sites")]
    NoSuchBond { site: usize, n: usize },

    #[error("chain length {n} exceeds the configured cap of {cap}")]
    SizeCap { n: usize, cap: usize },

    #[error("generator is singular: the chain has no dissipation channel")]
    SingularGenerator,

    #[error("iterative solver failed after {iterations} iterations (relative residual {residual:e})")]
    SolverDivergence { iterations: usize, residual: f64 },

    #[error("step size underflow at t = {time}")]
    StepSizeUnderflow { time: f64 },

    #[error("single-photon scattering matrix is singular at omega_p = {omega_p}")]
    SingularScattering { omega_p: f64 },

    #[error("{0}")]
    Numerical(String),
}

pub type Result<T, E = QleError> = std::result::Result<T, E>;

pub(crate) fn check_nonneg(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(QleError::InvalidParameter { name, value, reason: "must be finite" });
    }
    if value < 0.0 {
        return Err(QleError::InvalidParameter { name, value, reason: "must be non-negative" });
    }
    Ok(())
}

pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(QleError::InvalidParameter { name, value, reason: "must be finite" });
    }
    Ok(())
}
