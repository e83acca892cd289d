use thiserror::Error;

/// Errors produced by curve evaluation, parametrization and trading.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("schedule produced t = {t} outside [0, 1] at s = {s}")]
    ScheduleRange { s: f64, t: f64 },

    #[error("schedule is not differentiable at s = {s}")]
    NonDifferentiable { s: f64 },

    #[error("unsupported schedule for this operation: {0}")]
    UnsupportedSchedule(&'static str),

    #[error("gradient degenerate (dA/dy = {dy})")]
    DegenerateGradient { dy: f64 },

    #[error("target {target} outside reachable range [{min}, {max}]")]
    OutOfRange { target: f64, min: f64, max: f64 },

    #[error("insufficient liquidity; maximum tradable amount is {max_amount}")]
    InsufficientLiquidity { max_amount: f64 },

    #[error("invalid curve: x'(s) = {x_prime} is not positive at s = {s}")]
    InvalidCurve { s: f64, x_prime: f64 },

    #[error("curve is not convex (min margin {min_margin} at s = {worst_s})")]
    NonConvex { min_margin: f64, worst_s: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state is not on the curve (|A - 1| = {residual})")]
    OffCurve { residual: f64 },

    #[error("root finder failed: {0}")]
    RootFinding(&'static str),

    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Rejects non-finite or non-positive values.
pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}

pub(crate) fn unit_interval(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}
