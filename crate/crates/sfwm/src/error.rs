use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SfwmError {
    #[error("unknown preset `{name}`; valid presets: {valid}")]
    UnknownPreset { name: String, valid: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate steady state: linear system is singular")]
    DegenerateSteadyState,
    #[error("pole in coefficient denominator at omega = {omega}")]
    Pole { omega: f64 },
    #[error("convergence failure: {what} (achieved relative change {achieved:.3e})")]
    Convergence { what: String, achieved: f64 },
    #[error("insufficient range: {0}")]
    InsufficientRange(String),
    #[error("ODE step-size underflow at z = {z}")]
    StepUnderflow { z: f64 },
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, SfwmError>;
