use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared by all mechanisms and oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("epsilon must be positive and finite, got {0}")]
    NonPositiveEpsilon(f64),

    #[error("sensitivity must be positive and finite, got {0}")]
    NonPositiveSensitivity(f64),

    #[error("variance must be positive, got {0}")]
    NonPositiveVariance(f64),

    /// Raw input outside the declared collection domain. Inputs are never
    /// clamped: clamping silently changes the sensitivity and voids the
    /// privacy guarantee.
    #[error("input {x} lies outside the collection domain [{min}, {max}]")]
    OutOfDomain { x: f64, min: f64, max: f64 },

    /// Centered input outside [-delta/2, delta/2].
    #[error("input {x} lies outside [-{half}, {half}]; the sensitivity bound no longer holds")]
    InputOutOfRange { x: f64, half: f64 },

    /// Mixture probabilities left [0, 1] by more than rounding noise.
    #[error("mixture probabilities are inconsistent (residual component probability {p3:e})")]
    InconsistentMixture { p3: f64 },

    /// One density is zero where another is positive: the two outputs have
    /// different supports, the failure mode of naively truncated noise.
    #[error("support mismatch at z = {z}: density is zero for input {x_zero} but positive for input {x_pos}")]
    ZeroDensity { x_zero: f64, x_pos: f64, z: f64 },

    #[error("quadrature error estimate {achieved:e} exceeds the requested tolerance {requested:e}")]
    ToleranceNotMet { requested: f64, achieved: f64 },

    #[error("epsilon {epsilon} is outside the {regime} regime")]
    RegimeMismatch { regime: &'static str, epsilon: f64 },

    #[error("epsilon grid is empty")]
    EmptyEpsilonList,

    #[error("{0}")]
    InvalidParameter(String),
}
