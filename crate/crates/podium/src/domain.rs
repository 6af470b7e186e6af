//! Shared domain types: privacy parameters, input-domain shifting and the
//! relative-efficiency comparison used to rank mechanisms.
//!
//! Everything here is immutable after construction and freely shareable
//! across threads.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Privacy budget epsilon (nats) and sensitivity delta, validated once at
/// construction so downstream formulas may divide by `epsilon` or
/// `exp(epsilon) - 1` without re-checking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyParams {
    epsilon: f64,
    delta_sens: f64,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, delta_sens: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::NonPositiveEpsilon(epsilon));
        }
        if !delta_sens.is_finite() || delta_sens <= 0.0 {
            return Err(Error::NonPositiveSensitivity(delta_sens));
        }
        Ok(Self { epsilon, delta_sens })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Sensitivity delta: the a-priori range of the collected variable.
    pub fn sensitivity(&self) -> f64 {
        self.delta_sens
    }
}

/// The a-priori input domain `[min_x, min_x + delta]`. Mechanisms operate on
/// inputs shifted to the centered range `[-delta/2, delta/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputDomain {
    min_x: f64,
    delta_sens: f64,
}

impl InputDomain {
    pub fn new(min_x: f64, delta_sens: f64) -> Result<Self> {
        if !min_x.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "domain minimum must be finite, got {min_x}"
            )));
        }
        if !delta_sens.is_finite() || delta_sens <= 0.0 {
            return Err(Error::NonPositiveSensitivity(delta_sens));
        }
        Ok(Self { min_x, delta_sens })
    }

    pub fn min_x(&self) -> f64 {
        self.min_x
    }

    pub fn sensitivity(&self) -> f64 {
        self.delta_sens
    }

    fn center(&self) -> f64 {
        self.min_x + self.delta_sens / 2.0
    }

    /// Shift a raw input into the centered range `[-delta/2, delta/2]`.
    ///
    /// Out-of-domain inputs are rejected, never clamped; the privacy
    /// guarantee relies on the declared sensitivity being honest.
    pub fn shift_to_centered(&self, x: f64) -> Result<f64> {
        let max = self.min_x + self.delta_sens;
        if !x.is_finite() || x < self.min_x || x > max {
            return Err(Error::OutOfDomain { x, min: self.min_x, max });
        }
        Ok(x - self.center())
    }

    /// Inverse of [`shift_to_centered`](Self::shift_to_centered), for
    /// reporting privatized values on the original scale.
    pub fn unshift(&self, z: f64) -> f64 {
        z + self.center()
    }
}

/// Identifies which mechanism produced a privatized value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mechanism {
    PodiumExact,
    PodiumApprox,
    Laplace,
    Staircase,
}

impl Mechanism {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mechanism::PodiumExact => "podium-exact",
            Mechanism::PodiumApprox => "podium-approx",
            Mechanism::Laplace => "laplace",
            Mechanism::Staircase => "staircase",
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "podium-exact" => Ok(Mechanism::PodiumExact),
            "podium-approx" => Ok(Mechanism::PodiumApprox),
            "laplace" => Ok(Mechanism::Laplace),
            "staircase" => Ok(Mechanism::Staircase),
            other => Err(Error::InvalidParameter(format!("unknown mechanism `{other}`"))),
        }
    }
}

/// A noisy output together with the mechanism that produced it.
///
/// For the Podium mechanism the value always lies in the bounded support
/// `[-delta*m/2, delta*m/2]`; Laplace and Staircase outputs may be any real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivatizedValue {
    pub value: f64,
    pub mechanism: Mechanism,
}

/// Relative efficiency of two unbiased estimators: `var_1 / var_2`.
/// Values below 1 favor the first estimator.
pub fn relative_efficiency(var_1: f64, var_2: f64) -> Result<f64> {
    if !var_1.is_finite() || var_1 <= 0.0 {
        return Err(Error::NonPositiveVariance(var_1));
    }
    if !var_2.is_finite() || var_2 <= 0.0 {
        return Err(Error::NonPositiveVariance(var_2));
    }
    Ok(var_1 / var_2)
}
