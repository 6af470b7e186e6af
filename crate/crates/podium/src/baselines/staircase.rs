//! The Staircase mechanism: a geometric mixture of uniform layers.
//!
//! The noise density is symmetric and piecewise constant: on the base period
//! `[0, delta)` it takes the value `a(gamma)` up to the split point
//! `gamma * delta` and `e^-eps a(gamma)` after it; each following period
//! repeats the profile scaled by another factor `e^-eps`. The split point
//! `gamma` below is the variance-minimizing one.

use rand::Rng;

use crate::domain::{Mechanism, PrivacyParams, PrivatizedValue};
use crate::error::{Error, Result};

/// Periods whose geometric weight falls below this are dropped from density
/// evaluation; below double-precision relevance.
const TAIL_CUTOFF: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaircaseShape {
    params: PrivacyParams,
    gamma: f64,
    a_gamma: f64,
    /// `a(gamma) * e^-eps`, the lowered level of the base period.
    a_low: f64,
    /// Probability that a draw lands in the first (raised) part of its period.
    first_part_prob: f64,
}

impl StaircaseShape {
    pub fn new(params: PrivacyParams) -> Result<Self> {
        let eps = params.epsilon();
        let delta = params.sensitivity();
        let q = (-eps).exp();
        let one_minus_q = -(-eps).exp_m1();
        // The closed-form split point is
        //   -q/(1-q) + (q - 2q^2 + 2q^4 - q^5)^(1/3) / (2^(1/3) (1-q)^2);
        // the radicand factors as q(1+q)(1-q)^3, which removes the
        // small-epsilon cancellation.
        let gamma = ((q * (1.0 + q) / 2.0).cbrt() - q) / one_minus_q;
        let a_gamma = one_minus_q / (2.0 * delta * (gamma + q * (1.0 - gamma)));
        if !(gamma > 0.0 && gamma < 1.0 && a_gamma.is_finite()) {
            // e^-eps underflows to zero near eps = 745 and the split point
            // collapses
            return Err(Error::InvalidParameter(format!(
                "staircase split point degenerates at epsilon = {eps}"
            )));
        }
        Ok(Self {
            params,
            gamma,
            a_gamma,
            a_low: a_gamma * q,
            first_part_prob: gamma / (gamma + q * (1.0 - gamma)),
        })
    }

    pub fn params(&self) -> &PrivacyParams {
        &self.params
    }

    /// Split point of each period, in (0, 1).
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Peak density `a(gamma)`.
    pub fn a_gamma(&self) -> f64 {
        self.a_gamma
    }

    /// Density of the noise variable at `z`. Ties at `z = 0` resolve to the
    /// nonnegative branch; the geometric tail is truncated once its weight
    /// drops below 1e-15.
    pub fn noise_density(&self, z: f64) -> f64 {
        let z = z.abs();
        let eps = self.params.epsilon();
        let delta = self.params.sensitivity();
        let period = (z / delta).floor();
        let weight = (-period * eps).exp();
        if weight < TAIL_CUTOFF {
            return 0.0;
        }
        let within = z - period * delta;
        let level = if within < self.gamma * delta { self.a_gamma } else { self.a_low };
        weight * level
    }

    /// Density of the mechanism run on input `x`, evaluated at output `z`.
    pub fn density(&self, x: f64, z: f64) -> f64 {
        self.noise_density(z - x)
    }

    /// Draw one privatized value: a sign, a geometric period, a within-period
    /// part, and a position. Consumes exactly four uniforms (the geometric
    /// uses one via its inverse CDF).
    pub fn sample<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> PrivatizedValue {
        let eps = self.params.epsilon();
        let delta = self.params.sensitivity();
        let u_sign: f64 = rng.gen();
        let u_period: f64 = rng.gen();
        let u_part: f64 = rng.gen();
        let u_pos: f64 = rng.gen();

        let sign = if u_sign < 0.5 { -1.0 } else { 1.0 };
        // P(G = k) = e^(-k eps) (1 - e^-eps) on {0, 1, 2, ...}
        let period = ((1.0 - u_period).ln() / -eps).floor();
        let offset = if u_part < self.first_part_prob {
            u_pos * self.gamma * delta
        } else {
            (self.gamma + u_pos * (1.0 - self.gamma)) * delta
        };
        PrivatizedValue {
            value: x + sign * (period * delta + offset),
            mechanism: Mechanism::Staircase,
        }
    }

    /// `delta^2 (2^(-2/3) e^(-2eps/3) (1 + e^-eps)^(2/3) + e^-eps) / (1 - e^-eps)^2`.
    pub fn variance(&self) -> f64 {
        let eps = self.params.epsilon();
        let delta = self.params.sensitivity();
        let q = (-eps).exp();
        let one_minus_q = -(-eps).exp_m1();
        delta * delta
            * (2.0f64.powf(-2.0 / 3.0) * (-2.0 * eps / 3.0).exp() * (1.0 + q).powf(2.0 / 3.0) + q)
            / (one_minus_q * one_minus_q)
    }
}
