//! The Laplace mechanism: noise with density `(1/2b) e^(-|z|/b)` at scale
//! `b = delta / eps`.

use rand::Rng;

use crate::domain::{Mechanism, PrivacyParams, PrivatizedValue};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Laplace {
    params: PrivacyParams,
    scale: f64,
}

impl Laplace {
    pub fn new(params: PrivacyParams) -> Self {
        let scale = params.sensitivity() / params.epsilon();
        Self { params, scale }
    }

    pub fn params(&self) -> &PrivacyParams {
        &self.params
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Inverse-transform sampler: a random sign and the log of a uniform.
    /// Consumes exactly two uniforms.
    pub fn sample<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> PrivatizedValue {
        let sign_draw: f64 = rng.gen();
        let mag_draw: f64 = rng.gen();
        let magnitude = -self.scale * (1.0 - mag_draw).ln();
        let noise = if sign_draw < 0.5 { -magnitude } else { magnitude };
        PrivatizedValue {
            value: x + noise,
            mechanism: Mechanism::Laplace,
        }
    }

    /// Density centered at `x`, evaluated at `z`.
    pub fn density(&self, x: f64, z: f64) -> f64 {
        0.5 / self.scale * (-(z - x).abs() / self.scale).exp()
    }

    /// `2 delta^2 / eps^2`.
    pub fn variance(&self) -> f64 {
        let b = self.scale;
        2.0 * b * b
    }
}
