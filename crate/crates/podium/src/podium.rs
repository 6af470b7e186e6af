//! The Podium mechanism: epsilon-differentially-private noise from a finite
//! mixture of three uniform components.
//!
//! The noise density is a two-level step function on the bounded support
//! `[-delta*m/2, delta*m/2]`: a raised step of width `w` at location `t`
//! over a low floor, with the two levels `d` and `d*e^eps` fixed by the
//! privacy budget. The margin `m`, width `w` and floor `d` are computed
//! once offline by minimizing the variance of the most off-center shape;
//! only the step location `t` moves with the input so that the mixture mean
//! equals the input exactly.
//!
//! The offline optimization reduces to a quartic in `e^s`, where `s` is an
//! unconstrained reparameterization of the step location of the extreme
//! right-hand shape. [`solve_s_exact`] evaluates the closed-form root and
//! polishes it with Newton steps; [`solve_s_approx`] uses the linear
//! approximation `s = eps / 3`, which costs a small amount of efficiency and
//! no privacy.

use rand::Rng;

use crate::domain::{Mechanism, PrivacyParams, PrivatizedValue};
use crate::error::{Error, Result};

/// How the step parameter `s` of the extreme shape is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverMode {
    /// Closed-form quartic root, Newton-polished to machine precision.
    #[default]
    Exact,
    /// The linear approximation `s = eps / 3`.
    Approximate,
}

/// Probabilities left this far outside [0, 1] are rounding noise and are
/// clamped; anything worse is an internal inconsistency.
const PROB_TOL: f64 = 1e-12;

const LN_SQRT_2: f64 = core::f64::consts::LN_2 / 2.0;

fn check_epsilon(epsilon: f64) -> Result<f64> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::NonPositiveEpsilon(epsilon));
    }
    Ok(epsilon)
}

/// Derivative of the extreme-shape variance with respect to `s`, up to a
/// positive factor: `-2e^(eps-s) + 2e^(s+eps) - e^(2eps-2s) + e^(2s)`.
/// Its root is the variance-optimal step parameter.
pub fn variance_gradient(epsilon: f64, s: f64) -> f64 {
    -2.0 * (epsilon - s).exp() + 2.0 * (s + epsilon).exp() - (2.0 * epsilon - 2.0 * s).exp()
        + (2.0 * s).exp()
}

/// Second derivative of the extreme-shape variance in `s`:
/// `4e^eps (cosh(2s - eps) + cosh(s))`, positive everywhere, so the
/// stationary point is the global minimum.
pub fn variance_curvature(epsilon: f64, s: f64) -> f64 {
    4.0 * epsilon.exp() * ((2.0 * s - epsilon).cosh() + s.cosh())
}

/// [`variance_gradient`] scaled by the summed magnitude of its four terms.
///
/// The raw gradient grows like `e^(2*eps)`, so its absolute value at the best
/// representable root is dominated by the scale of the terms, not by the
/// quality of the root. The scaled residual is ~1e-15 for a machine-accurate
/// root at any epsilon.
pub fn stationarity_residual(epsilon: f64, s: f64) -> f64 {
    let t1 = -2.0 * (epsilon - s).exp();
    let t2 = 2.0 * (s + epsilon).exp();
    let t3 = -(2.0 * epsilon - 2.0 * s).exp();
    let t4 = (2.0 * s).exp();
    (t1 + t2 + t3 + t4).abs() / (t1.abs() + t2.abs() + t3.abs() + t4.abs())
}

/// Variance of the extreme right-hand shape for an arbitrary step parameter
/// `s`: `delta^2/12 * (cosh(2s - eps) + 4cosh(s) + 3) / (cosh(eps) - 1)`.
pub fn extreme_shape_variance(epsilon: f64, delta: f64, s: f64) -> f64 {
    // cosh(eps) - 1 = 2 sinh^2(eps/2), stable for small eps
    let denom = 2.0 * (0.5 * epsilon).sinh().powi(2);
    delta * delta / 12.0 * ((2.0 * s - epsilon).cosh() + 4.0 * s.cosh() + 3.0) / denom
}

/// Closed-form root of the optimality quartic. Returns `None` when the f64
/// evaluation degenerates (possible exactly at the branch point
/// `eps = log(sqrt 2)`, where two radicands vanish together).
fn closed_form_s(epsilon: f64) -> Option<f64> {
    let e1 = epsilon.exp();
    let e2 = (2.0 * epsilon).exp();
    // 4(e^{2eps} - e^{4eps}) = -4 e^{2eps} expm1(2eps); the cube root of the
    // negative argument is the real (negative) one.
    let a = -(4.0 * e2 * (2.0 * epsilon).exp_m1()).cbrt();
    let inner = a + e2;
    if inner <= 0.0 {
        return None;
    }
    let root_inner = inner.sqrt();
    let b = 2.0 * (2.0 * e1 - (3.0 * epsilon).exp()) / root_inner;
    let num = if epsilon >= LN_SQRT_2 {
        let radicand = -b + 2.0 * e2 - a;
        if radicand < 0.0 {
            return None;
        }
        -root_inner - e1 + radicand.sqrt()
    } else {
        let radicand = b + 2.0 * e2 - a;
        if radicand < 0.0 {
            return None;
        }
        root_inner - e1 + radicand.sqrt()
    };
    if num > 0.0 && num.is_finite() {
        Some((num / 2.0).ln())
    } else {
        None
    }
}

/// Newton-polish a starting value to the root of the optimality quartic.
///
/// In `y = e^s` the gradient is the quartic `y^4 + 2e^eps y^3 - 2e^eps y -
/// e^{2eps}`; substituting `u = y e^{-eps/3}` and dividing by `e^{2eps}`
/// yields `h(u) = 2u^3 - 1 + e^{-2eps/3} (u^4 - 2u)`, whose root stays in
/// (0.79, 1] for every epsilon, so the iteration is well conditioned at any
/// budget. The raw closed form loses ~e^{2eps/3} ulps to cancellation for
/// large epsilon; polishing restores full precision.
fn refine_root(epsilon: f64, s0: f64) -> f64 {
    let scale = (-2.0 * epsilon / 3.0).exp();
    let mut u = (s0 - epsilon / 3.0).exp();
    if !u.is_finite() || u <= 0.0 {
        u = 1.0;
    }
    for _ in 0..32 {
        let h = 2.0 * u * u * u - 1.0 + scale * (u * u * u * u - 2.0 * u);
        let dh = 6.0 * u * u + scale * (4.0 * u * u * u - 2.0);
        let step = h / dh;
        u -= step;
        if step.abs() <= f64::EPSILON * u.abs() {
            break;
        }
    }
    epsilon / 3.0 + u.ln()
}

/// Variance-optimal step parameter for the extreme shape.
pub fn solve_s_exact(epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let start = closed_form_s(epsilon).unwrap_or(epsilon / 3.0);
    Ok(refine_root(epsilon, start))
}

/// The `s = eps / 3` approximation. Changes efficiency slightly, never
/// privacy.
pub fn solve_s_approx(epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(epsilon / 3.0)
}

/// Precomputed offline parameters of the Podium noise family.
///
/// Immutable; compute once per `(epsilon, delta)` before collection starts
/// and share freely across threads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PodiumShape {
    params: PrivacyParams,
    mode: SolverMode,
    s: f64,
    m: f64,
    w: f64,
    d: f64,
    /// `d * e^eps`, the raised level, computed once so density evaluation is
    /// bit-stable.
    d_high: f64,
    /// `delta * m / 2`.
    half_support: f64,
}

impl PodiumShape {
    pub fn new(params: PrivacyParams, mode: SolverMode) -> Result<Self> {
        let eps = params.epsilon();
        let delta = params.sensitivity();
        let s = match mode {
            SolverMode::Exact => solve_s_exact(eps)?,
            SolverMode::Approximate => solve_s_approx(eps)?,
        };
        let es = s.exp();
        let sum = 1.0 + es + eps.exp() + (eps - s).exp();
        let m = sum / eps.exp_m1();
        let w = delta * m / (1.0 + es);
        let d = (1.0 + (-s).exp()) * (1.0 + es) / (delta * m * sum);
        if !(m.is_finite() && w.is_finite() && d.is_finite() && d > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "shape parameters overflow double precision at epsilon = {eps}"
            )));
        }
        Ok(Self {
            params,
            mode,
            s,
            m,
            w,
            d,
            d_high: d * eps.exp(),
            half_support: delta * m / 2.0,
        })
    }

    pub fn params(&self) -> &PrivacyParams {
        &self.params
    }

    pub fn epsilon(&self) -> f64 {
        self.params.epsilon()
    }

    pub fn sensitivity(&self) -> f64 {
        self.params.sensitivity()
    }

    pub fn mode(&self) -> SolverMode {
        self.mode
    }

    /// Step parameter of the extreme right-hand shape.
    pub fn s(&self) -> f64 {
        self.s
    }

    /// Multiplicative margin on delta; the support is `[-delta*m/2, delta*m/2]`.
    pub fn margin(&self) -> f64 {
        self.m
    }

    /// Step width, in data units.
    pub fn step_width(&self) -> f64 {
        self.w
    }

    /// Low density level; the raised level is `d * e^eps`.
    pub fn low_density(&self) -> f64 {
        self.d
    }

    pub fn high_density(&self) -> f64 {
        self.d_high
    }

    pub fn half_support(&self) -> f64 {
        self.half_support
    }

    pub fn mechanism(&self) -> Mechanism {
        match self.mode {
            SolverMode::Exact => Mechanism::PodiumExact,
            SolverMode::Approximate => Mechanism::PodiumApprox,
        }
    }

    fn check_input(&self, x: f64) -> Result<()> {
        let half = self.params.sensitivity() / 2.0;
        if !x.is_finite() || x.abs() > half {
            return Err(Error::InputOutOfRange { x, half });
        }
        Ok(())
    }

    /// Per-input online parameters: step location and component
    /// probabilities of the three-uniform mixture centered at `x`.
    pub fn step(&self, x: f64) -> Result<PodiumStep> {
        self.check_input(x)?;
        let em1 = self.epsilon().exp_m1();
        let wd = self.w * self.d * em1;
        let t = (2.0 * x - self.w * wd) / (2.0 * wd);
        let p1 = clamp_probability(self.d * (t + self.half_support))?;
        let p2 = self.d_high * self.w;
        let p3 = clamp_probability(1.0 - p1 - p2)?;
        Ok(PodiumStep { t, p1, p2, p3 })
    }

    fn component_bounds(&self, step: &PodiumStep) -> [(f64, f64); 3] {
        [
            (-self.half_support, step.t),
            (step.t, step.t + self.w),
            (step.t + self.w, self.half_support),
        ]
    }

    /// Draw one privatized value. Consumes exactly two uniforms: one to pick
    /// the mixture component, one for the position inside it.
    pub fn sample<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> Result<PrivatizedValue> {
        let step = self.step(x)?;
        let pick: f64 = rng.gen();
        let pos: f64 = rng.gen();
        let bounds = self.component_bounds(&step);
        let (lo, hi) = if pick < step.p1 {
            bounds[0]
        } else if pick < step.p1 + step.p2 {
            bounds[1]
        } else {
            bounds[2]
        };
        Ok(PrivatizedValue {
            value: lo + pos * (hi - lo),
            mechanism: self.mechanism(),
        })
    }

    /// Density of the shape centered at `x`, evaluated at output `z`.
    ///
    /// Intervals are closed on the left and open on the right, except the
    /// rightmost which is closed on both ends; only the two levels `d` and
    /// `d*e^eps` ever occur inside the support.
    pub fn density(&self, x: f64, z: f64) -> Result<f64> {
        let step = self.step(x)?;
        if !(-self.half_support..=self.half_support).contains(&z) {
            return Ok(0.0);
        }
        if z >= step.t && z < step.t + self.w {
            Ok(self.d_high)
        } else {
            Ok(self.d)
        }
    }

    /// Variance of the mixture centered at `x`, via the component-wise
    /// second moments of the three uniforms.
    pub fn variance_at(&self, x: f64) -> Result<f64> {
        let step = self.step(x)?;
        let mut second_moment = 0.0;
        for ((lo, hi), p) in self.component_bounds(&step).into_iter().zip(step.probabilities()) {
            let mean = 0.5 * (lo + hi);
            let var = (hi - lo) * (hi - lo) / 12.0;
            second_moment += p * (mean * mean + var);
        }
        Ok(second_moment - x * x)
    }

    /// Closed-form variance of the centered shape (`x = 0`):
    /// `(d/12) (delta^3 m^3 + w^3 (e^eps - 1))`.
    pub fn center_variance(&self) -> f64 {
        let delta = self.sensitivity();
        self.d / 12.0
            * (delta.powi(3) * self.m.powi(3) + self.w.powi(3) * self.epsilon().exp_m1())
    }

    /// Closed-form variance of the most off-center shape (`x = ±delta/2`).
    pub fn worst_case_variance(&self) -> f64 {
        extreme_shape_variance(self.epsilon(), self.sensitivity(), self.s)
    }
}

fn clamp_probability(p: f64) -> Result<f64> {
    if p < 0.0 {
        if p > -PROB_TOL {
            return Ok(0.0);
        }
        return Err(Error::InconsistentMixture { p3: p });
    }
    Ok(p)
}

/// Step location and mixture-component probabilities for one input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PodiumStep {
    /// Left edge of the raised step, in data units.
    pub t: f64,
    /// Probability of the low component left of the step.
    pub p1: f64,
    /// Probability of the raised step.
    pub p2: f64,
    /// Probability of the low component right of the step.
    pub p3: f64,
}

impl PodiumStep {
    pub fn probabilities(&self) -> [f64; 3] {
        [self.p1, self.p2, self.p3]
    }
}

/// One row of the practitioner lookup table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LookupRow {
    pub epsilon: f64,
    pub exp_epsilon: f64,
    pub d_delta: f64,
    pub w_over_delta: f64,
    pub m: f64,
    pub s: f64,
}

/// Shape parameters for each epsilon, in exact mode. The `d_delta` and
/// `w_over_delta` columns are normalized so the table is sensitivity
/// agnostic.
pub fn lookup_table(epsilons: &[f64], delta: f64) -> Result<Vec<LookupRow>> {
    if epsilons.is_empty() {
        return Err(Error::EmptyEpsilonList);
    }
    epsilons
        .iter()
        .map(|&epsilon| {
            let params = PrivacyParams::new(epsilon, delta)?;
            let shape = PodiumShape::new(params, SolverMode::Exact)?;
            Ok(LookupRow {
                epsilon,
                exp_epsilon: epsilon.exp(),
                d_delta: shape.low_density() * delta,
                w_over_delta: shape.step_width() / delta,
                m: shape.margin(),
                s: shape.s(),
            })
        })
        .collect()
}
