//! Independent numerical oracles used to validate the analytic formulas:
//! breakpoint-snapped quadrature for moments, grid certification of the
//! privacy ratio bound, asymptotic-regime checks and the relative-efficiency
//! table.
//!
//! All oracles are pure; grids can be partitioned across workers and merged
//! by max/min/sum.

use crate::baselines::{Laplace, StaircaseShape};
use crate::domain::{relative_efficiency, PrivacyParams};
use crate::error::{Error, Result};
use crate::podium::{extreme_shape_variance, solve_s_exact, PodiumShape, SolverMode};

/// An evaluable output density together with the structural facts the
/// oracles need: where it is discontinuous, and whether it is a two-level
/// density on a common support (the structure that forces every pairwise
/// ratio onto one of three discrete values).
pub trait MechanismDensity {
    /// Density of the mechanism run on input `x`, evaluated at output `z`.
    fn density(&self, x: f64, z: f64) -> Result<f64>;

    /// Discontinuity locations of `z -> density(x, z)` inside `[lo, hi]`.
    fn breakpoints(&self, x: f64, lo: f64, hi: f64) -> Result<Vec<f64>>;

    /// True when the density takes exactly two positive values on a support
    /// shared by every input.
    fn two_level(&self) -> bool {
        false
    }
}

impl MechanismDensity for PodiumShape {
    fn density(&self, x: f64, z: f64) -> Result<f64> {
        PodiumShape::density(self, x, z)
    }

    fn breakpoints(&self, x: f64, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let step = self.step(x)?;
        let half = self.half_support();
        Ok([-half, step.t, step.t + self.step_width(), half]
            .into_iter()
            .filter(|c| (lo..=hi).contains(c))
            .collect())
    }

    fn two_level(&self) -> bool {
        true
    }
}

impl MechanismDensity for Laplace {
    fn density(&self, x: f64, z: f64) -> Result<f64> {
        Ok(Laplace::density(self, x, z))
    }

    fn breakpoints(&self, x: f64, lo: f64, hi: f64) -> Result<Vec<f64>> {
        // continuous, but the kink at the center degrades quadrature orders
        Ok([x].into_iter().filter(|c| (lo..=hi).contains(c)).collect())
    }
}

impl MechanismDensity for StaircaseShape {
    fn density(&self, x: f64, z: f64) -> Result<f64> {
        Ok(StaircaseShape::density(self, x, z))
    }

    fn breakpoints(&self, x: f64, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let delta = self.params().sensitivity();
        let eps = self.params().epsilon();
        // periods past the evaluation cutoff contribute nothing
        let k_max = ((1e-15f64).ln() / -eps).ceil() as i64 + 1;
        let mut cuts = Vec::new();
        for k in 0..=k_max {
            let base = k as f64 * delta;
            for edge in [base, base + self.gamma() * delta] {
                for signed in [x + edge, x - edge] {
                    if (lo..=hi).contains(&signed) {
                        cuts.push(signed);
                    }
                }
            }
        }
        Ok(cuts)
    }
}

/// Negative control for certification: Laplace noise truncated to
/// `[-cutoff, cutoff]` and renormalized. Truncating the noise makes the
/// output support move with the input, so outputs near the edges are
/// reachable from some inputs and not others; certification must fail with
/// [`Error::ZeroDensity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedLaplaceControl {
    params: PrivacyParams,
    scale: f64,
    cutoff: f64,
    kept_mass: f64,
}

impl TruncatedLaplaceControl {
    pub fn new(params: PrivacyParams, cutoff: f64) -> Result<Self> {
        if !cutoff.is_finite() || cutoff <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "truncation cutoff must be positive, got {cutoff}"
            )));
        }
        let scale = params.sensitivity() / params.epsilon();
        Ok(Self {
            params,
            scale,
            cutoff,
            kept_mass: -(-cutoff / scale).exp_m1(),
        })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }
}

impl MechanismDensity for TruncatedLaplaceControl {
    fn density(&self, x: f64, z: f64) -> Result<f64> {
        if (z - x).abs() > self.cutoff {
            return Ok(0.0);
        }
        Ok(0.5 / self.scale * (-(z - x).abs() / self.scale).exp() / self.kept_mass)
    }

    fn breakpoints(&self, x: f64, lo: f64, hi: f64) -> Result<Vec<f64>> {
        Ok([x - self.cutoff, x, x + self.cutoff]
            .into_iter()
            .filter(|c| (lo..=hi).contains(c))
            .collect())
    }
}

/// Outcome of a grid certification run.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub epsilon: f64,
    pub max_log_ratio: f64,
    pub min_log_ratio: f64,
    /// Number of (input, output) density evaluations.
    pub grid_points: usize,
    /// Output grid points where the worst pairwise log ratio exceeds
    /// `epsilon + tol`, plus any observed ratio of a two-level density that
    /// does not match one of the three admissible values.
    pub violations: usize,
    /// Distinct pairwise ratio values, collected for two-level densities.
    pub ratio_set: Option<Vec<f64>>,
}

/// Evaluate all pairwise density ratios over `x_grid` x `z_grid` and report
/// the extrema, the privacy violations, and (for two-level densities) the
/// observed ratio set checked against `{e^-eps, 1, e^eps}` within `tol`
/// relative.
///
/// The worst pair at each output point is the (argmax, argmin) pair, so the
/// scan keeps per-point extrema instead of materializing all pairs.
pub fn certify_ratio<D: MechanismDensity + ?Sized>(
    density: &D,
    params: &PrivacyParams,
    x_grid: &[f64],
    z_grid: &[f64],
    tol: f64,
) -> Result<RatioReport> {
    if x_grid.is_empty() || z_grid.is_empty() {
        return Err(Error::InvalidParameter("certification grids must be non-empty".into()));
    }
    let eps = params.epsilon();
    let mut max_log_ratio = 0.0f64;
    let mut violations = 0usize;
    let mut levels: Vec<f64> = Vec::new();

    for &z in z_grid {
        let mut f_min = f64::INFINITY;
        let mut f_max = 0.0f64;
        let mut x_zero = None;
        let mut x_pos = None;
        for &x in x_grid {
            let f = density.density(x, z)?;
            if f == 0.0 {
                x_zero.get_or_insert(x);
                continue;
            }
            x_pos.get_or_insert(x);
            f_min = f_min.min(f);
            f_max = f_max.max(f);
            if density.two_level() {
                record_level(&mut levels, f, tol);
            }
        }
        match (x_zero, x_pos) {
            (Some(x_zero), Some(x_pos)) => {
                return Err(Error::ZeroDensity { x_zero, x_pos, z });
            }
            (_, None) => continue, // outside every support: no pairs to compare
            _ => {}
        }
        let log_ratio = f_max.ln() - f_min.ln();
        max_log_ratio = max_log_ratio.max(log_ratio);
        if log_ratio > eps + tol {
            violations += 1;
        }
    }

    let ratio_set = if density.two_level() {
        let mut ratios = Vec::new();
        for &hi in &levels {
            for &lo in &levels {
                record_level(&mut ratios, hi / lo, tol);
            }
        }
        ratios.sort_by(f64::total_cmp);
        let admissible = [(-eps).exp(), 1.0, eps.exp()];
        for &r in &ratios {
            if !admissible.iter().any(|a| (r - a).abs() <= tol * a) {
                violations += 1;
            }
        }
        Some(ratios)
    } else {
        None
    };

    Ok(RatioReport {
        epsilon: eps,
        max_log_ratio,
        min_log_ratio: -max_log_ratio,
        grid_points: x_grid.len() * z_grid.len(),
        violations,
        ratio_set,
    })
}

fn record_level(levels: &mut Vec<f64>, value: f64, tol: f64) {
    if !levels.iter().any(|l| (value - l).abs() <= tol * l.abs()) {
        levels.push(value);
    }
}

/// A quadrature estimate together with its error estimate from panel
/// doubling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceOracleResult {
    pub value: f64,
    pub abs_error_estimate: f64,
}

/// `∫ (z - x)^2 density(x, z) dz` over `support` by breakpoint-snapped
/// composite Simpson quadrature; exact for piecewise-constant densities.
pub fn variance_oracle<D: MechanismDensity + ?Sized>(
    density: &D,
    x: f64,
    support: (f64, f64),
    n_panels: usize,
    tol: f64,
) -> Result<VarianceOracleResult> {
    oracle_moment(density, x, support, n_panels, tol, &|z, f| (z - x) * (z - x) * f)
}

/// `∫ z density(x, z) dz`, the mean of the output distribution.
pub fn mean_oracle<D: MechanismDensity + ?Sized>(
    density: &D,
    x: f64,
    support: (f64, f64),
    n_panels: usize,
    tol: f64,
) -> Result<VarianceOracleResult> {
    oracle_moment(density, x, support, n_panels, tol, &|z, f| z * f)
}

/// `∫ density(x, z) dz`, the total mass.
pub fn mass_oracle<D: MechanismDensity + ?Sized>(
    density: &D,
    x: f64,
    support: (f64, f64),
    n_panels: usize,
    tol: f64,
) -> Result<VarianceOracleResult> {
    oracle_moment(density, x, support, n_panels, tol, &|_, f| f)
}

fn oracle_moment<D: MechanismDensity + ?Sized>(
    density: &D,
    x: f64,
    support: (f64, f64),
    n_panels: usize,
    tol: f64,
    integrand: &dyn Fn(f64, f64) -> f64,
) -> Result<VarianceOracleResult> {
    if n_panels < 1000 {
        return Err(Error::InvalidParameter(format!(
            "at least 1000 quadrature panels are required, got {n_panels}"
        )));
    }
    let coarse = piecewise_simpson(density, x, support, n_panels, integrand)?;
    let fine = piecewise_simpson(density, x, support, 2 * n_panels, integrand)?;
    let abs_error_estimate = (fine - coarse).abs();
    if abs_error_estimate > tol {
        return Err(Error::ToleranceNotMet { requested: tol, achieved: abs_error_estimate });
    }
    Ok(VarianceOracleResult { value: fine, abs_error_estimate })
}

fn piecewise_simpson<D: MechanismDensity + ?Sized>(
    density: &D,
    x: f64,
    (lo, hi): (f64, f64),
    n_panels: usize,
    integrand: &dyn Fn(f64, f64) -> f64,
) -> Result<f64> {
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::InvalidParameter(format!(
            "integration support [{lo}, {hi}] must be a finite non-empty interval"
        )));
    }
    let mut cuts = density.breakpoints(x, lo, hi)?;
    cuts.retain(|c| c.is_finite() && *c > lo && *c < hi);
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let total_width = hi - lo;
    let mut acc = 0.0;
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let width = b - a;
        if width <= 0.0 {
            continue;
        }
        // One-sided limits at the segment ends: the density is continuous on
        // the open segment, so nudge the first and last node inward.
        let nudge = width * 1e-12;
        let panels = ((n_panels as f64 * width / total_width).ceil() as usize).max(2);
        let h = width / panels as f64;
        for i in 0..panels {
            let za = a + i as f64 * h;
            let zb = if i + 1 == panels { b } else { za + h };
            let left = if i == 0 { za + nudge } else { za };
            let right = if i + 1 == panels { zb - nudge } else { zb };
            let mid = 0.5 * (za + zb);
            let fa = integrand(left, density.density(x, left)?);
            let fm = integrand(mid, density.density(x, mid)?);
            let fb = integrand(right, density.density(x, right)?);
            acc += (zb - za) / 6.0 * (fa + 4.0 * fm + fb);
        }
    }
    Ok(acc)
}

/// Asymptotic regime selector for [`asymptote_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `eps <= 0.01`: the normalized variance `V * eps^2 / delta^2`
    /// approaches 4/3.
    High,
    /// `eps >= 15`: the normalized variance `V * e^(2 eps / 3) / delta^2` of
    /// the `s = eps/3` shape approaches 5/12.
    Low,
}

/// Normalized worst-case Podium variance in an asymptotic regime.
///
/// The high-privacy check uses the exact solver; the low-privacy check uses
/// the `eps/3` shape, whose normalization constant the regime limit belongs
/// to.
pub fn asymptote_check(regime: Regime, epsilon: f64) -> Result<f64> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::NonPositiveEpsilon(epsilon));
    }
    match regime {
        Regime::High => {
            if epsilon > 0.01 {
                return Err(Error::RegimeMismatch { regime: "high-privacy", epsilon });
            }
            let s = solve_s_exact(epsilon)?;
            Ok(extreme_shape_variance(epsilon, 1.0, s) * epsilon * epsilon)
        }
        Regime::Low => {
            if epsilon < 15.0 {
                return Err(Error::RegimeMismatch { regime: "low-privacy", epsilon });
            }
            Ok(extreme_shape_variance(epsilon, 1.0, epsilon / 3.0) * (2.0 * epsilon / 3.0).exp())
        }
    }
}

/// One row of relative efficiencies at a given budget. Podium variances are
/// worst case (`x = delta/2`, exact solver) except where the name says
/// otherwise: `pm0` is the centered shape, `pm3` the `eps/3` approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyRow {
    pub epsilon: f64,
    pub pm3_over_pm: f64,
    pub pm0_over_pm: f64,
    pub pm_over_lm: f64,
    pub sm_over_lm: f64,
    pub pm0_over_sm: f64,
    pub pm_over_sm: f64,
}

pub fn efficiency_table(epsilons: &[f64]) -> Result<Vec<EfficiencyRow>> {
    if epsilons.is_empty() {
        return Err(Error::EmptyEpsilonList);
    }
    epsilons
        .iter()
        .map(|&epsilon| {
            let params = PrivacyParams::new(epsilon, 1.0)?;
            let exact = PodiumShape::new(params, SolverMode::Exact)?;
            let pm = exact.worst_case_variance();
            let pm0 = exact.center_variance();
            let pm3 = extreme_shape_variance(epsilon, 1.0, epsilon / 3.0);
            let lm = Laplace::new(params).variance();
            let sm = StaircaseShape::new(params)?.variance();
            Ok(EfficiencyRow {
                epsilon,
                pm3_over_pm: relative_efficiency(pm3, pm)?,
                pm0_over_pm: relative_efficiency(pm0, pm)?,
                pm_over_lm: relative_efficiency(pm, lm)?,
                sm_over_lm: relative_efficiency(sm, lm)?,
                pm0_over_sm: relative_efficiency(pm0, sm)?,
                pm_over_sm: relative_efficiency(pm, sm)?,
            })
        })
        .collect()
}
