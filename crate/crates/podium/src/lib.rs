//! Epsilon-differentially-private noise mechanisms for bounded scalars.
//!
//! The centerpiece is the Podium mechanism, which draws noise from a finite
//! mixture of three uniforms on a bounded support instead of from the whole
//! real line, cutting the noise variance well below the Laplace and
//! Staircase baselines while keeping the exact same privacy guarantee. Both
//! baselines are included with samplers, analytic densities and variances,
//! along with numerical oracles ([`verify`]) that certify the privacy ratio
//! bound and cross-check every closed form by quadrature.

pub mod baselines;
pub mod domain;
pub mod error;
pub mod podium;
pub mod verify;

pub use baselines::{Laplace, StaircaseShape};
pub use domain::{relative_efficiency, InputDomain, Mechanism, PrivacyParams, PrivatizedValue};
pub use error::{Error, Result};
pub use podium::{
    extreme_shape_variance, lookup_table, solve_s_approx, solve_s_exact, stationarity_residual,
    variance_curvature, variance_gradient, LookupRow, PodiumShape, PodiumStep, SolverMode,
};
pub use verify::{
    asymptote_check, certify_ratio, efficiency_table, mass_oracle, mean_oracle, variance_oracle,
    EfficiencyRow, MechanismDensity, RatioReport, Regime, TruncatedLaplaceControl,
    VarianceOracleResult,
};
