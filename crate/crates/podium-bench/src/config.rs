//! Experiment configuration: mechanism selection and input distributions.

use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Result};
use podium::SolverMode;

/// Mechanisms addressable from the command line. `TruncatedLaplace` is the
/// deliberately broken negative control; it can be certified (and fails) but
/// never used to privatize data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MechanismChoice {
    PodiumExact,
    PodiumApprox,
    Laplace,
    Staircase,
    TruncatedLaplace,
}

impl MechanismChoice {
    /// Resolve a mechanism name; the bare name `podium` picks its mode from
    /// the `--mode` flag.
    pub fn parse(name: &str, mode: SolverMode) -> Result<Self> {
        Ok(match name {
            "podium" => match mode {
                SolverMode::Exact => MechanismChoice::PodiumExact,
                SolverMode::Approximate => MechanismChoice::PodiumApprox,
            },
            "podium-exact" => MechanismChoice::PodiumExact,
            "podium-approx" => MechanismChoice::PodiumApprox,
            "laplace" => MechanismChoice::Laplace,
            "staircase" => MechanismChoice::Staircase,
            "truncated-laplace" => MechanismChoice::TruncatedLaplace,
            other => bail!(
                "unknown mechanism `{other}` (expected podium, podium-exact, podium-approx, \
                 laplace, staircase, or truncated-laplace)"
            ),
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            MechanismChoice::PodiumExact => "podium-exact",
            MechanismChoice::PodiumApprox => "podium-approx",
            MechanismChoice::Laplace => "laplace",
            MechanismChoice::Staircase => "staircase",
            MechanismChoice::TruncatedLaplace => "truncated-laplace",
        }
    }
}

impl fmt::Display for MechanismChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Raw-input distribution on the centered range `[-delta/2, delta/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputDist {
    /// Beta(2,2) scaled to the centered range; variance `delta^2 / 20`.
    Beta22,
    /// Uniform over the centered range; variance `delta^2 / 12`.
    Uniform,
    /// A single fixed centered value.
    Fixed(f64),
}

impl FromStr for InputDist {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "beta22" {
            return Ok(InputDist::Beta22);
        }
        if s == "uniform" {
            return Ok(InputDist::Uniform);
        }
        if let Some(value) = s.strip_prefix("fixed=") {
            let v: f64 = value
                .parse()
                .map_err(|_| anyhow!("invalid fixed input value `{value}`"))?;
            return Ok(InputDist::Fixed(v));
        }
        bail!("unknown input distribution `{s}` (expected beta22, uniform, or fixed=<value>)")
    }
}

impl fmt::Display for InputDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputDist::Beta22 => f.write_str("beta22"),
            InputDist::Uniform => f.write_str("uniform"),
            InputDist::Fixed(v) => write!(f, "fixed={v}"),
        }
    }
}

/// A fully resolved simulation run. The seed determines the output file
/// byte for byte.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub mechanism: MechanismChoice,
    pub epsilon: f64,
    pub delta: f64,
    pub n: u64,
    pub seed: u64,
    pub dist: InputDist,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mechanism == MechanismChoice::TruncatedLaplace {
            bail!("truncated-laplace is a certification-only negative control; it cannot privatize data");
        }
        if self.n == 0 {
            bail!("sample count must be at least 1");
        }
        podium::PrivacyParams::new(self.epsilon, self.delta)?;
        if let InputDist::Fixed(v) = self.dist {
            let half = self.delta / 2.0;
            if !v.is_finite() || v.abs() > half {
                bail!("fixed input {v} lies outside the centered range [-{half}, {half}]");
            }
        }
        Ok(())
    }
}
