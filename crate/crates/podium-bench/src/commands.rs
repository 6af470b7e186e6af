//! The operations behind the CLI subcommands, written against `io::Write`
//! so tests can run them in memory.

use std::fmt;
use std::io::Write;

use anyhow::{Context, Result};
use rand::Rng;

use podium::{
    certify_ratio, efficiency_table, lookup_table, Error as PodiumError, Laplace,
    MechanismDensity, PodiumShape, PrivacyParams, PrivatizedValue, RatioReport, SolverMode,
    StaircaseShape, TruncatedLaplaceControl,
};

use crate::config::{ExperimentConfig, InputDist, MechanismChoice};
use crate::input::{draw_input, record_rng};

/// The 55-value budget grid of the shape lookup table: 0.1 to 5.0 in steps
/// of 0.1, then 6 to 10 in steps of 1.
pub fn default_table_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (1..=50).map(|i| i as f64 / 10.0).collect();
    grid.extend((6..=10).map(|i| i as f64));
    grid
}

/// The budget grid of the relative-efficiency table.
pub fn default_efficiency_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
    grid.extend([
        3.0f64.ln(),
        16.0f64.ln(),
        32.0f64.ln(),
        5.0,
        10.0,
        20.0,
        30.0,
        40.0,
        50.0,
    ]);
    grid
}

/// Shape lookup table as CSV, 17 significant digits per value.
pub fn write_table(epsilons: &[f64], delta: f64, out: &mut dyn Write) -> Result<()> {
    let rows = lookup_table(epsilons, delta)?;
    writeln!(out, "epsilon,exp_epsilon,d_delta,w_over_delta,m,s")?;
    for r in rows {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.epsilon, r.exp_epsilon, r.d_delta, r.w_over_delta, r.m, r.s
        )?;
    }
    Ok(())
}

/// Relative-efficiency table as CSV, four decimals per ratio.
pub fn write_efficiency(epsilons: &[f64], out: &mut dyn Write) -> Result<()> {
    let rows = efficiency_table(epsilons)?;
    writeln!(
        out,
        "epsilon,pm3_over_pm,pm0_over_pm,pm_over_lm,sm_over_lm,pm0_over_sm,pm_over_sm"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}",
            r.epsilon,
            r.pm3_over_pm,
            r.pm0_over_pm,
            r.pm_over_lm,
            r.sm_over_lm,
            r.pm0_over_sm,
            r.pm_over_sm
        )?;
    }
    Ok(())
}

enum Privatizer {
    Podium(PodiumShape),
    Laplace(Laplace),
    Staircase(StaircaseShape),
}

impl Privatizer {
    fn build(mechanism: MechanismChoice, params: PrivacyParams) -> Result<Self> {
        Ok(match mechanism {
            MechanismChoice::PodiumExact => {
                Privatizer::Podium(PodiumShape::new(params, SolverMode::Exact)?)
            }
            MechanismChoice::PodiumApprox => {
                Privatizer::Podium(PodiumShape::new(params, SolverMode::Approximate)?)
            }
            MechanismChoice::Laplace => Privatizer::Laplace(Laplace::new(params)),
            MechanismChoice::Staircase => Privatizer::Staircase(StaircaseShape::new(params)?),
            MechanismChoice::TruncatedLaplace => {
                anyhow::bail!("the negative control cannot privatize data")
            }
        })
    }

    fn privatize<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> Result<PrivatizedValue> {
        Ok(match self {
            Privatizer::Podium(shape) => shape.sample(x, rng)?,
            Privatizer::Laplace(lm) => lm.sample(x, rng),
            Privatizer::Staircase(sm) => sm.sample(x, rng),
        })
    }

    /// Noise variance averaged over the input distribution.
    fn mean_noise_variance(&self, dist: InputDist, delta: f64) -> Result<f64> {
        match self {
            Privatizer::Laplace(lm) => Ok(lm.variance()),
            Privatizer::Staircase(sm) => Ok(sm.variance()),
            Privatizer::Podium(shape) => match dist {
                InputDist::Fixed(v) => Ok(shape.variance_at(v)?),
                InputDist::Beta22 | InputDist::Uniform => {
                    let pdf = |x: f64| match dist {
                        InputDist::Beta22 => {
                            let u = x / delta + 0.5;
                            6.0 * u * (1.0 - u) / delta
                        }
                        _ => 1.0 / delta,
                    };
                    // composite Simpson over the input range; the integrand
                    // is a low-degree polynomial in x
                    let half = delta / 2.0;
                    let panels = 400;
                    let h = delta / panels as f64;
                    let mut acc = 0.0;
                    for i in 0..panels {
                        let a = -half + i as f64 * h;
                        let b = if i + 1 == panels { half } else { a + h };
                        let m = 0.5 * (a + b);
                        let f = |x: f64| -> Result<f64> {
                            Ok(shape.variance_at(x)? * pdf(x))
                        };
                        acc += (b - a) / 6.0 * (f(a)? + 4.0 * f(m)? + f(b)?);
                    }
                    Ok(acc)
                }
            },
        }
    }
}

/// Summary line of a simulation run, printed as machine-parseable
/// `key=value` pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationSummary {
    pub config: ExperimentConfig,
    pub empirical_mean: f64,
    pub empirical_variance: f64,
    pub expected_variance: f64,
}

impl fmt::Display for SimulationSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "mechanism={} epsilon={} delta={} n={} seed={} dist={} empirical_mean={} empirical_var={} expected_var={}",
            self.config.mechanism,
            self.config.epsilon,
            self.config.delta,
            self.config.n,
            self.config.seed,
            self.config.dist,
            self.empirical_mean,
            self.empirical_variance,
            self.expected_variance
        )
    }
}

/// Privatize `n` simulated inputs and write one record per line. The
/// expected variance in the summary is the input variance plus the mean
/// noise variance.
pub fn run_simulate(config: &ExperimentConfig, out: &mut dyn Write) -> Result<SimulationSummary> {
    config.validate()?;
    let params = PrivacyParams::new(config.epsilon, config.delta)?;
    let privatizer = Privatizer::build(config.mechanism, params)?;

    writeln!(out, "raw_x,privatized_x,mechanism,epsilon")?;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..config.n {
        let mut rng = record_rng(config.seed, i);
        let x = draw_input(config.dist, config.delta, &mut rng);
        let record = privatizer
            .privatize(x, &mut rng)
            .with_context(|| format!("record {i}"))?;
        writeln!(out, "{},{},{},{}", x, record.value, record.mechanism, config.epsilon)?;
        let k = (i + 1) as f64;
        let step = record.value - mean;
        mean += step / k;
        m2 += step * (record.value - mean);
    }
    let empirical_variance = if config.n > 1 { m2 / (config.n - 1) as f64 } else { 0.0 };

    let input_variance = match config.dist {
        InputDist::Beta22 => config.delta * config.delta / 20.0,
        InputDist::Uniform => config.delta * config.delta / 12.0,
        InputDist::Fixed(_) => 0.0,
    };
    let expected_variance =
        input_variance + privatizer.mean_noise_variance(config.dist, config.delta)?;

    Ok(SimulationSummary {
        config: *config,
        empirical_mean: mean,
        empirical_variance,
        expected_variance,
    })
}

/// Outcome of a certification run: `certified` drives the exit code.
#[derive(Debug, Clone)]
pub struct CertifyOutcome {
    pub certified: bool,
    pub report: Option<RatioReport>,
    pub failure: Option<PodiumError>,
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Output grid: an even cover of `[lo, hi]` enriched with both one-sided
/// neighborhoods of every density breakpoint of every input plus the
/// midpoints between adjacent breakpoints, which makes the scan exhaustive
/// for piecewise-constant densities.
///
/// Breakpoints are probed at `c +- eta`, never at `c` itself: inputs a whole
/// sensitivity apart share breakpoints exactly, and at the shared point the
/// rounding of `z - x` can classify the two inputs into different pieces,
/// manufacturing a ratio no interval of positive measure attains.
fn certification_z_grid(
    density: &dyn MechanismDensity,
    x_grid: &[f64],
    lo: f64,
    hi: f64,
    n: usize,
) -> Result<Vec<f64>> {
    let mut grid = linspace(lo, hi, n);
    let mut cuts = Vec::new();
    for &x in x_grid {
        cuts.extend(density.breakpoints(x, lo, hi)?);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    for &c in &cuts {
        let eta = (c.abs() + 1.0) * 1e-12;
        grid.push(c - eta);
        grid.push(c + eta);
    }
    for pair in cuts.windows(2) {
        grid.push(0.5 * (pair[0] + pair[1]));
    }
    grid.retain(|z| (lo..=hi).contains(z));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}

/// Certify the privacy ratio bound of a mechanism on an input/output grid
/// and print a report. A support mismatch (the truncated-Laplace failure
/// mode) is reported as not private rather than as a usage error.
pub fn run_certify(
    mechanism: MechanismChoice,
    epsilon: f64,
    delta: f64,
    x_points: usize,
    z_points: usize,
    out: &mut dyn Write,
) -> Result<CertifyOutcome> {
    anyhow::ensure!(x_points >= 2, "x grid needs at least 2 points");
    anyhow::ensure!(z_points >= 2, "z grid needs at least 2 points");
    let params = PrivacyParams::new(epsilon, delta)?;
    let half = delta / 2.0;
    let x_grid = linspace(-half, half, x_points);

    let (density, z_hi): (Box<dyn MechanismDensity>, f64) = match mechanism {
        MechanismChoice::PodiumExact | MechanismChoice::PodiumApprox => {
            let mode = if mechanism == MechanismChoice::PodiumExact {
                SolverMode::Exact
            } else {
                SolverMode::Approximate
            };
            let shape = PodiumShape::new(params, mode)?;
            let reach = shape.half_support();
            (Box::new(shape), reach)
        }
        MechanismChoice::Laplace => {
            (Box::new(Laplace::new(params)), half + 12.0 * delta / epsilon)
        }
        MechanismChoice::Staircase => {
            // stay inside the geometric-tail evaluation cutoff for every input
            let periods = ((1e-15f64).ln() / -epsilon).ceil().max(2.0);
            (Box::new(StaircaseShape::new(params)?), (periods - 1.5) * delta)
        }
        MechanismChoice::TruncatedLaplace => (
            Box::new(TruncatedLaplaceControl::new(params, 3.0 * delta)?),
            3.0 * delta + half,
        ),
    };
    let z_lo = -z_hi;
    let z_grid = certification_z_grid(density.as_ref(), &x_grid, z_lo, z_hi, z_points)?;

    writeln!(
        out,
        "mechanism={} epsilon={} delta={} x_grid={} z_grid={}",
        mechanism,
        epsilon,
        delta,
        x_grid.len(),
        z_grid.len()
    )?;
    match certify_ratio(density.as_ref(), &params, &x_grid, &z_grid, 1e-9) {
        Ok(report) => {
            writeln!(
                out,
                "max_log_ratio={} min_log_ratio={} violations={}",
                report.max_log_ratio, report.min_log_ratio, report.violations
            )?;
            if let Some(ratios) = &report.ratio_set {
                let listed: Vec<String> = ratios.iter().map(f64::to_string).collect();
                writeln!(out, "ratio_set={}", listed.join(","))?;
            }
            let certified = report.violations == 0;
            writeln!(out, "result={}", if certified { "certified" } else { "violated" })?;
            Ok(CertifyOutcome { certified, report: Some(report), failure: None })
        }
        Err(err @ PodiumError::ZeroDensity { .. }) => {
            writeln!(out, "error={err}")?;
            writeln!(out, "result=not-private")?;
            Ok(CertifyOutcome { certified: false, report: None, failure: Some(err) })
        }
        Err(other) => Err(other.into()),
    }
}
