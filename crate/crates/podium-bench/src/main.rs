use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use podium::SolverMode;
use podium_bench::commands::{
    default_efficiency_grid, default_table_grid, run_certify, run_simulate, write_efficiency,
    write_table,
};
use podium_bench::config::{ExperimentConfig, InputDist, MechanismChoice};

/// Exit codes: 0 success/certified, 1 certification failure, 2
/// usage/validation error.
#[derive(Parser)]
#[command(
    name = "podium-bench",
    version,
    about = "Benchmark CLI for bounded-support differential-privacy noise mechanisms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// Closed-form quartic root, Newton polished.
    Exact,
    /// The s = epsilon/3 approximation.
    Approx,
}

impl From<ModeArg> for SolverMode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Exact => SolverMode::Exact,
            ModeArg::Approx => SolverMode::Approximate,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write the shape lookup table (epsilon, e^eps, d*delta, w/delta, m, s) as CSV
    Table {
        /// Privacy budget; repeat for several rows. Defaults to the standard
        /// 55-value grid.
        #[arg(long = "epsilon", value_name = "EPS")]
        epsilons: Vec<f64>,
        /// Sensitivity of the collection.
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the relative-efficiency table of the three mechanisms as CSV
    Efficiency {
        /// Privacy budget; repeat for several rows. Defaults to the standard
        /// 19-value grid.
        #[arg(long = "epsilon", value_name = "EPS")]
        epsilons: Vec<f64>,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Privatize simulated inputs and write one record per line as CSV
    Simulate {
        /// podium, podium-exact, podium-approx, laplace, or staircase.
        #[arg(long)]
        mechanism: String,
        /// Step solver for the bare `podium` mechanism name.
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        /// Number of records.
        #[arg(long)]
        n: u64,
        /// Root seed; determines the output byte for byte.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// beta22, uniform, or fixed=<value> (centered units).
        #[arg(long, default_value = "beta22")]
        dist: String,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the density ratio bound on a grid; exits 1 on violation
    Certify {
        /// podium, podium-exact, podium-approx, laplace, staircase, or
        /// truncated-laplace (a negative control that must fail).
        #[arg(long)]
        mechanism: String,
        /// Step solver for the bare `podium` mechanism name.
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        /// Input grid size over [-delta/2, delta/2].
        #[arg(long, default_value_t = 101)]
        x_grid: usize,
        /// Output grid size over the mechanism support.
        #[arg(long, default_value_t = 10001)]
        z_grid: usize,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Table { epsilons, delta, out } => {
            let grid = if epsilons.is_empty() { default_table_grid() } else { epsilons };
            let mut writer = create(&out)?;
            write_table(&grid, delta, &mut writer)?;
            writer.flush()?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Efficiency { epsilons, out } => {
            let grid = if epsilons.is_empty() { default_efficiency_grid() } else { epsilons };
            let mut writer = create(&out)?;
            write_efficiency(&grid, &mut writer)?;
            writer.flush()?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate { mechanism, mode, epsilon, delta, n, seed, dist, out } => {
            let config = ExperimentConfig {
                mechanism: MechanismChoice::parse(&mechanism, mode.into())?,
                epsilon,
                delta,
                n,
                seed,
                dist: dist.parse::<InputDist>()?,
            };
            let mut writer = create(&out)?;
            let summary = run_simulate(&config, &mut writer)?;
            writer.flush()?;
            println!("{summary}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Certify { mechanism, mode, epsilon, delta, x_grid, z_grid } => {
            let choice = MechanismChoice::parse(&mechanism, mode.into())?;
            let outcome =
                run_certify(choice, epsilon, delta, x_grid, z_grid, &mut std::io::stdout())?;
            Ok(if outcome.certified { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn create(path: &PathBuf) -> Result<BufWriter<File>> {
    let file =
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}
