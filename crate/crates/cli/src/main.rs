use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use laneflow_cli::commands;
use laneflow_cli::error::CliError;
use laneflow_cli::manifest::{parse_config, RunManifest};
use laneflow_core::sim::{NeighborMode, Scheme};

/// Two-lane car-following model: ring-road simulation, linear stability maps,
/// kink-antikink soliton profiles, and self-validation.
#[derive(Parser)]
#[command(name = "laneflow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the two-lane ring and export space-time CSVs, headway
    /// profiles and a summary.
    Simulate(CommonArgs),
    /// Export the neutral stability curve a_c(h) and the coexisting curve
    /// under both gate readings.
    StabilityMap(CommonArgs),
    /// Export the analytic kink-antikink headway profile.
    Soliton(CommonArgs),
    /// Run the invariant suite and write a pass/fail report.
    Validate(CommonArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Nearest,
    Paired,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Euler,
    Rk4,
}

#[derive(Args)]
struct CommonArgs {
    /// Run-manifest config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides out_dir from the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the neighbor-resolution mode.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Override the integration scheme.
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Override the time step in seconds.
    #[arg(long)]
    dt: Option<f64>,
}

impl CommonArgs {
    fn load(&self) -> Result<(RunManifest, PathBuf), CliError> {
        let text = std::fs::read_to_string(&self.config).map_err(|e| CliError::Io {
            path: self.config.display().to_string(),
            source: e,
        })?;
        let mut manifest = parse_config(&text)?;
        if let Some(mode) = self.mode {
            manifest.options.mode = match mode {
                ModeArg::Nearest => NeighborMode::Nearest,
                ModeArg::Paired => NeighborMode::Paired,
            };
        }
        if let Some(scheme) = self.scheme {
            manifest.options.scheme = match scheme {
                SchemeArg::Euler => Scheme::Euler,
                SchemeArg::Rk4 => Scheme::Rk4,
            };
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(laneflow_core::Error::InvalidOptions(format!(
                    "--dt must be positive (got {dt})"
                ))
                .into());
            }
            manifest.options.dt = dt;
        }
        let out = self
            .out
            .clone()
            .or_else(|| manifest.out_dir.clone())
            .ok_or(CliError::NoOutputDir)?;
        Ok((manifest, out))
    }
}

fn run() -> Result<(), CliError> {
    match Cli::parse().command {
        Command::Simulate(args) => {
            let (manifest, out) = args.load()?;
            let outcome = commands::cmd_simulate(&manifest, &out)?;
            if let Some(diag) = &outcome.aborted {
                println!("simulation aborted: {diag}");
            }
            for path in &outcome.written {
                println!("wrote {}", path.display());
            }
        }
        Command::StabilityMap(args) => {
            let (manifest, out) = args.load()?;
            for path in commands::cmd_stability_map(&manifest, &out)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Soliton(args) => {
            let (manifest, out) = args.load()?;
            for path in commands::cmd_soliton(&manifest, &out)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Validate(args) => {
            let (manifest, out) = args.load()?;
            let report = commands::cmd_validate(&manifest, &out)?;
            print!("{}", report.render());
            println!("wrote {}", out.join("validate_report.txt").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(errors)) => {
            eprint!("{errors}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
