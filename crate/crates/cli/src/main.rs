use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ontic_cli::{apply_tolerance_scale, parse_config_with, run, Format, Overrides, Scenario};

/// Ontic-state simulations driven by flat `key = value` configs.
#[derive(Parser)]
#[command(name = "ontic-sim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pointer-state measurement of a d-level subject.
    Measure(Common),
    /// Coherence against apparatus size, with a log-linear fit.
    Sweep(Common),
    /// Semigroup defect of the shipped two-qubit families.
    Semigroup(Common),
    /// Trajectory measure of a repeated-interaction model, with sampling.
    Trajectories(Common),
    /// Two-strand Bloch helix of a rotating qubit basis.
    Helix(Common),
    /// Reduced-dynamics nonlinearity witness.
    Nonlinear(Common),
    /// CPTP check of a stored channel.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// RNG seed (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (default `<scenario>.<format>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (scenario, common) = match cli.command {
        Command::Measure(c) => (Scenario::Measure, c),
        Command::Sweep(c) => (Scenario::Sweep, c),
        Command::Semigroup(c) => (Scenario::Semigroup, c),
        Command::Trajectories(c) => (Scenario::Trajectories, c),
        Command::Helix(c) => (Scenario::Helix, c),
        Command::Nonlinear(c) => (Scenario::Nonlinear, c),
        Command::Verify(c) => (Scenario::Verify, c),
    };

    if let Err(e) = apply_tolerance_scale(std::env::var("ONTIC_SIM_TOLERANCE_SCALE").ok().as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(e.code as u8);
    }

    let (text, source) = match &common.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => (t, path.display().to_string()),
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        None => (String::new(), "<command line>".to_string()),
    };
    let overrides = Overrides {
        scenario: Some(scenario),
        seed: common.seed,
        out: common.out,
        format: common.format,
    };
    let config = match parse_config_with(&text, &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: invalid configuration in {source}");
            for v in &e.violations {
                eprintln!("  {v}");
            }
            return ExitCode::from(e.exit_code() as u8);
        }
    };

    match run(&config) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
