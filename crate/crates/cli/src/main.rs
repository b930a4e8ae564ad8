use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hchain::config::{Format, Mode, Overrides, RawConfig, RunConfig};
use hchain::error::CliError;

#[derive(Parser)]
#[command(name = "hchain", version, about = "Quench dynamics of a harmonic oscillator chain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact evolution of a finite chain, reduced to the system sites
    Finite(Common),
    /// Infinite-chain closed forms by quadrature, with weak-coupling columns
    Continuum(Common),
    /// Relaxed covariance and its thermodynamics
    Steady(Common),
    /// Equilibrium reports over an (eta, gamma) grid
    Sweep(Common),
    /// Invariant suites; exits 0 only if all pass
    Check(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_name = "FLOAT")]
    tol: Option<f64>,
    #[arg(long, value_name = "INT")]
    threads: Option<usize>,
}

fn resolve(mode: Mode, args: Common) -> Result<RunConfig, CliError> {
    let raw = match &args.config {
        Some(path) => RawConfig::load(path)?,
        None => RawConfig::default(),
    };
    let flags = Overrides {
        out: args.out,
        format: args.format,
        tol: args.tol,
        threads: args.threads,
    };
    RunConfig::resolve(raw, mode, &flags)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match cli.command {
        Command::Finite(a) => (Mode::Finite, a),
        Command::Continuum(a) => (Mode::Continuum, a),
        Command::Steady(a) => (Mode::Steady, a),
        Command::Sweep(a) => (Mode::Sweep, a),
        Command::Check(a) => (Mode::Check, a),
    };
    match resolve(mode, args).and_then(|cfg| hchain::run(&cfg)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hchain: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
