use clap::{Parser, Subcommand};
use geoflow::cli::{run, Command, ExperimentConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "geoflow", version, about = "Pseudospectral harmonic map and liquid crystal flows on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    /// Experiment configuration (JSON, unknown keys rejected).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every pseudo-random field (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Caloric extension of the initial data and its X-norm.
    Extend,
    /// BMO, VMO, Carleson and space-time norms of the initial data.
    Norms,
    /// Picard solve of the harmonic map heat flow.
    SolveHmf,
    /// Picard solve of the coupled liquid crystal flow.
    SolveLc,
    /// Amplitude sweep: threshold, contraction factors, bound constants.
    Sweep,
    /// The full verification suite.
    Verify,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Sub::Extend => Command::Extend,
        Sub::Norms => Command::Norms,
        Sub::SolveHmf => Command::SolveHmf,
        Sub::SolveLc => Command::SolveLc,
        Sub::Sweep => Command::Sweep,
        Sub::Verify => Command::Verify,
    };
    let mut cfg = match &cli.config {
        Some(path) => match ExperimentConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("geoflow: {e}");
                return ExitCode::from(1);
            }
        },
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cli
        .out
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("geoflow-out"));
    match run(command, &cfg, &out) {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(e) => {
            eprintln!("geoflow: {e}");
            ExitCode::from(1)
        }
    }
}
