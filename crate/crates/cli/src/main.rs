use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use qprobe_cli::{run, CliError, ExperimentConfig};

/// Run a qubit-probe precision experiment described by a TOML config.
#[derive(Debug, Parser)]
#[command(name = "qprobe", version)]
struct Args {
    /// Experiment config file.
    #[arg(long)]
    config: PathBuf,
    /// Override `estimation.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Override `output.path`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qprobe: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(args: &Args) -> Result<Vec<PathBuf>, CliError> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(e.to_string()))?;
    }
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        match config.estimation.as_mut() {
            Some(est) => est.seed = seed,
            None => return Err(CliError::config("--seed needs an [estimation] block")),
        }
    }
    if let Some(out) = &args.out {
        config.output = Some(qprobe_cli::config::OutputBlock { path: out.clone() });
    }
    config.validate()?;
    run(&config)
}
