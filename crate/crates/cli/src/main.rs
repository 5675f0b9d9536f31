use clap::Parser;
use ris_noma_cli::{apply_overrides, parse_config, run_experiment, CliError};
use std::path::PathBuf;
use std::process::ExitCode;

/// Link-level BER experiments for a surface-assisted two-user downlink.
#[derive(Parser)]
#[command(name = "ris-noma", version)]
struct Args {
    /// JSON experiment description.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV files (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Analytic substitution mode: "consistent" or "literal".
    #[arg(long)]
    mode: Option<String>,
    /// Suppress the stdout summary; only errors are printed.
    #[arg(long)]
    quiet: bool,
}

fn run(args: Args) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::Io {
        path: args.config.clone(),
        source: e,
    })?;
    let mut spec = parse_config(&text)?;
    apply_overrides(&mut spec, args.out, args.seed, args.mode.as_deref())?;
    run_experiment(&spec, args.quiet)?;
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
