use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use nehari_cli::{parse_config, run, ExitStatus};

/// Ground states of the truncated coupled NLS system, continuation in the
/// radius, blow-up diagnostics and the limit-equation shooting scan.
#[derive(Parser)]
#[command(name = "nehari", version)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Suppress the progress summary.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut config = match parse_config(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(ExitStatus::ConfigError.code());
        }
    };
    if let Some(dir) = args.output {
        config.output_dir = dir;
    }
    let mut stdout = io::stdout().lock();
    let mut sink = io::sink();
    let log: &mut dyn Write = if args.quiet { &mut sink } else { &mut stdout };
    match run(&config, log) {
        Ok(status) => ExitCode::from(status.code()),
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.status.code())
        }
    }
}
