use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use fnls_cli::{describe, parse_config, run, write_error_record, Experiment, RunConfig, RunError};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Symbol,
    Mass,
    Smoothing,
    Continuum,
    MlCheck,
    Solve,
}

impl From<Command> for Experiment {
    fn from(c: Command) -> Self {
        match c {
            Command::Symbol => Experiment::Symbol,
            Command::Mass => Experiment::Mass,
            Command::Smoothing => Experiment::Smoothing,
            Command::Continuum => Experiment::Continuum,
            Command::MlCheck => Experiment::MlCheck,
            Command::Solve => Experiment::Solve,
        }
    }
}

/// Discrete space-time fractional NLS solver and verification experiments.
///
/// Each experiment writes <name>_report.json, <name>_data.csv and
/// <name>_manifest.json; the exit code is 0 when every check passes, 1 when
/// a check fails, 2 for usage or configuration errors and 3 for runtime
/// failures.
#[derive(Debug, Parser)]
#[command(name = "fnls", version)]
struct Cli {
    /// Experiment to run
    #[arg(value_enum)]
    experiment: Command,
    /// Configuration file of `key = value` lines
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads (overrides `workers` in the configuration)
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory (overrides `out` in the configuration)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the admissibility conditions and their margins, then exit
    #[arg(long)]
    describe: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let experiment: Experiment = cli.experiment.into();
    let cfg = match &cli.config {
        Some(path) => match parse_config(path) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        None => RunConfig::default(),
    };
    if cli.describe {
        print!("{}", describe(&cfg));
        return ExitCode::SUCCESS;
    }
    let workers = cli.workers.or(cfg.workers).unwrap_or(1);
    if workers == 0 {
        eprintln!("error: --workers must be at least 1");
        return ExitCode::from(2);
    }
    let out_dir = cli
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start {workers} workers: {e}");
            return ExitCode::from(3);
        }
    };
    let result: Result<_, RunError> = pool.install(|| run(experiment, &cfg, &out_dir, workers));
    match result {
        Ok(outcome) => {
            for c in &outcome.checks {
                println!(
                    "[{}] {} -- {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            println!(
                "{experiment}: {} in {:.2} s; files in {}",
                if outcome.passed {
                    "all checks passed"
                } else {
                    "some checks FAILED"
                },
                outcome.wall_time_s,
                out_dir.display()
            );
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Err(w) = write_error_record(experiment, &e, &out_dir) {
                eprintln!("error: {w}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
