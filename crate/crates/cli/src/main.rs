mod config;
mod error;
mod output;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::config::ValidatedRun;
use crate::error::CliError;
use crate::output::Manifest;

const THREADS_ENV: &str = "JOULEWIRE_THREADS";

/// Floating-probe transport and Joule-heating analysis of tight-binding wires.
#[derive(Debug, Parser)]
#[command(name = "joulewire", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Worker threads; JOULEWIRE_THREADS takes precedence.
        #[arg(long)]
        threads: Option<usize>,
        /// Accepted for interface compatibility; every computation is deterministic.
        #[arg(long)]
        seedless: bool,
    },
    /// Parse and validate a config, then print the amount of work.
    Validate { config: PathBuf },
}

fn load(path: &Path) -> Result<ValidatedRun, CliError> {
    config::load(path)?.validate()
}

fn thread_count(flag: Option<usize>) -> Result<usize, CliError> {
    let requested = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Config(format!("{THREADS_ENV}={v:?} is not a thread count")))?,
        ),
        Err(_) => flag,
    };
    match requested {
        Some(0) => Err(CliError::Config("thread count must be at least 1".into())),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn print_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn validate(path: &Path) -> Result<(), CliError> {
    let run = load(path)?;
    print_warnings(&run.warnings);
    println!(
        "{} sweep points, estimated < {:.1} s",
        run.work_items(),
        (run.estimated_seconds() * 2.0).max(0.1)
    );
    Ok(())
}

fn execute(path: &Path, output_dir: Option<PathBuf>, threads: Option<usize>) -> Result<(), CliError> {
    let start = Instant::now();
    let run = load(path)?;
    let threads = thread_count(threads)?;
    let dir = output_dir
        .or_else(|| run.config.output_dir.clone())
        .ok_or_else(|| CliError::Config("no output directory: set output_dir or pass --output-dir".into()))?;
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
    print_warnings(&run.warnings);
    let validate_s = start.elapsed().as_secs_f64();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {threads} worker threads: {e}")))?;
    let mut outcome = pool.install(|| run::execute(&run))?;
    print_warnings(&outcome.warnings);
    for e in &outcome.row_errors {
        eprintln!("row error: {e}");
    }

    let write_start = Instant::now();
    let artifacts = outcome.tables.iter().map(|t| t.write(&dir)).collect::<Result<Vec<_>, _>>()?;
    outcome.timings.insert("validate".into(), validate_s);
    outcome.timings.insert("write".into(), write_start.elapsed().as_secs_f64());
    outcome.timings.insert("total".into(), start.elapsed().as_secs_f64());

    let failed: Vec<String> = outcome.failed_required().into_iter().map(String::from).collect();
    let mut warnings = run.warnings.clone();
    warnings.extend(outcome.warnings);
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        experiment: run.config.experiment.name().to_string(),
        status: if failed.is_empty() { "ok".into() } else { "checks-failed".into() },
        threads,
        warnings,
        row_errors: outcome.row_errors,
        timings_s: outcome.timings,
        checks: outcome.checks,
        artifacts: artifacts.clone(),
        config: run.config.clone(),
    };
    let manifest_path = manifest.write(&dir)?;
    for a in &artifacts {
        println!("wrote {} ({} rows)", dir.join(&a.file).display(), a.rows);
    }
    println!("wrote {}", manifest_path.display());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(failed.join(", ")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, output_dir, threads, seedless: _ } => execute(&config, output_dir, threads),
        Command::Validate { config } => validate(&config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
