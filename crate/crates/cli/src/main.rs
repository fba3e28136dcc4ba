//! `anisowave`: run the decay experiments from a JSON configuration.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Value};

use anisowave_cli::commands::command_registry;
use anisowave_cli::config::{resolve, Config, Overrides, Threads};
use anisowave_cli::error::{self, CliError, EXIT_USAGE};
use anisowave_cli::output::{envelope, to_pretty, write_all, Status};

#[derive(Debug, Parser)]
#[command(
    name = "anisowave",
    version,
    about = "Decay-rate experiments for the anisotropically damped wave equation u_tt - u_x1x1 = Δu_t",
    after_help = "Commands: symbol-check, bounds, lemma23, solve, thm31, thm41, report.\n\
Defaults: n = 3, seed = 42, 10000 samples for symbol-check and bounds, output in ./anisowave-out.\n\
Threads: --threads, then the config file, then the ANISOWAVE_THREADS variable, then all cores.\n\
Exit codes: 0 all verdicts pass, 1 a verdict failed, 2 usage or configuration error, 3 numerical non-convergence."
)]
struct Cli {
    /// Command to run (overrides the config file's "command").
    command: Option<String>,
    /// JSON configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for sampled point sets.
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
    /// Worker threads: a positive integer or "auto".
    #[arg(long, value_name = "INT|auto")]
    threads: Option<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Slope tolerance for decay experiments.
    #[arg(long, value_name = "FLOAT")]
    tolerance: Option<f64>,
    /// List the registered commands and exit.
    #[arg(long)]
    list: bool,
}

fn error_report(err: &CliError) -> Value {
    json!({ "status": Status::Error, "failures": [err.to_string()] })
}

fn load(cli: &Cli) -> Result<Config, CliError> {
    let text = match &cli.config {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?),
        None => None,
    };
    let threads = cli.threads.as_deref().map(Threads::parse).transpose()?;
    let ov = Overrides {
        command: cli.command.clone(),
        seed: cli.seed,
        threads,
        out: cli.out.clone(),
        tolerance: cli.tolerance,
    };
    resolve(text.as_deref(), &ov)
}

fn install_threads(threads: Threads) -> Result<(), CliError> {
    let n = match threads {
        Threads::Auto => 0,
        Threads::Count(k) => k,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(format!("cannot start thread pool: {e}")))
}

fn run(cfg: &Config) -> Result<i32, CliError> {
    let command = command_registry().get(&cfg.command)?;
    let params = command.params(cfg);
    let params_value = Value::Object(params.clone());
    let outcome = match command.run(cfg, &params) {
        Ok(o) => o,
        Err(e) => {
            // keep a machine-readable trace of the failure next to the config
            let status = if e.exit_code() == error::EXIT_NON_CONVERGENCE {
                Status::NonConvergence
            } else {
                Status::Error
            };
            let report = envelope(
                &cfg.command,
                &params_value,
                status,
                &[e.to_string()],
                &Value::Null,
            );
            write_all(&cfg.out, &report, &[])?;
            return Err(e);
        }
    };
    let report = envelope(
        &cfg.command,
        &params_value,
        outcome.status,
        &outcome.failures,
        &outcome.result,
    );
    write_all(&cfg.out, &report, &outcome.artifacts)?;
    println!(
        "{}: {}",
        cfg.command,
        serde_json::to_string(&outcome.status).unwrap_or_default()
    );
    for f in &outcome.failures {
        println!("  {f}");
    }
    Ok(outcome.status.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list {
        for name in command_registry().names() {
            let c = command_registry().get(name).expect("listed names resolve");
            println!("{name:14} {}", c.summary());
        }
        return ExitCode::SUCCESS;
    }
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprint!("{}", to_pretty(&error_report(&e)));
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    if let Err(e) = install_threads(cfg.threads) {
        eprint!("{}", to_pretty(&error_report(&e)));
        return ExitCode::from(EXIT_USAGE as u8);
    }
    match run(&cfg) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprint!("{}", to_pretty(&error_report(&e)));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
