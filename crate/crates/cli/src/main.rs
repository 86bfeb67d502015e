mod config;
mod run;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use logfield::Execution;

use config::{first_line, flags_from_pairs, pairs_from_file, Cli, CommandKind, ConfigError, RunConfig, SEED_ENV};
use run::{execute, print_checks, render, sidecar, sidecar_path, write_atomic, Artifact, RunError};

const EXIT_ASSERTION: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("config error: {msg}");
    ExitCode::from(EXIT_CONFIG)
}

fn resolve(cli: Cli) -> Result<(RunConfig, Option<usize>), ConfigError> {
    let (kind, argv) = cli.command.split();
    let file = match &argv.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
            flags_from_pairs(kind, &pairs_from_file(&text)?)?
        }
        None => Default::default(),
    };
    let flags = argv.over(file);
    let workers = flags.workers;
    if workers == Some(0) {
        return Err(ConfigError("workers must be positive".into()));
    }
    let env = std::env::var(SEED_ENV).ok();
    Ok((RunConfig::resolve(kind, flags, env.as_deref())?, workers))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return config_error(first_line(&e.to_string())),
    };
    let (cfg, workers) = match resolve(cli) {
        Ok(r) => r,
        Err(e) => return config_error(e),
    };
    if let Some(w) = workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ASSERTION);
        }
    }
    match emit(&cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_ASSERTION),
        Err(RunError::Config(m)) => config_error(m),
        Err(RunError::Internal(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_ASSERTION)
        }
    }
}

/// Runs and writes the artifact; `Ok(false)` when a check failed.
fn emit(cfg: &RunConfig) -> Result<bool, RunError> {
    let artifact = execute(cfg, Execution::Parallel)?;
    let ok = match &artifact {
        Artifact::Checks(c) => {
            print_checks(c);
            c.iter().all(|c| c.passed)
        }
        _ => true,
    };
    let bytes = render(cfg, &artifact)?;
    match &cfg.output {
        Some(path) => {
            write_atomic(path, &bytes)?;
            if cfg.command == CommandKind::Sample {
                write_atomic(&sidecar_path(path), &sidecar(cfg)?)?;
            }
        }
        None if matches!(artifact, Artifact::Checks(_)) => {}
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(ok)
}
