//! `freeconv`: command-line front end.
//!
//! JSON results are wrapped in a [`ResultEnvelope`]; grids and histograms are
//! written as CSV with a leading `# {json}` metadata line. Exit status is 0 on
//! success, 2 for invalid input and 1 for numerical failures or failed checks.

mod args;
mod commands;

use std::fs;
use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use args::Cli;
use commands::Output;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] freeconv::Error),
    #[error("{0}")]
    Input(String),
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },
    #[error("{0} check(s) failed")]
    Checks(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if !e.is_validation() => 1,
            CliError::Core(_) | CliError::Input(_) => 2,
            CliError::Output { .. } | CliError::Checks(_) => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: String,
    /// The subcommand's arguments, as parsed.
    pub parameters: Value,
    pub seed: Option<u64>,
    pub output_path: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultEnvelope {
    pub tool_version: String,
    pub config_echo: ExperimentConfig,
    pub payload: Value,
    /// Wall-clock seconds.
    pub timing: f64,
}

fn resolve_seed(flag: Option<u64>) -> Result<Option<u64>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("FREECONV_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Input(format!("FREECONV_SEED must be an unsigned integer, got {s:?}"))),
        Err(_) => Ok(None),
    }
}

fn config(cli: &Cli, seed: Option<u64>) -> ExperimentConfig {
    let tagged = serde_json::to_value(&cli.command).expect("arguments serialize");
    let (command, parameters) = match tagged {
        Value::Object(m) if m.len() == 1 => m.into_iter().next().expect("one entry"),
        other => ("unknown".to_string(), other),
    };
    ExperimentConfig {
        command,
        parameters,
        seed,
        output_path: cli.out.clone(),
    }
}

fn emit(path: Option<&str>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Output {
            path: p.to_string(),
            source,
        }),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Output {
                path: "stdout".into(),
                source,
            }),
    }
}

fn envelope_text(cfg: ExperimentConfig, payload: Value, start: Instant) -> String {
    let env = ResultEnvelope {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_echo: cfg,
        payload,
        timing: start.elapsed().as_secs_f64(),
    };
    serde_json::to_string_pretty(&env).expect("envelope serializes") + "\n"
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Input("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Input(format!("cannot start {t} threads: {e}")))?;
    }
    let seed = resolve_seed(cli.seed)?;
    let start = Instant::now();
    let output = commands::execute(&cli.command, seed)?;
    let mc_seed = match cli.command {
        args::Command::Mc(_) => Some(seed.unwrap_or(commands::DEFAULT_SEED)),
        _ => seed,
    };
    let cfg = config(&cli, mc_seed);
    let out = cli.out.as_deref();
    match output {
        Output::Json { payload, failures } => {
            emit(out, &envelope_text(cfg, payload, start))?;
            if !failures.is_empty() {
                for f in &failures {
                    eprintln!("FAIL {f}");
                }
                return Err(CliError::Checks(failures.len()));
            }
        }
        Output::Csv { meta, columns, rows } => {
            let mut text = format!("# {}\n{columns}\n", serde_json::to_string(&meta).expect("metadata serializes"));
            for r in &rows {
                text.push_str(r);
                text.push('\n');
            }
            emit(out, &text)?;
            if let Some(path) = out {
                let payload = json!({ "csv": path, "rows": rows.len(), "meta": meta });
                emit(None, &envelope_text(cfg, payload, start))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("freeconv: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
