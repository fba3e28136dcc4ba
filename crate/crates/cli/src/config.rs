//! Configuration files: one JSON object naming a command plus that
//! command's parameters. Shared keys are split off here; the remaining
//! keys are decoded strictly by the selected command.

use std::path::PathBuf;

use serde_json::{Map, Value};

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_N: usize = 3;
pub const DEFAULT_OUT: &str = "anisowave-out";
pub const THREADS_ENV: &str = "ANISOWAVE_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threads {
    Auto,
    Count(usize),
}

impl Threads {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        match text.trim() {
            "auto" => Ok(Threads::Auto),
            s => match s.parse::<usize>() {
                Ok(0) | Err(_) => Err(CliError::config(format!(
                    "threads must be a positive integer or \"auto\", got \"{s}\""
                ))),
                Ok(k) => Ok(Threads::Count(k)),
            },
        }
    }

    fn from_value(v: &Value) -> Result<Self, CliError> {
        match v {
            Value::String(s) => Self::parse(s),
            Value::Number(n) => Self::parse(&n.to_string()),
            other => Err(CliError::config(format!(
                "threads must be an integer or \"auto\", got {other}"
            ))),
        }
    }
}

/// Overrides given on the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub command: Option<String>,
    pub seed: Option<u64>,
    pub threads: Option<Threads>,
    pub out: Option<PathBuf>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub command: String,
    pub out: PathBuf,
    pub seed: u64,
    pub threads: Threads,
    pub n: usize,
    /// Command-specific keys, decoded by the command.
    pub params: Map<String, Value>,
}

/// Parses a JSON configuration. Syntax errors carry line and column.
pub fn parse_config(text: &str) -> Result<Config, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        CliError::config(format!(
            "config parse error at line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })?;
    let Value::Object(map) = value else {
        return Err(CliError::config("config must be a JSON object"));
    };
    from_map(map, &Overrides::default())
}

/// Builds the effective configuration: file values, then flags, then the
/// thread-count environment variable as a fallback.
pub fn resolve(text: Option<&str>, overrides: &Overrides) -> Result<Config, CliError> {
    let map = match text {
        Some(t) => {
            let v: Value = serde_json::from_str(t).map_err(|e| {
                CliError::config(format!(
                    "config parse error at line {}, column {}: {e}",
                    e.line(),
                    e.column()
                ))
            })?;
            match v {
                Value::Object(m) => m,
                _ => return Err(CliError::config("config must be a JSON object")),
            }
        }
        None => Map::new(),
    };
    from_map(map, overrides)
}

fn from_map(mut map: Map<String, Value>, ov: &Overrides) -> Result<Config, CliError> {
    let file_command = match map.remove("command") {
        Some(Value::String(s)) => Some(s),
        Some(other) => {
            return Err(CliError::config(format!(
                "command must be a string, got {other}"
            )))
        }
        None => None,
    };
    let command = ov.command.clone().or(file_command).ok_or_else(|| {
        CliError::config("no command given (set \"command\" or pass it on the command line)")
    })?;
    crate::commands::command_registry()
        .get(&command)
        .map_err(|e| CliError::config(e.to_string()))?;

    let out = match map.remove("out") {
        Some(Value::String(s)) => PathBuf::from(s),
        Some(other) => {
            return Err(CliError::config(format!(
                "out must be a path string, got {other}"
            )))
        }
        None => PathBuf::from(DEFAULT_OUT),
    };
    let seed = match map.remove("seed") {
        Some(v) => v.as_u64().ok_or_else(|| {
            CliError::config(format!("seed must be a non-negative integer, got {v}"))
        })?,
        None => DEFAULT_SEED,
    };
    let threads = match map.remove("threads") {
        Some(v) => Some(Threads::from_value(&v)?),
        None => None,
    };
    let n = match map.get("n") {
        Some(v) => {
            let n = v.as_u64().ok_or_else(|| {
                CliError::config(format!("n must be a positive integer, got {v}"))
            })?;
            if n == 0 {
                return Err(CliError::config("n must be at least 1"));
            }
            n as usize
        }
        None => DEFAULT_N,
    };
    if let Some(tol) = ov.tolerance {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::config(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        map.insert("tolerance".into(), Value::from(tol));
    }
    let threads = match (ov.threads, threads) {
        (Some(t), _) | (None, Some(t)) => t,
        (None, None) => match std::env::var(THREADS_ENV) {
            Ok(s) if !s.trim().is_empty() => Threads::parse(&s)?,
            _ => Threads::Auto,
        },
    };
    Ok(Config {
        command,
        out: ov.out.clone().unwrap_or(out),
        seed: ov.seed.unwrap_or(seed),
        threads,
        n,
        params: map,
    })
}
