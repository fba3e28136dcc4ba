use thiserror::Error;

/// Exit code for passing runs.
pub const EXIT_PASS: i32 = 0;
/// At least one verdict failed (or was degenerate).
pub const EXIT_VERDICT: i32 = 1;
/// Usage, configuration or validation error.
pub const EXIT_USAGE: i32 = 2;
/// Numerical non-convergence.
pub const EXIT_NON_CONVERGENCE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] anisowave_core::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_non_convergence() => EXIT_NON_CONVERGENCE,
            _ => EXIT_USAGE,
        }
    }
}
