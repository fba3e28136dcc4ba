//! Configuration, dispatch and report writing for the `anisowave` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::{parse_config, resolve, Config, Overrides, Threads};
pub use error::CliError;
