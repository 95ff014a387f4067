//! Command-line front end for `kellyclock`.
//!
//! Each command renders its whole output in memory before anything is
//! written, and files are replaced atomically, so a failing run never
//! leaves a partial file behind.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

use clap::Parser;
use thiserror::Error;

pub use config::{CommandName, Format, RawConfig, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] kellyclock::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Core(e) if e.is_config() => EXIT_CONFIG,
            CliError::Core(_) => EXIT_NUMERIC,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

/// Rendered outputs of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub main: String,
    pub paths_csv: Option<String>,
}

/// Parses, validates and executes, writing to `--out` (or stdout).
pub fn run_from_config(raw: RawConfig) -> Result<(), CliError> {
    let raw = RawConfig::resolve(raw)?;
    let cfg = RunConfig::from_raw(&raw)?;
    let output = commands::execute(&cfg)?;
    if let (Some(path), Some(text)) = (&cfg.dump_paths, &output.paths_csv) {
        write_atomic(path, text)?;
    }
    match &cfg.out {
        Some(path) => write_atomic(path, &output.main),
        None => std::io::stdout()
            .lock()
            .write_all(output.main.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

/// Entry point used by the binary: returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let raw = match RawConfig::try_parse_from(args) {
        Ok(raw) => raw,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run_from_config(raw) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("kellyclock: {e}");
            e.exit_code()
        }
    }
}

pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
