//! Command-line front end for `weightlab`.
//!
//! [`run`] executes one invocation in-process and returns the exit code together with
//! what would go to stdout and stderr; the binary is a thin wrapper around it.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod expr;
pub mod render;

use std::ffi::OsString;
use std::fmt;
use std::path::Path;

use clap::Parser;
use serde_json::{json, Value};
use weightlab::{Error, RunConfig};

use crate::args::{Cli, ConfigFlags};
use crate::expr::{BuildError, ParseError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DOMAIN: i32 = 65;
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Parse { input: String, error: ParseError },
    Lib(Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } | CliError::Io(_) => EXIT_USAGE,
            CliError::Lib(Error::InvalidArgument(_)) => EXIT_USAGE,
            CliError::Lib(Error::Internal(_)) => EXIT_INTERNAL,
            CliError::Lib(_) => EXIT_DOMAIN,
        }
    }

    /// Machine-readable diagnostic written to stderr.
    pub fn diagnostic(&self) -> Value {
        match self {
            CliError::Usage(m) => json!({"error": "usage", "message": m}),
            CliError::Io(m) => json!({"error": "io", "message": m}),
            CliError::Parse { input, error } => json!({
                "error": "parse",
                "kind": format!("{:?}", error.kind),
                "offset": error.offset,
                "input": input,
                "message": error.message,
            }),
            CliError::Lib(e) => {
                let mut d = json!({"error": e.kind(), "message": e.to_string()});
                match e {
                    Error::WellDefinedness(v) => d["guard"] = serde_json::to_value(v).expect("serializable"),
                    Error::Domain { t, lo, hi } => {
                        d["t"] = json!(t);
                        d["lo"] = json!(lo);
                        d["hi"] = json!(if hi.is_finite() { json!(hi) } else { json!("inf") });
                    }
                    _ => {}
                }
                d
            }
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Parse { input, error } => write!(f, "cannot parse '{input}' {error}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<BuildError> for CliError {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::Lib(e) => CliError::Lib(e),
            BuildError::Io(..) => CliError::Io(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Result of one invocation.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Defaults, then the `--config` file, then explicit flags.
pub fn resolve_config(file: Option<&Path>, flags: &ConfigFlags) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        cfg.merge_text(&text)?;
    }
    for (key, value) in flags.assignments() {
        cfg.set(key, &value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match commands::execute(&cli) {
        Ok((code, text)) => match &cli.output {
            Some(path) => match std::fs::write(path, &text) {
                Ok(()) => Outcome { code, ..Outcome::default() },
                Err(e) => failure(CliError::Io(format!("{}: {e}", path.display()))),
            },
            None => Outcome { code, stdout: text, stderr: String::new() },
        },
        Err(e) => failure(e),
    }
}

fn failure(e: CliError) -> Outcome {
    let mut stderr = serde_json::to_string(&e.diagnostic()).expect("serializable");
    stderr.push('\n');
    Outcome { code: e.exit_code(), stdout: String::new(), stderr }
}
