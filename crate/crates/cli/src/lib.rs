//! The `gevrey` command line: argument parsing, run configuration and report
//! emission over `gevrey-core`.
//!
//! Every command produces a [`Report`] embedding its [`RunConfig`]. Files are
//! written only after the command has succeeded, so a failed run leaves no
//! partial output.

pub mod args;
mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;
use gevrey_core::GevreyError;
use thiserror::Error;

pub use args::Cli;
pub use config::{Report, RunConfig, Tolerances, REPORT_SCHEMA, SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] GevreyError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            _ => EXIT_INVALID,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

/// What a successful run leaves behind.
#[derive(Clone, Debug, PartialEq)]
pub struct Rendered {
    /// Text for stdout.
    pub stdout: String,
    /// Files to write, in order.
    pub files: Vec<(PathBuf, String)>,
    pub report: Report,
}

/// Runs a parsed command without touching the file system for output.
pub fn execute(cli: &Cli) -> Result<Rendered, CliError> {
    let config = RunConfig::from_cli(cli);
    let threads = cli.global.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))?;
    let out = pool.install(|| commands::dispatch(cli))?;
    let report = Report { schema_version: SCHEMA_VERSION, config, result: out.result };
    let mut files = Vec::new();
    let mut stdout = String::new();
    let body = match &out.records {
        Some(records) => {
            let mut text = serde_json::to_string(&report).expect("report serializes");
            text.push('\n');
            for r in records {
                text.push_str(&serde_json::to_string(r).expect("record serializes"));
                text.push('\n');
            }
            text
        }
        None => {
            let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
            text.push('\n');
            text
        }
    };
    match out.report_path {
        Some(p) => files.push((p, body)),
        None => stdout.push_str(&body),
    }
    files.extend(out.files);
    Ok(Rendered { stdout, files, report })
}

/// Parses `args`, runs the command and writes its output. Returns the exit
/// status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_INVALID
                }
            };
        }
    };
    match execute(&cli).and_then(|r| write_rendered(&r, stdout)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn write_rendered(r: &Rendered, stdout: &mut dyn Write) -> Result<(), CliError> {
    for (path, text) in &r.files {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))?;
    }
    stdout.write_all(r.stdout.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
}
