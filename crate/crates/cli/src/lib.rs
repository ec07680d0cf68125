//! The `fca` command line: catchment precomputation, access scoring,
//! demand adjustment and classification over GeoJSON/CSV files.
//!
//! Set `FCA_THREADS` to fix the worker count; outputs do not depend on it.

pub mod args;
mod commands;
pub mod config;
pub mod units;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::Parser;

pub use commands::run_command;

pub const THREADS_ENV: &str = "FCA_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] fca_core::Error),
}

impl CliError {
    /// 1 validation/schema, 2 I/O, 3 usage.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 3,
            CliError::Write { .. } | CliError::Core(fca_core::Error::Io { .. }) => 2,
            CliError::Core(_) => 1,
        }
    }
}

/// Inserts `--config` values right after the subcommand so later
/// command-line flags override them.
fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let (Some(path), Some(at)) = config::locate(&argv) else {
        return Ok(argv);
    };
    let path = PathBuf::from(path);
    let text = fca_core::ingest::read_text(&path)?;
    let extra = config::config_args(&text, &path)?;
    let mut out = argv[..=at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[at + 1..]);
    Ok(out)
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))
}

/// Runs the CLI on `argv` and returns the process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString>,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .format_target(false)
        .try_init();

    let argv = match expand_config(argv.into_iter().map(Into::into).collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
        }
    };
    let result = thread_pool().and_then(|pool| pool.install(|| run_command(&cli.command)));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
