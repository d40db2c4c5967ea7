//! Command-line front end for `gkp-link`.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical or validation failure,
//! 3 I/O error.

pub mod args;
pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};

use crate::args::{Cli, Command, CommonArgs};
use crate::output::Table;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<gkp_link::Error> for CliError {
    fn from(e: gkp_link::Error) -> Self {
        use gkp_link::Error as E;
        match e {
            E::InvalidParameter { .. }
            | E::Dimension(_)
            | E::IndexOutOfRange { .. }
            | E::PulseCount { .. } => CliError::Usage(e.to_string()),
            E::PulseTable(_) | E::NoConvergence(_) => CliError::Numerical(e.to_string()),
        }
    }
}

/// A command's table plus a failure to report after the table is written.
pub struct Report {
    pub table: Table,
    pub failure: Option<CliError>,
}

impl From<Table> for Report {
    fn from(table: Table) -> Self {
        Self {
            table,
            failure: None,
        }
    }
}

fn emit(table: &Table, common: &CommonArgs) -> Result<(), CliError> {
    let io_err = |e: io::Error| CliError::Io(e.to_string());
    match &common.out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            table.write(&mut w, common.format).map_err(io_err)
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            table.write(&mut w, common.format).map_err(io_err)
        }
    }
}

fn dispatch(command: &Command) -> Result<Report, CliError> {
    match command {
        Command::RateCurve(a) => commands::rate_curve(a).map(Report::from),
        Command::Asymptote(a) => commands::asymptote(a).map(Report::from),
        Command::CsumFidelity(a) => commands::csum_fidelity(a).map(Report::from),
        Command::SwapMc(a) => commands::swap_mc(a),
    }
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    if threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    Ok(f())
}

/// Parse `argv` (including the program name) and run the command.
pub fn run<I, T>(argv: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cmd = Cli::command();
    let argv = config::inject(argv, &cmd)?;
    let matches = match cmd.try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(());
            }
            let text = e.render().to_string();
            let text = text
                .strip_prefix("error: ")
                .unwrap_or(&text)
                .trim_end()
                .to_string();
            return Err(CliError::Usage(text));
        }
    };
    let cli = Cli::from_arg_matches(&matches).map_err(|e| CliError::Usage(e.to_string()))?;
    let common = cli.command.common().clone();
    let report = with_threads(common.threads, || dispatch(&cli.command))??;
    emit(&report.table, &common)?;
    match report.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Entry point used by the binary.
pub fn main_entry() -> ExitCode {
    match run(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(io::stderr(), "{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
