//! Command-line front end for `qsm-core`: figure tables, sweeps and checks,
//! emitted as CSV, JSON or SVG.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

pub use args::{parse_invocation, Cli, Command, Format, Invocation};
pub use error::CliError;
pub use output::{Column, ColumnData, Table};

/// Parses `argv` (including the program name) and computes the table.
pub fn run<I, T>(argv: I) -> Result<(Invocation, Table), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let invocation = parse_invocation(argv)?;
    let table = commands::run(invocation.command, &invocation.cli)?;
    Ok((invocation, table))
}

/// Runs and writes the rendered table to `--out` or `stdout`.
pub fn execute<I, T, W>(argv: I, stdout: &mut W) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
{
    let (invocation, table) = run(argv)?;
    let text = table.render(invocation.cli.format.unwrap_or(Format::Csv));
    match &invocation.cli.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}
