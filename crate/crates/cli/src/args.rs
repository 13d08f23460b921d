use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Time-local rate γ(t) on a grid.
    #[command(allow_negative_numbers = true)]
    Rate,
    /// Deviation-from-semigroup measure over a p-sweep or for one process.
    #[command(allow_negative_numbers = true)]
    Measure,
    /// Holevo χ(t) curves for a list of p values.
    #[command(allow_negative_numbers = true)]
    Holevo,
    /// Trace-distance backflow for the |±⟩ pair.
    #[command(allow_negative_numbers = true)]
    Blp,
    /// Intermediate-map CP scan, or bisection for the boundary in p.
    #[command(allow_negative_numbers = true)]
    Divisibility,
    /// Monte Carlo of the classical two-site renewal jump process.
    #[command(allow_negative_numbers = true)]
    ClassicalSim,
    /// Memory-kernel integration against the closed-form coherence.
    #[command(allow_negative_numbers = true)]
    KernelCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Rate => "rate",
            Command::Measure => "measure",
            Command::Holevo => "holevo",
            Command::Blp => "blp",
            Command::Divisibility => "divisibility",
            Command::ClassicalSim => "classical-sim",
            Command::KernelCheck => "kernel-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Dephasing,
    Nonunital,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Paper,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Form {
    Rate,
    Choi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Wtd {
    Exponential,
    Convolution,
    TanhSech,
}

/// `qsm <command> [flags]`. Flags may also come from `--config FILE`, a flat
/// `key = value` file; flags given on the command line win.
#[derive(Debug, Clone, Parser)]
#[command(
    name = "qsm",
    version,
    about = "Quantum semi-Markov processes: rates, measures and checks"
)]
#[command(args_override_self = true, allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,

    #[arg(long, global = true)]
    pub s: Option<f64>,
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true)]
    pub lambda1: Option<f64>,
    #[arg(long, global = true)]
    pub lambda2: Option<f64>,
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub family: Option<Family>,
    /// Integration horizon of the measure.
    #[arg(long = "T", global = true)]
    pub horizon: Option<f64>,
    #[arg(long, global = true)]
    pub t_max: Option<f64>,
    /// Number of grid points per curve.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, global = true, value_enum)]
    pub form: Option<Form>,
    /// Reference rate for `--mode paper`.
    #[arg(long, global = true)]
    pub gamma_ref: Option<f64>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub p_min: Option<f64>,
    #[arg(long, global = true)]
    pub p_max: Option<f64>,
    /// Number of points in a p-sweep.
    #[arg(long, global = true)]
    pub points: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub p_list: Option<Vec<f64>>,
    /// Dimension of the clock-dephasing generator in the Choi form.
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    /// Site-flip probability per renewal.
    #[arg(long, global = true)]
    pub pi: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub wtd: Option<Wtd>,
    #[arg(long, global = true)]
    pub boundary_search: bool,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
}

/// Parsed command line plus the subcommand resolved from the config file.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub cli: Cli,
    pub config_path: Option<PathBuf>,
}

fn config_path_from_argv(argv: &[OsString]) -> Result<Option<PathBuf>, CliError> {
    let mut iter = argv.iter().skip(1);
    let mut found = None;
    while let Some(arg) = iter.next() {
        let text = arg.to_string_lossy();
        if text == "--" {
            break;
        }
        if text == "--config" {
            let value = iter
                .next()
                .ok_or_else(|| CliError::Config("--config needs a path".into()))?;
            found = Some(PathBuf::from(value));
        } else if let Some(v) = text.strip_prefix("--config=") {
            found = Some(PathBuf::from(v));
        }
    }
    Ok(found)
}

/// `key = value` lines; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected `key = value`", n + 1)))?;
        let key = key.trim();
        let value = value.trim().trim_matches('"');
        if key.is_empty() {
            return Err(CliError::Config(format!("config line {}: empty key", n + 1)));
        }
        if key == "config" {
            return Err(CliError::Config(format!(
                "config line {}: nested config files are not supported",
                n + 1
            )));
        }
        out.push((key.to_string(), value.to_string()));
    }
    Ok(out)
}

fn read_config(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_file(&text)
}

/// Parses `argv`, splicing config-file entries in front of the command-line
/// flags so that the latter take precedence.
pub fn parse_invocation<I, T>(argv: I) -> Result<Invocation, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let config_path = config_path_from_argv(&argv)?;
    let entries = match &config_path {
        Some(path) => read_config(path)?,
        None => Vec::new(),
    };

    let mut file_command = None;
    let mut spliced: Vec<OsString> = argv.first().cloned().into_iter().collect();
    for (key, value) in &entries {
        if key == "command" {
            file_command = Some(value.clone());
            continue;
        }
        match value.as_str() {
            "true" => spliced.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                spliced.push(format!("--{key}").into());
                spliced.push(value.into());
            }
        }
    }
    spliced.extend(argv.iter().skip(1).cloned());

    let mut cli = Cli::try_parse_from(&spliced)?;
    let command = match (cli.command, file_command) {
        (Some(c), _) => c,
        (None, Some(name)) => {
            let mut with_command = vec![spliced[0].clone(), name.into()];
            with_command.extend(spliced.iter().skip(1).cloned());
            cli = Cli::try_parse_from(&with_command)?;
            cli.command
                .ok_or_else(|| CliError::Config("config `command` did not select a command".into()))?
        }
        (None, None) => return Err(CliError::Config("no command given (see `qsm --help`)".into())),
    };
    Ok(Invocation {
        command,
        cli,
        config_path,
    })
}
