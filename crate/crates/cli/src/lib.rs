//! Command-line front end: figure data, parameter sweeps and the individual
//! calculators, written as CSV and JSON.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub mod commands;
pub mod config;
pub mod output;

pub use config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ORACLE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "CLOCKBACK_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("bad configuration: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] clockback_core::Error),

    #[error("{0} oracle check(s) failed")]
    OracleFailure(usize),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Self::Io {
            context: context.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => EXIT_CONFIG,
            Self::Io { .. } => EXIT_IO,
            Self::Core(clockback_core::Error::InvalidParameter { .. } | clockback_core::Error::ClockAtGroundState { .. }) => {
                EXIT_CONFIG
            }
            Self::Core(_) | Self::OracleFailure(_) => EXIT_ORACLE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "clockback",
    version,
    about = "Pointer distributions, barrier scattering and clock back-reaction calculators",
    after_help = "Any configuration key can be overridden with --section.key=value, e.g. --clock.mass=2."
)]
pub struct Cli {
    /// Configuration file (`[section]` headers and `key = value` lines).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory for CSV and JSON files; created if missing.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Oracle comparison tolerance.
    #[arg(long, global = true, value_name = "REAL")]
    pub tol: Option<f64>,

    /// Evaluate pointer amplitudes by quadrature instead of the closed form.
    #[arg(long, global = true)]
    pub oracle: bool,

    /// Snapshot times for `propagate`, comma separated.
    #[arg(long, global = true, value_name = "T1,T2,...", value_delimiter = ',')]
    pub snapshots: Vec<f64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Pointer distributions at Δ = 10 for α = 2 and 10.
    Figure3,
    /// Pointer distributions at Δ = 5 for α = 10, 20 and 30.
    Figure4,
    /// Transmission and reflection over a grid of momenta, widths and pointer positions.
    TransmissionSweep,
    /// Regime of the configured measurement scenario.
    RegimeClassify,
    /// Figures of merit of the configured clock.
    ClockQuality,
    /// Reduced system state after post-selecting the pointer.
    Purity,
    /// Cross-checks closed forms, limits and the propagator against their oracles.
    Validate,
    /// Time-dependent scattering of a Gaussian packet.
    Propagate,
}

/// Global options after parsing, with the `--section.key=value` overrides
/// already separated out.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub config: RunConfig,
    pub oracle: bool,
    pub snapshots: Vec<f64>,
}

fn is_override(arg: &str) -> Option<&str> {
    let name = arg.strip_prefix("--")?;
    let key = name.split_once('=').map_or(name, |(k, _)| k);
    key.contains('.').then_some(name)
}

/// Splits `--section.key[=value]` overrides from the arguments clap sees.
fn split_overrides(args: Vec<String>) -> Result<(Vec<String>, Vec<(String, String)>), CliError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut overrides = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        match is_override(&arg) {
            Some(name) => {
                let (k, v) = match name.split_once('=') {
                    Some((k, v)) => (k.to_string(), v.to_string()),
                    None => {
                        let v = it
                            .next()
                            .ok_or_else(|| CliError::config(format!("--{name} needs a value")))?;
                        (name.to_string(), v)
                    }
                };
                overrides.push((k, v));
            }
            None => rest.push(arg),
        }
    }
    Ok((rest, overrides))
}

/// Parses arguments (program name first). `Ok(None)` means help or version
/// text was requested and has been written to `out`.
pub fn parse_invocation<I, S>(args: I, out: &mut dyn Write) -> Result<Option<Invocation>, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<OsString>,
{
    let args: Vec<String> = args
        .into_iter()
        .map(|a| a.into().to_string_lossy().into_owned())
        .collect();
    let (rest, overrides) = split_overrides(args)?;
    let cli = match Cli::try_parse_from(rest) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            write!(out, "{e}").map_err(|err| CliError::io("writing help", err))?;
            return Ok(None);
        }
        Err(e) => return Err(CliError::config(e.to_string().trim_end().to_string())),
    };
    let mut config = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    for (k, v) in &overrides {
        config.set(k, v)?;
    }
    if let Some(dir) = cli.out {
        config.output_dir = dir;
    }
    if let Some(tol) = cli.tol {
        config.tolerance_oracle = tol;
    }
    if !cli.snapshots.is_empty() && cli.command != Command::Propagate {
        return Err(CliError::config("--snapshots applies to `propagate` only"));
    }
    config.validate().map_err(|e| match e {
        CliError::Core(core) => CliError::config(core.to_string()),
        other => other,
    })?;
    Ok(Some(Invocation {
        command: cli.command,
        config,
        oracle: cli.oracle,
        snapshots: cli.snapshots,
    }))
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::config(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    // Fails only if the pool already exists, e.g. on a second call in-process.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs one command; the JSON summary goes to `out`.
pub fn run<I, S>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<OsString>,
{
    configure_threads()?;
    let Some(inv) = parse_invocation(args, out)? else {
        return Ok(());
    };
    commands::dispatch(&inv, out)
}

/// Runs and maps the outcome to a process exit code, reporting errors on
/// `err`.
pub fn run_to_exit_code<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString>,
{
    match run(args, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "clockback: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Option<Invocation>, CliError> {
        let mut sink = Vec::new();
        parse_invocation(std::iter::once("clockback").chain(args.iter().copied()), &mut sink)
    }

    #[test]
    fn overrides_apply_in_both_spellings() {
        let inv = parse(&["clock-quality", "--clock.mass=2", "--clock.mean_momentum", "20"]).unwrap().unwrap();
        assert_eq!(inv.command, Command::ClockQuality);
        assert_eq!(inv.config.clock_mass, 2.0);
        assert_eq!(inv.config.clock_mean_momentum, 20.0);
    }

    #[test]
    fn global_flags() {
        let inv = parse(&["--tol", "1e-4", "propagate", "--out", "x", "--snapshots", "1,2.5"]).unwrap().unwrap();
        assert_eq!(inv.config.tolerance_oracle, 1e-4);
        assert_eq!(inv.config.output_dir, PathBuf::from("x"));
        assert_eq!(inv.snapshots, vec![1.0, 2.5]);
    }

    #[test]
    fn bad_input_is_a_config_error() {
        for args in [
            &["figure3", "--clock.nope=1"][..],
            &["figure3", "--clock.mass=abc"],
            &["figure3", "--clock.mass=-1"],
            &["no-such-command"],
            &["figure3", "--snapshots", "1"],
        ] {
            let e = parse(args).unwrap_err();
            assert_eq!(e.exit_code(), EXIT_CONFIG, "{args:?}: {e}");
        }
    }

    #[test]
    fn help_is_not_an_error() {
        assert!(parse(&["--help"]).unwrap().is_none());
    }

    #[test]
    fn exit_codes() {
        let io = CliError::io("x", std::io::Error::other("boom"));
        assert_eq!(io.exit_code(), EXIT_IO);
        assert_eq!(CliError::OracleFailure(1).exit_code(), EXIT_ORACLE);
        assert_eq!(CliError::Core(clockback_core::Error::ZeroAlpha).exit_code(), EXIT_ORACLE);
        let bad = clockback_core::clock::ClockSpec::new(-1.0, 1.0, 1.0).unwrap_err();
        assert_eq!(CliError::Core(bad).exit_code(), EXIT_CONFIG);
    }
}
