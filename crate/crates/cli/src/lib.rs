//! `osm` command-line driver.
//!
//! Every command takes an optional JSON `--config` file; flags override it.
//! The effective configuration is written to `<out>/config.resolved.json`.
//!
//! Exit codes: 0 success, 1 check or validation failure, 2 usage error,
//! 3 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub mod commands;
pub mod suites;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "osm",
    version,
    about = "Orthogonality sampling for 2D inverse scattering"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the forward problem for a scene and write Cauchy data.
    Simulate(commands::SimulateArgs),
    /// Compute an indicator image from Cauchy or scattered data.
    Image(commands::ImageArgs),
    /// Run numerical verification suites and write JSON reports.
    Verify(commands::VerifyArgs),
    /// Generate a training dataset from a spec file.
    Dataset(commands::DatasetArgs),
    /// Image a Fresnel-style `.exp` file (or a simulated stand-in).
    Fresnel(commands::FresnelArgs),
}

/// Problems with the invocation itself, as opposed to the data.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Exit code for an error raised while running a command.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    use osm_core::Error as E;
    if err.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::NoConvergence { .. } | E::Accuracy(_) | E::Domain { .. } | E::Singular(_) => {
                    EXIT_NUMERICAL
                }
                _ => EXIT_CHECK,
            };
        }
    }
    EXIT_CHECK
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Image(a) => commands::image(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Dataset(a) => commands::dataset(&a),
        Command::Fresnel(a) => commands::fresnel(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

pub(crate) fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> anyhow::Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text =
        fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub(crate) fn prepare_out(out: &Path) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    Ok(out.to_path_buf())
}
