use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

mod commands;

/// Hyperbolic polygon minimizers, earthquake derivatives, Killing-form
/// identities and the Whitehead character curve.
#[derive(Debug, Parser)]
#[command(name = "hypregen", version)]
pub struct Cli {
    /// Seed for every randomized procedure.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Override of the subcommand's numerical tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Compact single-line JSON.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Incircle,
    Weighted,
    Oracle,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Perimeter-minimizing polygon with the given angles.
    MinPolygon {
        /// Comma-separated interior angles in radians.
        #[arg(long)]
        angles: String,
        /// Comma-separated positive edge weights.
        #[arg(long)]
        weights: Option<String>,
        #[arg(long, value_enum, default_value_t = Mode::All)]
        mode: Mode,
        /// Accept angles above pi/2 (oracle only).
        #[arg(long)]
        allow_obtuse: bool,
    },
    /// Length of a sheared segment and its derivative checks.
    Earthquake {
        /// Config JSON file.
        #[arg(long)]
        config: PathBuf,
        /// Shear parameter.
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
        /// Compare closed-form derivatives with finite differences.
        #[arg(long)]
        check: bool,
    },
    /// Killing form of two traceless matrices and the applicable identities.
    Killing {
        /// Traceless 2x2 matrix as JSON; entries are numbers or [re, im].
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: Option<String>,
        /// Flow parameter for the parabolic identities.
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Run the randomized identity battery.
        #[arg(long)]
        suite: bool,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Trace the Whitehead character curve through chi0(n).
    Whitehead {
        #[arg(long)]
        n: i64,
        #[arg(long, default_value_t = PI - 0.5)]
        alpha_lo: f64,
        #[arg(long, default_value_t = PI)]
        alpha_hi: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        /// CSV destination.
        #[arg(long)]
        csv: PathBuf,
    },
    /// Close a polygon from n - 3 prescribed edge lengths.
    PolygonClose {
        #[arg(long)]
        angles: String,
        /// Comma-separated first n - 3 edge lengths.
        #[arg(long, default_value = "")]
        free: String,
        /// Initial guess for the last three lengths.
        #[arg(long, default_value = "1,1,1")]
        guess: String,
    },
}

/// A failure with a stable machine-readable code.
#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
    /// 1 for invalid input, 2 for numerical failure.
    pub exit: u8,
}

impl CliError {
    pub fn input(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            exit: 1,
        }
    }

    pub fn numeric(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            exit: 2,
        }
    }
}

fn fail(e: CliError) -> ExitCode {
    let line = json!({"code": e.code, "message": e.message, "exit": e.exit});
    eprintln!("{line}");
    ExitCode::from(e.exit)
}

fn emit(cli: &Cli, report: &Value) -> Result<(), CliError> {
    let text = if cli.json {
        serde_json::to_string(report)
    } else {
        serde_json::to_string_pretty(report)
    }
    .expect("serializable report");
    match &cli.output {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| CliError::input("io_error", format!("{}: {e}", path.display()))),
        None => {
            use std::io::{ErrorKind, Write};
            match writeln!(std::io::stdout().lock(), "{text}") {
                Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(CliError::input("io_error", format!("stdout: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            return fail(CliError::input("usage", first));
        }
    };
    match commands::run(&cli).and_then(|r| emit(&cli, &r)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}
