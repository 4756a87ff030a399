// `!(x >= y)` is used deliberately so NaN falls into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;

use config::{parse_angle, parse_pair, parse_range, Format, Range};

/// Generalized su(1,1) coherent states of the pseudo-harmonic oscillator:
/// states, observables, identity measures, wavefunctions, time evolution
/// and self-verification.
#[derive(Debug, Parser)]
#[command(name = "su11-gcs", version)]
struct Cli {
    /// JSON file with default option values; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Potential strength λ > −1/2 (comma-separated list for sweeps).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    lambda: Vec<f64>,
    /// Deformation parameter r ≥ 1 (comma-separated list for sweeps).
    #[arg(long, value_delimiter = ',')]
    r: Vec<u32>,
    /// Coherence parameter as RE,IM (or MOD,PHASE with --polar).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_pair)]
    z: Option<(f64, f64)>,
    /// Read --z as modulus and phase.
    #[arg(long)]
    polar: bool,
    /// Series tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Output file (directory for `measure`); stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads for sweeps (output order is fixed regardless).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coefficients, normalization, f(n) table and eigen-relation residual.
    State {
        #[command(flatten)]
        common: Common,
    },
    /// Squeezing and photon statistics from closed forms and the oracle.
    Observables {
        #[command(flatten)]
        common: Common,
        /// |z|² grid as MIN:MAX:STEPS.
        #[arg(long, value_parser = parse_range)]
        abs_z_sq: Option<Range>,
        /// Phases of z (numbers or pi/6-style multiples), comma-separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_angle)]
        phi: Vec<f64>,
    },
    /// Identity-resolving measure density and moment table.
    Measure {
        #[command(flatten)]
        common: Common,
        /// Highest moment to check.
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        t_min: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long, default_value_t = 100)]
        t_points: usize,
        /// Spacing of the density samples; default log for r ≥ 2.
        #[arg(long, value_enum)]
        t_scale: Option<Scale>,
        /// Nodes on the inverse-Mellin contour (r = 3).
        #[arg(long, default_value_t = su11_gcs::identity_measure::DEFAULT_CONTOUR_POINTS)]
        contour_points: usize,
    },
    /// Coordinate wavefunction ψ(x) on a grid.
    Wavefunction {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.01)]
        x_min: f64,
        #[arg(long, default_value_t = 6.0)]
        x_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Time evolution z → z e^{−2it}, checked against e^{−itH} in Fock space.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// Times, comma-separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_angle, default_values_t = [0.3, std::f64::consts::FRAC_PI_4, 2.0])]
        t: Vec<f64>,
    },
    /// Run the verification suite; exit status 1 if any check fails.
    Verify {
        #[arg(long, value_enum, default_value_t = LevelArg::Fast)]
        level: LevelArg,
        /// Deliberately break something to confirm the suite notices.
        #[arg(long, value_enum)]
        inject_fault: Option<FaultArg>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    Lin,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FaultArg {
    CorruptLadder,
}

#[derive(Debug)]
pub enum CliError {
    Core(su11_gcs::Error),
    Usage(String),
    Io(String),
    /// A check ran and failed.
    Assertion(String),
}

impl From<su11_gcs::Error> for CliError {
    fn from(e: su11_gcs::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use su11_gcs::Error as E;
        match self {
            CliError::Core(E::Domain(_) | E::Unsupported(_) | E::Undefined(_)) | CliError::Usage(_) => 2,
            CliError::Core(E::NonConvergence { .. }) => 3,
            CliError::Core(E::Consistency { .. } | E::Unnormalized { .. })
            | CliError::Assertion(_)
            | CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) | CliError::Io(m) | CliError::Assertion(m) => f.write_str(m),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => config::FileConfig::load(path)?,
        None => config::FileConfig::default(),
    };
    match cli.command {
        Command::State { common } => commands::state(&commands::Settings::merge(common, None, vec![], &file)?),
        Command::Observables { common, abs_z_sq, phi } => {
            commands::observables(&commands::Settings::merge(common, abs_z_sq, phi, &file)?)
        }
        Command::Measure { common, n_max, t_min, t_max, t_points, t_scale, contour_points } => commands::measure(
            &commands::Settings::merge(common, None, vec![], &file)?,
            commands::MeasureOptions { n_max, t_min, t_max, t_points, t_scale, contour_points },
        ),
        Command::Wavefunction { common, x_min, x_max, points } => {
            commands::wavefunction(&commands::Settings::merge(common, None, vec![], &file)?, x_min, x_max, points)
        }
        Command::Evolve { common, t } => commands::evolve(&commands::Settings::merge(common, None, vec![], &file)?, &t),
        Command::Verify { level, inject_fault, out, format } => {
            let level = match level {
                LevelArg::Fast => su11_gcs::verify::Level::Fast,
                LevelArg::Full => su11_gcs::verify::Level::Full,
            };
            let fault = inject_fault.map(|FaultArg::CorruptLadder| su11_gcs::verify::Fault::CorruptLadder);
            commands::verify(level, fault, out.or(file.output.clone()), format.or(file.format).unwrap_or(Format::Csv))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
