//! `blocktri`: generate almost normal test matrices, reduce them to block
//! tridiagonal form, verify commutator certificates, draw spy patterns and
//! track rank structure under shifted QR.

mod commands;
mod report;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_VERIFY: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_CONTRACT: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn io(path: &Path, e: impl fmt::Display) -> Self {
        Self {
            code: EXIT_IO,
            message: format!("{}: {e}", path.display()),
        }
    }

    pub fn contract(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONTRACT,
            message: message.into(),
        }
    }
}

impl From<blocktri::Error> for CliError {
    fn from(e: blocktri::Error) -> Self {
        use blocktri::Error as E;
        let code = match e {
            E::Io(_) | E::Parse { .. } => EXIT_IO,
            E::SolverFailure { .. } => EXIT_VERIFY,
            _ => EXIT_CONTRACT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "blocktri",
    version,
    about = "Block tridiagonal reduction of almost normal matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded test instance as Matrix Market files plus manifest.json.
    Generate(GenerateArgs),
    /// Block-Lanczos reduction of a generated instance or a single matrix.
    Reduce(ReduceArgs),
    /// Check [A, A^H] = CA - AC for given A and C.
    Verify(VerifyArgs),
    /// Sparsity pattern of a matrix as ASCII or binary PGM.
    Spy(SpyArgs),
    /// Shifted QR steps on a reduced matrix, tracking off-profile ranks.
    QrTrack(QrTrackArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FamilyArg {
    Arrow,
    Colleague,
    Unitary,
    Companion,
    FourierSum,
    Curve,
    SolvedCommutator,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CurveArg {
    Circle,
    Line,
    ParabolaArc,
}

#[derive(Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated coefficients: descending and monic for `companion`,
    /// ascending Chebyshev coefficients for `colleague`. Entries may be complex (`1+2i`).
    #[arg(long)]
    pub coeffs: Option<String>,
    #[arg(long, value_enum, default_value = "circle")]
    pub curve: CurveArg,
    /// Use C = e1 e1^H instead of C = e1 e2^H for `solved-commutator`.
    #[arg(long)]
    pub dependent: bool,
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ReduceArgs {
    /// Directory containing manifest.json, or a Matrix Market file.
    #[arg(long)]
    pub input: PathBuf,
    /// `auto` (needs a manifest) or a Matrix Market file with the starting block.
    #[arg(long, default_value = "auto")]
    pub start: String,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub c: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Optional path for a JSON report.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SpyFormat {
    Ascii,
    Pgm,
}

#[derive(Args)]
pub struct SpyArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Output file; ASCII goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ascii")]
    pub format: SpyFormat,
}

#[derive(Args)]
pub struct QrTrackArgs {
    /// Reduced matrix, e.g. A_reduced.mtx from `reduce`.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Perturbation in the same basis, e.g. C_reduced.mtx.
    #[arg(long)]
    pub c: PathBuf,
    #[arg(long, default_value_t = 30)]
    pub steps: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value = "qr_track.json")]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONTRACT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Reduce(a) => commands::reduce(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Spy(a) => commands::spy(&a),
        Command::QrTrack(a) => commands::qr_track(&a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFY),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
