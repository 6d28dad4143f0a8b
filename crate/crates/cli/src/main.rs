mod campaign;
mod commands;

use campaign::{Arithmetic, Campaign, Mode};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Verification campaigns and coefficient tables for Hermitian Maass lifts.
#[derive(Parser)]
#[command(name = "maasslift", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification checks and emit one JSON report per (mode, D, N).
    Verify(VerifyArgs),
    /// Emit Maass coefficients of the lift of a plus form.
    Lift(LiftArgs),
    /// Print the theta transformation matrix of σ.
    ThetaMatrix(ThetaArgs),
    /// Check the Gauss sums G(ψ_m) for every admissible m | D.
    Gauss(GaussArgs),
    /// List Hecke coset representatives for an inert prime.
    HeckeReps(HeckeArgs),
    /// Coefficients of the star image f*[ℓ] of an eigenform.
    Ikeda(IkedaArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Campaign JSON file; replaces the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "D", value_delimiter = ',')]
    d: Vec<u64>,
    #[arg(long = "N", value_delimiter = ',', default_value = "1")]
    n: Vec<u64>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "criterion")]
    mode: Vec<Mode>,
    #[arg(long, value_enum, default_value = "exact")]
    arithmetic: Arithmetic,
    /// Weight k of the lift (used by the lift, hecke and ikeda modes).
    #[arg(long, default_value_t = 8)]
    k: i64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for report files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LiftArgs {
    #[arg(long = "D")]
    d: u64,
    #[arg(long = "N", default_value_t = 1)]
    n: u64,
    #[arg(long, default_value_t = 8)]
    k: i64,
    /// Plus form q-expansion JSON; defaults to the Eisenstein series E*.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Largest ℓ and m of the emitted keys.
    #[arg(long, default_value_t = 6)]
    upto: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ThetaArgs {
    #[arg(long = "D")]
    d: u64,
    /// σ = a,b,c,d in SL₂(Z).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    sigma: Vec<i64>,
    /// Use the closed form (requires c | D).
    #[arg(long)]
    closed: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GaussArgs {
    #[arg(long = "D")]
    d: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HeckeArgs {
    #[arg(long = "D")]
    d: u64,
    #[arg(long = "N", default_value_t = 1)]
    n: u64,
    #[arg(long)]
    p: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IkedaArgs {
    #[arg(long = "D")]
    d: u64,
    /// Eigenform JSON {weight, level_m, ap}; defaults to synthetic data.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    k: i64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    ell: u64,
    #[arg(long, default_value_t = 50)]
    upto: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Why a command did not succeed.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or input: exit status 2.
    Invalid(String),
    /// A check failed or a computation broke down: exit status 1.
    Failed(String),
}

impl From<maasslift::Error> for CliError {
    fn from(e: maasslift::Error) -> Self {
        CliError::Failed(e.to_string())
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Verify(a) => {
            let config = match a.config {
                Some(path) => Campaign::from_file(&path)?,
                None => Campaign {
                    discriminants: a.d,
                    levels: a.n,
                    modes: a.mode,
                    arithmetic: a.arithmetic,
                    output_dir: a.out,
                    k: a.k,
                    seed: a.seed,
                },
            };
            campaign::run(&config)
        }
        Command::Lift(a) => commands::lift(a.d, a.n, a.k, a.input.as_deref(), a.upto, a.out.as_deref()),
        Command::ThetaMatrix(a) => commands::theta_matrix_cmd(a.d, &a.sigma, a.closed, a.out.as_deref()),
        Command::Gauss(a) => commands::gauss(a.d, a.out.as_deref()),
        Command::HeckeReps(a) => commands::hecke_reps(a.d, a.n, a.p, a.out.as_deref()),
        Command::Ikeda(a) => commands::ikeda(a.d, a.input.as_deref(), a.k, a.seed, a.ell, a.upto, a.out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Invalid(msg)) => {
            eprintln!("invalid configuration: {msg}");
            ExitCode::from(2)
        }
    }
}
