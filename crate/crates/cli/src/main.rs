//! `gwci` command-line front end.

mod commands;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gwci::{Error, NumericTolerances, Unit};

#[derive(Debug, Parser)]
#[command(name = "gwci", version, about = "Canonical form, Wyner common information and Gray-Wyner rate points for Gaussian source pairs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Canonical variable form and its verification report.
    Canonical(Common),
    /// Mutual information I(X1; X2).
    MutualInfo(Common),
    /// Wyner's common information with the diagonal and full-matrix searches.
    CommonInfo(CommonInfoArgs),
    /// Weak stochastic realization for a given Q_W.
    Realize(RealizeArgs),
    /// Draw samples of (X12, X22, W) from a realization.
    Sample(SampleArgs),
    /// One Gray-Wyner rate point.
    RatePoint(RatePointArgs),
    /// Rate points over a grid of distortions and weights.
    Sweep(SweepArgs),
    /// Run the verification suites on the input covariance.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnitArg {
    Nats,
    Bits,
}

impl From<UnitArg> for Unit {
    fn from(u: UnitArg) -> Self {
        match u {
            UnitArg::Nats => Unit::Nats,
            UnitArg::Bits => Unit::Bits,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Covariance file: {"p1": .., "p2": .., "Q": [[..], ..]}.
    #[arg(long)]
    pub input: PathBuf,
    /// Write the result here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, value_enum, default_value = "nats")]
    pub unit: UnitArg,
    #[arg(long)]
    pub tol_sym: Option<f64>,
    #[arg(long)]
    pub tol_psd: Option<f64>,
    #[arg(long)]
    pub tol_rank: Option<f64>,
    #[arg(long)]
    pub tol_one: Option<f64>,
    #[arg(long)]
    pub tol_zero: Option<f64>,
    #[arg(long)]
    pub tol_opt: Option<f64>,
}

impl Common {
    pub fn tolerances(&self) -> Result<NumericTolerances, Error> {
        let mut t = NumericTolerances::default();
        let overrides = [
            (&mut t.sym_tol, self.tol_sym),
            (&mut t.psd_tol, self.tol_psd),
            (&mut t.rank_tol, self.tol_rank),
            (&mut t.one_tol, self.tol_one),
            (&mut t.zero_tol, self.tol_zero),
            (&mut t.opt_tol, self.tol_opt),
        ];
        for (slot, value) in overrides {
            if let Some(v) = value {
                *slot = v;
            }
        }
        t.validate()?;
        Ok(t)
    }

    pub fn unit(&self) -> Unit {
        self.unit.into()
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonInfoArgs {
    #[command(flatten)]
    pub common: Common,
    /// Random feasible starting points for the full-matrix search.
    #[arg(long, default_value_t = 200)]
    pub starts: usize,
    /// Descent steps per start.
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct RealizeArgs {
    #[command(flatten)]
    pub common: Common,
    /// `identity` or a JSON file holding Q_W as [[..]] or {"Qw": [[..]]}.
    #[arg(long, default_value = "identity")]
    pub qw: String,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "identity")]
    pub qw: String,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Emit samples of (X1, X2) in the original coordinates instead of (X12, X22, W).
    #[arg(long)]
    pub lift: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RatePointArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub delta1: f64,
    #[arg(long)]
    pub delta2: f64,
    #[arg(long, default_value = "identity")]
    pub qw: String,
    /// Also cross-check the joint RDF with a grid search at this resolution.
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// `start:stop:count` (inclusive) or a single value.
    #[arg(long)]
    pub delta1: String,
    #[arg(long)]
    pub delta2: String,
    #[arg(long, default_value = "1")]
    pub alpha1: String,
    #[arg(long, default_value = "1")]
    pub alpha2: String,
    /// Fixed Q_W for every row. Without it each row uses the diagonal Q_W
    /// minimizing R0 + α1 R1 + α2 R2.
    #[arg(long)]
    pub qw: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Random trials per randomized suite.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Monte Carlo sample count; 0 skips the suite.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
}

/// Failure of a command, carrying its exit status.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable input, bad flags or malformed files.
    Parse(String),
    Library(Error),
    /// The command ran but some verification suite failed.
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Verification => 1,
            Failure::Parse(_) => 2,
            Failure::Library(e) => match e {
                Error::DimensionMismatch { .. } | Error::InvalidInput(_) => 2,
                Error::NotPositiveSemidefinite { .. }
                | Error::AsymmetryTooLarge { .. }
                | Error::RankDeficientMarginal { .. }
                | Error::InfeasibleQw { .. }
                | Error::IdenticalPartPresent { .. }
                | Error::NonpositiveDistortion(_)
                | Error::WeightsOutOfRange { .. } => 3,
                Error::DegenerateSvd
                | Error::SingularTransformation { .. }
                | Error::NumericalBreakdown(_)
                | Error::SingularQw
                | Error::OracleDisagreement { .. } => 4,
            },
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Canonical(c) => commands::canonical(c),
        Command::MutualInfo(c) => commands::mutual_info(c),
        Command::CommonInfo(a) => commands::common_info(a),
        Command::Realize(a) => commands::realize(a),
        Command::Sample(a) => commands::sample(a),
        Command::RatePoint(a) => commands::rate_point(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Verify(a) => verify::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Parse(msg) => eprintln!("error: {msg}"),
                Failure::Library(e) => eprintln!("error: {e}"),
                Failure::Verification => eprintln!("error: verification failed"),
            }
            ExitCode::from(failure.exit_code())
        }
    }
}
