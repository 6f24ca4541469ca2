mod commands;
mod input;
mod reproduce;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ordpat::processes::Noise;
use ordpat::{Error, TiePolicy};

#[derive(Debug, Parser)]
#[command(name = "ordpat", version, about = "Ordinal pattern analysis of time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Relative pattern frequencies for one delay or a range of delays.
    Freq {
        #[command(flatten)]
        io: InputArgs,
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[command(flatten)]
        delay: DelayArgs,
        #[command(flatten)]
        ties: TieArgs,
    },
    /// Length-3 contrasts as a function of the delay.
    Contrasts {
        #[command(flatten)]
        io: InputArgs,
        #[arg(long, default_value_t = 1)]
        dmax: usize,
        #[command(flatten)]
        ties: TieArgs,
    },
    /// Per-epoch contrasts with a smoothed turning rate.
    Track {
        #[command(flatten)]
        io: InputArgs,
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// Epoch length in samples.
        #[arg(long, default_value_t = 200)]
        epoch: usize,
        /// Distance between epoch starts; defaults to the epoch length.
        #[arg(long)]
        hop: Option<usize>,
        /// Number of epochs in the centered moving average of alpha.
        #[arg(long, default_value_t = 1)]
        smooth: usize,
        #[command(flatten)]
        ties: TieArgs,
    },
    /// Tests of the i.i.d. hypothesis by entropy and pattern contrasts.
    Test {
        #[command(flatten)]
        io: InputArgs,
        /// Pattern lengths, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "3,4")]
        m: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        dmax: usize,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        /// Split the series into disjoint segments of this length; a
        /// trailing remainder shorter than a segment is dropped.
        #[arg(long)]
        epoch: Option<usize>,
        /// Print accepted/larger/smaller percentages per statistic instead of
        /// individual tests.
        #[arg(long)]
        summary: bool,
    },
    /// Writes a simulated series.
    Simulate {
        #[arg(long, value_enum, default_value_t = ProcessArg::White)]
        process: ProcessArg,
        #[arg(long, default_value = "normal")]
        noise: Noise,
        /// AR coefficient for `--process ar1`.
        #[arg(long, default_value_t = ordpat::processes::AR1_PHI)]
        phi: f64,
        /// Series length.
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Simulates null quantiles of Z and stores them in the quantile cache.
    Quantiles {
        #[arg(long)]
        m: usize,
        /// Sample size as a number of windows.
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = 100_000)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "0.95,0.99,0.999")]
        levels: Vec<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Recomputes a reference table and compares cell by cell.
    Reproduce {
        #[arg(value_enum)]
        table: ReproduceTable,
        /// Master seed for the simulations.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Replicates per sample size for `tailq` and `tabi`.
        #[arg(long, default_value_t = 100_000)]
        reps: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Delimited text file with one value per line (optional header).
    #[arg(long)]
    input: PathBuf,
    /// Column to read, counted from 1.
    #[arg(long, default_value_t = 1)]
    column: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DelayArgs {
    /// Single delay.
    #[arg(long, conflicts_with = "dmax")]
    d: Option<usize>,
    /// All delays 1..=dmax.
    #[arg(long)]
    dmax: Option<usize>,
}

impl DelayArgs {
    fn delays(&self) -> std::ops::RangeInclusive<usize> {
        match (self.d, self.dmax) {
            (Some(d), _) => d..=d,
            (None, Some(n)) => 1..=n,
            (None, None) => 1..=1,
        }
    }
}

#[derive(Debug, Args)]
struct TieArgs {
    #[arg(long, value_enum, default_value_t = TieArg::Skip)]
    ties: TieArg,
    /// Seed for `--ties jitter`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl TieArgs {
    fn policy(&self) -> TiePolicy {
        match self.ties {
            TieArg::Skip => TiePolicy::Skip,
            TieArg::Jitter => TiePolicy::Jitter { seed: self.seed },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TieArg {
    Skip,
    Jitter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProcessArg {
    White,
    Rw,
    Gbm,
    Ar1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReproduceTable {
    /// AR(1) contrasts for five noise types.
    Arpat,
    /// Critical quantiles of Z at T = 400.
    Tailq,
    /// Brownian H4 bias and spread.
    Tabi,
    /// Random-walk length-3 pattern law.
    Brown3,
    /// Coin-tossing pattern probabilities.
    Coin,
}

/// Failure of a command, mapped onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    Lib(Error),
    ReproductionFailed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

const EXIT_INPUT: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;
const EXIT_REPRODUCTION: u8 = 4;

fn exit_code(f: &Failure) -> u8 {
    match f {
        Failure::Lib(Error::Parse(_) | Error::Io(_) | Error::NonFinite { .. }) => EXIT_INPUT,
        Failure::Lib(_) => EXIT_PRECONDITION,
        Failure::ReproductionFailed => EXIT_REPRODUCTION,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Lib(e) => eprintln!("ordpat: {e}"),
                Failure::ReproductionFailed => eprintln!("ordpat: reproduction FAILED"),
            }
            ExitCode::from(exit_code(&f))
        }
    }
}
