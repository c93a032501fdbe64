//! `combprob`: tables, thresholds, censuses and plot series from the
//! combprob toolkit.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::{Format, OutputSpec};

#[derive(Parser, Debug)]
#[command(name = "combprob", version, about = "Exact combinatorial probability tables")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    /// Significant digits for decimal values.
    #[arg(long, global = true, default_value_t = 10,
          value_parser = clap::value_parser!(u32).range(1..))]
    digits: u32,

    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,

    /// Binary precision of real-valued results.
    #[arg(long = "precision-bits", global = true, default_value_t = 128,
          value_parser = clap::value_parser!(u32).range(64..))]
    precision_bits: u32,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Multiple-birthday probabilities and thresholds.
    Birthday(BirthdayArgs),
    /// Dice sums and waiting times for runs of sixes.
    Dice {
        #[command(subcommand)]
        cmd: DiceCmd,
    },
    /// Pair census of doubled-deck deals.
    Doppelkopf {
        #[command(subcommand)]
        cmd: DoppelkopfCmd,
    },
    /// Products of uniform random variables.
    Products {
        #[command(subcommand)]
        cmd: ProductsCmd,
    },
    /// Seeded simulation of products of uniforms.
    Mc(McArgs),
    /// Timed reference computations.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("mode").required(true).multiple(true)
    .args(["n", "n_range", "alpha", "table"])))]
pub struct BirthdayArgs {
    /// Coincidence multiplicity m.
    #[arg(short, long, default_value_t = 2)]
    multiplicity: u32,

    /// Group size.
    #[arg(long, conflicts_with_all = ["n_range", "alpha", "table"])]
    n: Option<u64>,

    /// Series over a:b or a:b:step (inclusive).
    #[arg(long = "n-range", value_parser = commands::parse_range,
          conflicts_with_all = ["alpha", "table"])]
    n_range: Option<(u64, u64, u64)>,

    /// Number of equally likely dates.
    #[arg(long, default_value_t = 365)]
    days: u64,

    /// Add a leap day with probability p: `julian` (1/1461, the default),
    /// `gregorian` (97/146097), or a number such as 1/1461.
    #[arg(long, num_args = 0..=1, require_equals = true, default_missing_value = "julian")]
    gregorian: Option<String>,

    /// Threshold level(s): smallest n with w_m(n) >= alpha.
    #[arg(long)]
    alpha: Vec<String>,

    /// Threshold table for m = 2..5 (at the --alpha levels, or the standard six).
    #[arg(long)]
    table: bool,

    /// Cross-check against the explicit nested sums (m = 3, 4, 5).
    #[arg(long)]
    verify: bool,
}

#[derive(Subcommand, Debug)]
pub enum DiceCmd {
    /// Number of ordered rolls of n dice with each face sum.
    Sums {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        /// Build the table by convolution instead of the closed formula.
        #[arg(long)]
        convolution: bool,
    },
    /// Throws until the first run of n sixes.
    Wait(WaitArgs),
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("what").required(true)
    .args(["pmf_upto", "moments", "median"])))]
pub struct WaitArgs {
    #[arg(long = "run-length", value_parser = clap::value_parser!(u32).range(1..))]
    run_length: u32,
    /// Exact probabilities P(X = m) for m up to this bound.
    #[arg(long = "pmf-upto")]
    pmf_upto: Option<u64>,
    #[arg(long)]
    moments: bool,
    #[arg(long)]
    median: bool,
}

#[derive(Subcommand, Debug)]
pub enum DoppelkopfCmd {
    /// Logical and physical deal counts by number of pairs.
    Census {
        /// Deck as `types,hand_size`.
        #[arg(long, value_parser = commands::parse_deck)]
        deck: Option<(u32, u32)>,
        /// Enumerate physical deals instead of using the formula.
        #[arg(long = "brute-force")]
        brute_force: bool,
    },
    /// Probability that one player holds both copies of a given card type.
    Hochzeit {
        #[arg(long, value_parser = commands::parse_deck)]
        deck: Option<(u32, u32)>,
    },
    /// Moments, median and mode of the pair count, plus extreme events.
    Stats {
        #[arg(long, value_parser = commands::parse_deck)]
        deck: Option<(u32, u32)>,
    },
    /// Pair-count distribution next to its binomial and normal approximations.
    Overlay {
        #[arg(long, value_parser = commands::parse_deck)]
        deck: Option<(u32, u32)>,
    },
}

#[derive(Subcommand, Debug)]
pub enum ProductsCmd {
    /// Median of Y_n.
    Median {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        bound: String,
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        asymptotic: bool,
    },
    /// Series (x, F_n(x)) over [0, A^n].
    Cdf {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        bound: String,
        #[arg(long, default_value_t = 100)]
        grid: usize,
    },
    /// Series (x, f_n(x)) over (0, A^n].
    Pdf {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        bound: String,
        #[arg(long, default_value_t = 100)]
        grid: usize,
    },
    /// Density of the standardized log, (ln Y_n - n(ln A - 1))/sqrt(n).
    Standardized {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long, default_value_t = 100)]
        grid: usize,
    },
    /// Mean, variance and standard deviation of Y_n.
    Moments {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        bound: String,
    },
    /// P(Y_n <= (A/e)^n), exact and by its asymptotic series.
    Geomean {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
    },
    /// Lower real branch of the Lambert W function on [-1/e, 0).
    Lambert {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
}

#[derive(Args, Debug)]
pub struct McArgs {
    /// Upper bound A of the uniform factors.
    #[arg(long)]
    bound: f64,
    /// Factors per product.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    factors: u32,
    /// Replications.
    #[arg(long)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also report the KS distance to the exact law of ln Y_n.
    #[arg(long)]
    ks: bool,
    /// Also report a chi-square test on this many standardized bins.
    #[arg(long)]
    chi2: Option<usize>,
    /// Emit a histogram of ln Y_n with this many bins instead of the summary.
    #[arg(long)]
    histogram: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[clap(rename_all = "snake_case")]
pub enum BenchId {
    W4_400,
    W5_537,
    DkpCensus,
    W5PlotSeries,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Benchmarks to run (default: all).
    #[arg(value_enum)]
    ids: Vec<BenchId>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(combprob::Error),
    Io(std::io::Error),
    OverBudget(String),
}

impl From<combprob::Error> for CliError {
    fn from(e: combprob::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(combprob::Error::ProbeFailed(_)) => 2,
            CliError::OverBudget(_) => 3,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::OverBudget(m) => write!(f, "over budget: {m}"),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t as usize)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let prec = combprob::Precision::new(cli.precision_bits)?;
    let out = OutputSpec {
        format: cli.format,
        digits: cli.digits as usize,
        path: cli.out,
    };
    match cli.command {
        Command::Birthday(args) => commands::birthday(&out, &args),
        Command::Dice { cmd } => commands::dice(&out, &cmd),
        Command::Doppelkopf { cmd } => commands::doppelkopf(&out, prec, &cmd),
        Command::Products { cmd } => commands::products(&out, prec, &cmd),
        Command::Mc(args) => commands::mc(&out, prec, &args),
        Command::Bench(args) => commands::bench(&out, &args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("combprob: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
