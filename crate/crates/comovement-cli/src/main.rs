//! Command-line front end: simulate paths, decompose them, run the exact
//! oracle checks, the Monte Carlo tests and the price-series analysis.
//!
//! Every stochastic subcommand requires an explicit `--seed` (or one in the
//! config file named by `COMOVEMENT_CONFIG`); there is no silent entropy.
//! Exit codes: 0 when everything requested passed (an expected failure of a
//! negative-control model counts as a pass), 1 when a check failed
//! unexpectedly, 2 for usage errors.

mod output;
mod runs;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

const CONFIG_ENV: &str = "COMOVEMENT_CONFIG";

#[derive(Parser)]
#[command(
    name = "comovement",
    version,
    about = "Common/counter-move decomposition of correlated lattice walks",
    after_help = "Model shorthand for --model:\n  \
        constant:1/4                constant theta\n  \
        qhistory[:base:bump]        theta shifts with the last common/counter state\n  \
        adversarial[:t1:up:down]    theta peeks at the last sign (negative control)\n  \
        biased:7/10:1/2             marginal up-probability p and theta\n  \
        gaussian:0.5                correlated Gaussian increment signs\n  \
        @model.json or inline JSON  {\"kind\": \"constant-theta\", ...}\n\n\
        Set COMOVEMENT_CONFIG to a JSON file with default values for seed,\n  \
        reps, alpha, threads and format."
)]
struct Cli {
    #[command(flatten)]
    common: CommonOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonOpts {
    /// Root seed for all randomness (mandatory for stochastic subcommands).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output format.
    #[arg(long, global = true, value_parser = ["json", "csv", "table"])]
    format: Option<String>,
    /// Write the primary artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cap the worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Verdict significance for statistical tests.
    #[arg(long, global = true)]
    alpha: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a joint path from a model.
    Simulate {
        /// Dependence model (shorthand, @file or inline JSON).
        #[arg(long)]
        model: String,
        /// Number of steps.
        #[arg(long = "N")]
        n: usize,
    },
    /// Decompose a path into common/counter components (CSV table layout).
    Decompose {
        /// Use the built-in ten-step example path.
        #[arg(long, conflicts_with = "input")]
        from_table1: bool,
        /// Path file: .json (pair array, as emitted by simulate --format
        /// json) or .csv with B and W columns.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Complete unreached entries with fair draws from the seed's
        /// dedicated completion streams.
        #[arg(long)]
        complete: bool,
    },
    /// Run exact oracle checks (exhaustive enumeration, rational arithmetic).
    OracleCheck {
        #[arg(long)]
        model: String,
        /// Enumeration horizon.
        #[arg(long = "N", default_value_t = 8)]
        n: usize,
        /// Run the whole canonical check suite (the default).
        #[arg(long, conflicts_with = "check")]
        all: bool,
        /// Which check to run.
        #[arg(long, value_parser = ["all", "sign-symmetry", "halving", "factorization", "biased-formula"], default_value = "all")]
        check: String,
        /// Common-move indices (for halving/factorization) or the single
        /// index for sign-symmetry/biased-formula.
        #[arg(long = "n-index")]
        n_indices: Vec<usize>,
        /// Counter-move indices.
        #[arg(long = "m-index")]
        m_indices: Vec<usize>,
        /// Raise the enumeration horizon cap (default 10).
        #[arg(long, default_value_t = comovement::exact::DEFAULT_HORIZON_CAP)]
        horizon_cap: usize,
    },
    /// Monte Carlo tests against the distributional targets.
    McTest {
        #[command(subcommand)]
        which: McCommand,
    },
    /// Decompose the co-movement of two price series from CSV.
    Analyze {
        /// CSV with a timestamp column and two price columns.
        #[arg(long)]
        input: PathBuf,
        /// Optional second CSV (one price column each; inner-joined on
        /// timestamps).
        #[arg(long)]
        input2: Option<PathBuf>,
        /// Timestamp column name (default: first column).
        #[arg(long)]
        time_col: Option<String>,
        /// First price column name.
        #[arg(long)]
        col_a: Option<String>,
        /// Second price column name.
        #[arg(long)]
        col_b: Option<String>,
        /// Trailing window length in steps.
        #[arg(long, default_value_t = 30)]
        window: usize,
    },
}

#[derive(Subcommand)]
enum McCommand {
    /// Joint sign-block pmf vs the uniform target (chi-square).
    BlockPmf {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        l: usize,
        #[arg(long = "N", default_value_t = 64)]
        n: usize,
        #[arg(long)]
        reps: Option<u64>,
        /// Also write a CSV of cell frequencies and targets.
        #[arg(long, value_parser = ["plotdata"])]
        emit: Option<String>,
    },
    /// Common-move rate of the Gaussian model vs the arcsine target.
    DeltaT {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long, value_parser = ["plotdata"])]
        emit: Option<String>,
    },
    /// Independence of the sign block from the initial state pattern
    /// (G test; sign-adversarial models are expected to reject).
    Independence {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        l: usize,
        #[arg(long, default_value_t = 2)]
        pattern_len: usize,
        #[arg(long = "N", default_value_t = 16)]
        n: usize,
        #[arg(long)]
        reps: Option<u64>,
    },
    /// Biased-walk direction and counter-walk fairness.
    Biased {
        /// Marginal up-probability, e.g. 7/10.
        #[arg(long)]
        p: String,
        /// Joint up-probability theta, e.g. 1/2.
        #[arg(long)]
        theta: String,
        #[arg(long = "N", default_value_t = 200)]
        n: usize,
        #[arg(long)]
        reps: Option<u64>,
    },
    /// Monte Carlo frequencies vs exact oracle probabilities on sampled
    /// events.
    Calibration {
        #[arg(long)]
        model: String,
        #[arg(long = "N", default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        events: usize,
        /// Seed for choosing the events (separate from the path seed).
        #[arg(long, default_value_t = 2024)]
        event_seed: u64,
        #[arg(long)]
        reps: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match runs::dispatch(cli.command, &cli.common) {
        Ok(all_passed) => {
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
