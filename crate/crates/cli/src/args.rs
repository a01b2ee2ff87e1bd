use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Scheduling for jobs whose speed grows toward their due date.
#[derive(Debug, Parser)]
#[command(name = "procrastinate", version, about)]
pub struct Cli {
    /// Working precision in bits; defaults to the input file's, else 128.
    #[arg(long, global = true, value_name = "BITS")]
    pub precision: Option<usize>,

    /// Relative tolerance for near-ties, as a decimal in (0, 1).
    #[arg(long, global = true, value_name = "DECIMAL")]
    pub rel_tol: Option<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Offline schedule and feasibility verdict (exit 0 feasible, 1 infeasible, 2 indeterminate).
    Solve {
        instance: PathBuf,
        /// Schedule file to write.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs an online policy over an instance.
    Simulate {
        instance: PathBuf,
        #[command(flatten)]
        policy: PolicyArgs,
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Directory for stretch.csv and gantt.csv.
        #[arg(long)]
        plot_out: Option<PathBuf>,
    },
    /// Writes a generated instance.
    #[command(subcommand)]
    Gen(GenKind),
    /// Builds the scheduling instance for a square-root sum query and decides it
    /// (exit 0 when the sum of roots reaches the threshold, 1 when not, 2 when too close to call).
    Reduce {
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Loads an instance or trace file and verifies it: round trip, and for
    /// traces, that the summary follows from the events.
    Check { path: PathBuf },
    /// Policy by generator grid as CSV.
    Bench {
        /// thrashing, policies, lssf, srpt or lower-bounds.
        #[arg(long)]
        suite: String,
        /// Seed list such as 0-99 or 1,5,9. For lssf and srpt each entry is
        /// the job count, for lower-bounds the target stretch.
        #[arg(long, default_value = "0-99")]
        seeds: String,
        /// Jobs per random instance.
        #[arg(long, default_value_t = 10)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct PolicyArgs {
    /// fifo, edd, srpt, lssf or thrashing.
    #[arg(long)]
    pub policy: String,
    /// Thrashing activation stretch.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Caps each job's speed at this multiple of its speed at the due date.
    #[arg(long)]
    pub cap: Option<String>,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Positive integers, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub xs: Vec<u64>,
    #[arg(long)]
    pub threshold: u64,
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Instance file to write; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    /// Chain on which LSSF reaches stretch sqrt(n - 1).
    Lssf {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Common-release instance on which SRPT misses a due date.
    Srpt {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Two jobs on which FIFO reaches at least the target stretch.
    Fifo {
        #[arg(long)]
        target: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Three jobs on which EDD reaches at least the target stretch.
    Edd {
        #[arg(long)]
        target: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Scheduling instance for a square-root sum query.
    Reduction {
        #[command(flatten)]
        query: QueryArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// Seeded random feasible instance, or with --count a suite directory
    /// of consecutive seeds plus manifest.json.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of consecutive seeds; requires --out naming a directory.
        #[arg(long)]
        count: Option<u64>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Adaptive release sequence that makes the policy miss a due date on a
    /// feasible instance.
    Adversary {
        #[command(flatten)]
        policy: PolicyArgs,
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
}
