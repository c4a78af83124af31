//! `iscore`: I-score screening, discretization, backward dropping, dagger
//! features, neural training and the bundled experiments.

mod commands;
mod config;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "iscore", version, about = "Influence-score feature screening toolkit")]
pub struct Cli {
    /// TOML file with a `[global]` section and one section per command.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Global seed; every randomized step derives its own seed from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (default `out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct DataArgs {
    /// Delimited file; the last column is the response.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// The file has no header row; columns are named X1..Xp.
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Args, Default)]
pub struct NetArgs {
    /// Hidden units.
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Learning rate.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Full-batch gradient steps.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Initial weights are uniform on [-s, s].
    #[arg(long)]
    pub init_scale: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Marginal I-score of every column, plus an optional subset score.
    Iscore {
        #[command(flatten)]
        data: DataArgs,
        /// Comma-separated column names scored jointly.
        #[arg(long, value_delimiter = ',')]
        subset: Option<Vec<String>>,
    },
    /// Replace continuous columns by their I-score-optimal indicator.
    Discretize {
        #[command(flatten)]
        data: DataArgs,
        /// Columns to discretize (default: every non-binary column).
        #[arg(long, value_delimiter = ',')]
        columns: Option<Vec<String>>,
    },
    /// Backward Dropping Algorithm over random starting subsets.
    Bda {
        #[command(flatten)]
        data: DataArgs,
        /// Starting subset size.
        #[arg(long)]
        k: Option<usize>,
        /// Number of random starting subsets.
        #[arg(long)]
        draws: Option<usize>,
    },
    /// Fit a dagger map on the leading rows and append the feature.
    Dagger {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_delimiter = ',')]
        columns: Option<Vec<String>>,
        /// Rows used for fitting (default: first half).
        #[arg(long)]
        train_rows: Option<usize>,
        /// Also transform this file with the fitted map.
        #[arg(long)]
        apply: Option<PathBuf>,
    },
    /// XOR toy simulation report.
    Toy {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Gated vs random vs full feature text study.
    Text {
        /// Corpus root with `pos/` and `neg/` directories of `.txt` files.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Generate a synthetic corpus of this many documents instead.
        #[arg(long)]
        desk_docs: Option<usize>,
        /// n-gram orders to extract, comma-separated.
        #[arg(long, value_delimiter = ',')]
        orders: Option<Vec<usize>>,
        /// Most frequent n-grams kept per order.
        #[arg(long)]
        max_features: Option<usize>,
        /// Word vocabulary cap applied before n-gram extraction.
        #[arg(long)]
        vocab_size: Option<usize>,
        /// Share of features kept by the gate.
        #[arg(long)]
        top_fraction: Option<f64>,
        /// `ffn` or `rnn`.
        #[arg(long)]
        classifier: Option<String>,
        #[command(flatten)]
        net: NetArgs,
    },
    /// Train a classifier on a tabular dataset and report test metrics.
    Train {
        #[command(flatten)]
        data: DataArgs,
        /// `ffn` or `rnn` (the row is read as a sequence of scalars).
        #[arg(long)]
        model: Option<String>,
        /// Share of rows used for training; the rest is split evenly
        /// between validation and test.
        #[arg(long)]
        train_fraction: Option<f64>,
        /// Gate inputs to the top fraction by marginal I-score.
        #[arg(long)]
        top_fraction: Option<f64>,
        #[command(flatten)]
        net: NetArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
