use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use phonosim::ErrorKind;

mod commands;

/// Phonetic similarity graphs from all-pairs alignment of IPA transcriptions.
#[derive(Debug, Parser)]
#[command(name = "phonosim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tokenize and encode a corpus TSV into `<out>.words` and `<out>.inventory`.
    Ingest {
        corpus: PathBuf,
        /// Keep only the N most frequent words.
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated multi-symbol phonemes.
        #[arg(long, default_value = "dʒ,tʃ")]
        digraphs: String,
    },
    /// Score every word pair into `<out>.nwedges` and its manifest.
    Compute {
        words: PathBuf,
        #[arg(long = "match", default_value_t = 1, allow_hyphen_values = true)]
        match_score: i32,
        #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
        mismatch: i32,
        #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
        gap: i32,
        /// Scheme file; overrides --match/--mismatch/--gap.
        #[arg(long)]
        scheme: Option<PathBuf>,
        /// Inventory for resolving scheme-file tokens [default: <words stem>.inventory].
        #[arg(long)]
        inventory: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value_t = phonosim::engine::DEFAULT_CHUNK_SIZE)]
        chunk_size: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Histogram of raw or normalized edge weights.
    Hist {
        store: PathBuf,
        #[command(flatten)]
        words: WordsArg,
        #[arg(long)]
        normalized: bool,
    },
    /// Ego-network of a word, exported as Gephi CSV files.
    Ego {
        store: PathBuf,
        #[command(flatten)]
        words: WordsArg,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[command(flatten)]
        range: RangeArgs,
        /// Output prefix for `<out>.nodes.csv` and `<out>.edges.csv` [default: ego_<word>].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write `<out>.gexf`.
        #[arg(long)]
        gexf: bool,
    },
    /// Shortest chain of words between two words.
    Path {
        store: PathBuf,
        #[command(flatten)]
        words: WordsArg,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[command(flatten)]
        range: RangeArgs,
    },
    /// Graph geometry: from a store, a node count, or a byte budget.
    Info {
        store: Option<PathBuf>,
        #[arg(long)]
        nodes: Option<u64>,
        #[arg(long)]
        budget: Option<u64>,
        /// Maximum word length, for block-width planning.
        #[arg(long)]
        max_len: Option<u64>,
        #[arg(long, default_value_t = 49_152)]
        shared_mem: u64,
    },
}

#[derive(Debug, Args)]
struct WordsArg {
    /// Encoded word list [default: store path with `.nwedges` replaced by `.words`].
    #[arg(long = "words")]
    path: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RangeArgs {
    /// Lowest normalized weight kept (inclusive).
    #[arg(long, allow_hyphen_values = true)]
    min: Option<f64>,
    /// Highest normalized weight kept (inclusive).
    #[arg(long, allow_hyphen_values = true)]
    max: Option<f64>,
}

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_IO: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(match err.kind() {
                ErrorKind::Usage => EXIT_USAGE,
                ErrorKind::Data => EXIT_DATA,
                ErrorKind::Io => EXIT_IO,
            })
        }
    }
}
