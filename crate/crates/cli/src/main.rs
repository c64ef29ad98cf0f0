//! `increparse`: encode, train, parse, evaluate and verify strongly
//! incremental dependency parsers.

mod commands;
mod error;
mod tsv;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use increparse::pipeline::{System, DEFAULT_SEED};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "increparse",
    version,
    about = "Strongly incremental dependency parsing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Turn a CoNLL-U treebank into one label per token.
    Encode(EncodeArgs),
    /// Turn a label file back into CoNLL-U.
    Decode(DecodeArgs),
    /// Train a parser for one scheme and delay.
    Train(TrainArgs),
    /// Parse the sentences of a CoNLL-U file.
    Parse(ParseArgs),
    /// Score predicted trees against gold trees.
    Eval(EvalArgs),
    /// Check monotonicity and delay of parse traces.
    Verify(VerifyArgs),
    /// Branching-direction statistics of a treebank.
    Stats(StatsArgs),
    /// Write a synthetic treebank.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct Output {
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Input {
    /// CoNLL-U file, `-` for standard input.
    input: PathBuf,
    /// Drop sentences that are not valid trees instead of failing.
    #[arg(long)]
    skip_invalid: bool,
}

#[derive(Debug, Args)]
struct EncodeArgs {
    #[command(flatten)]
    input: Input,
    /// abs, rel, pos, 1p or 2p.
    #[arg(long)]
    scheme: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct DecodeArgs {
    /// Label file as written by `encode`.
    input: PathBuf,
    #[arg(long)]
    scheme: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    input: Input,
    /// abs, rel, pos, 1p, 2p or arc-eager.
    #[arg(long)]
    scheme: String,
    #[arg(long, default_value_t = 0)]
    delay: usize,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Where to write the model.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ParseArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    model: PathBuf,
    /// Use the input's tags instead of predicting them.
    #[arg(long)]
    gold_pos: bool,
    /// JSON-lines parse traces.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Every prediction with the furthest token read before it.
    #[arg(long)]
    steps_out: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Gold CoNLL-U.
    gold: PathBuf,
    /// Predicted CoNLL-U; omit with `--baseline`.
    pred: Option<PathBuf>,
    /// Score a baseline instead: right-branching or left-branching.
    #[arg(long, conflicts_with = "pred")]
    baseline: Option<String>,
    /// Displacement CSV.
    #[arg(long)]
    curve: Option<PathBuf>,
    /// Merge displacements beyond this into the tails.
    #[arg(long, default_value_t = 10)]
    tail: isize,
    /// Write the scores as a JSON object instead of TSV.
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: Input,
    /// Scheme whose gold labels are replayed, or arc-eager for the oracle.
    /// Ignored with `--model`.
    #[arg(long)]
    scheme: Option<String>,
    /// Verify a trained parser instead of gold decoding.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Delay to check against. Defaults to 0, or to the model's delay with
    /// `--model`.
    #[arg(long)]
    delay: Option<usize>,
    #[arg(long)]
    gold_pos: bool,
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 1000)]
    count: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

fn system(name: &str) -> Result<System, CliError> {
    name.parse()
        .map_err(|_| CliError::Usage(format!("unknown scheme {name:?}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Encode(a) => commands::encode(&a),
        Command::Decode(a) => commands::decode(&a),
        Command::Train(a) => commands::train(&a),
        Command::Parse(a) => commands::parse(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Stats(a) => commands::stats(&a),
        Command::Synth(a) => commands::synth(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("INCREPARSE_LOG", "warn"))
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is_broken_pipe() => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
