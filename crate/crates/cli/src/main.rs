//! `texrank`: build retrieval corpora from LaTeX sources, index them under
//! different document representations, and evaluate retrieval quality.

mod commands;
mod config;
mod corpus;
mod provider;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "texrank",
    version,
    about = "Build and evaluate document retrieval over LaTeX source corpora"
)]
struct Cli {
    /// TOML config file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Flatten, normalize, and structure every document in a corpus.
    Ingest(commands::ingest::IngestArgs),
    /// Build a representation, embed it, and save the vector index.
    Index(commands::index::IndexArgs),
    /// Rank the indexed corpus for a single query.
    Search(commands::search::SearchArgs),
    /// Score a query file against an index and report rank quality.
    Eval(commands::eval::EvalArgs),
    /// Drop queries a lexical ranker already answers near the top.
    FilterQueries(commands::filter::FilterArgs),
    /// Produce evaluation queries from a corpus via a completion endpoint.
    GenQueries(commands::gen::GenArgs),
    /// Cut nested context windows around a fixed query span.
    AnalyzeScaling(commands::scaling::ScalingArgs),
    /// Diagnose how text chunks relate to the figures around them.
    AnalyzeFigures(commands::figures::FiguresArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file = match config::load(cli.config.as_deref()) {
        Ok(file) => file,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    let result = match cli.command {
        Command::Ingest(args) => commands::ingest::run(args, &file),
        Command::Index(args) => commands::index::run(args, &file),
        Command::Search(args) => commands::search::run(args, &file),
        Command::Eval(args) => commands::eval::run(args, &file),
        Command::FilterQueries(args) => commands::filter::run(args, &file),
        Command::GenQueries(args) => commands::gen::run(args, &file),
        Command::AnalyzeScaling(args) => commands::scaling::run(args, &file),
        Command::AnalyzeFigures(args) => commands::figures::run(args, &file),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
