//! `qlap` — spectral graph partitioning with classical and simulated
//! quantum engines.
//!
//! Exit codes: 0 success, 1 algorithmic failure (starved post-selection,
//! disconnected input to the quantum partitioner, solver non-convergence),
//! 2 I/O or argument errors.

mod args;
mod commands;
mod report;

use args::{Cli, Command, CommonArgs};
use clap::Parser;

fn common_args(command: &Command) -> &CommonArgs {
    match command {
        Command::Spectrum(a) => &a.common,
        Command::Partition(a) => &a.common,
        Command::Components(a) => &a.common,
        Command::Estimate(a) => &a.common,
        Command::Compare(a) => &a.common,
        Command::Corpus(a) => &a.common,
    }
}

fn main() {
    let cli = Cli::parse();
    let threads = common_args(&cli.command).threads;
    if threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot configure {threads} worker threads: {e}");
            std::process::exit(2);
        }
    }
    let outcome = match &cli.command {
        Command::Spectrum(a) => commands::cmd_spectrum(a),
        Command::Partition(a) => commands::cmd_partition(a),
        Command::Components(a) => commands::cmd_components(a),
        Command::Estimate(a) => commands::cmd_estimate(a),
        Command::Compare(a) => commands::cmd_compare(a),
        Command::Corpus(a) => commands::cmd_corpus(a),
    };
    if let Err(e) = outcome {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
