use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod error;
mod formats;
mod settings;

use commands::{eval, run, snapshot, synth, track};

/// Online estimation of evolving Markov chains over symbol streams.
#[derive(Parser, Debug)]
#[command(name = "emc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stream symbols through the model and write one prediction row per step
    Run(run::RunArgs),
    /// Generate a labeled regime-switching stream
    Synth(synth::SynthArgs),
    /// Score predictions against true labels
    Eval(eval::EvalArgs),
    /// Compare probability tracking error against sliding-window baselines
    Track(track::TrackArgs),
    /// Verify, summarize or rewrite a model snapshot
    Snapshot(snapshot::SnapshotArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run::execute(a),
        Command::Synth(a) => synth::execute(a),
        Command::Eval(a) => eval::execute(a),
        Command::Track(a) => track::execute(a),
        Command::Snapshot(a) => snapshot::execute(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("emc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
