//! `blendnet` command-line front end.
//!
//! Exit status: 0 on success, 2 for usage or validation errors, 3 for
//! failures during the run itself.

mod artifact;
mod commands;
mod config;

use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use artifact::{exit_code, invalid, EXIT_INVALID};
use commands::{attribute, chem, data, model, stats, thermo};

#[derive(Parser, Debug)]
#[command(
    name = "blendnet",
    version,
    about = "Polymer blend compatibility prediction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Circular fingerprint of one repeating unit
    Fp(chem::FpArgs),
    /// Generate a synthetic dataset with a known labelling rule
    GenSynth(data::GenSynthArgs),
    /// Divide a dataset into train/valid/test
    Split(data::SplitArgs),
    /// Train one model on a split
    Train(model::TrainArgs),
    /// Evaluate a checkpoint on a dataset
    Eval(model::EvalArgs),
    /// Train every variant repeatedly on one split and tabulate test metrics
    Ablate(model::AblateArgs),
    /// Score one blend or a whole dataset
    Predict(model::PredictArgs),
    /// Score a pair across the composition range
    Sweep(model::SweepArgs),
    /// Heat-of-mixing compatibility from solubility parameters
    Hsp(thermo::HspArgs),
    /// Flory–Huggins free energy of mixing
    Fh(thermo::FhArgs),
    /// Exact one-sided binomial confidence test
    Conftest(stats::ConftestArgs),
    /// Shapley attribution of one prediction
    Attribute(attribute::AttributeArgs),
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("BLENDNET_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        invalid(format!(
            "BLENDNET_THREADS must be a positive integer, got '{raw}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| anyhow::anyhow!("thread pool: {e}"))
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Fp(a) => chem::fp(&a),
        Command::GenSynth(a) => data::gen_synth(&a),
        Command::Split(a) => data::split(&a),
        Command::Train(a) => model::train(&a),
        Command::Eval(a) => model::eval(&a),
        Command::Ablate(a) => model::ablate(&a),
        Command::Predict(a) => model::predict(&a),
        Command::Sweep(a) => model::sweep(&a),
        Command::Hsp(a) => thermo::hsp(&a),
        Command::Fh(a) => thermo::fh(&a),
        Command::Conftest(a) => stats::conftest(&a),
        Command::Attribute(a) => attribute::attribute(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                EXIT_INVALID as u8
            } else {
                0
            });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
