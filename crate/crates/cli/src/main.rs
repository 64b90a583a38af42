mod commands;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qbayes_core::qsim::{QpeMode, DEFAULT_QUBIT_CAP};
use serde::Serialize;

use crate::error::CliError;

/// Tree Bayesian networks for wafer maps, with exact and amplitude-estimation
/// inference.
#[derive(Parser, Debug)]
#[command(name = "qbayes", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GlobalArgs {
    /// Master seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses one per core.
    #[arg(long, global = true, env = "QBAYES_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Largest simulated register, in qubits.
    #[arg(long, global = true, default_value_t = DEFAULT_QUBIT_CAP)]
    pub qubit_cap: usize,
    /// Directory receiving reports and artifacts.
    #[arg(long, global = true, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert wafer maps to FLAT-CSV.
    Ingest(commands::IngestArgs),
    /// Learn one tree network per class.
    Train(commands::TrainArgs),
    /// Predict labels for samples.
    Classify(commands::ClassifyArgs),
    /// Posterior of target variables given evidence.
    Infer(commands::InferArgs),
    /// Confusion matrix and accuracy on labeled samples.
    Evaluate(commands::EvaluateArgs),
    /// Query-count comparison over a grid of amplitudes and tolerances.
    QaeBench(commands::QaeBenchArgs),
    /// Check encoded amplitudes against the joint distribution.
    EncodeVerify(commands::EncodeVerifyArgs),
    /// Sample a labeled synthetic dataset.
    Synth(commands::SynthArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    Exact,
    Quantum,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QpeModeArg {
    Subspace,
    Circuit,
}

impl From<QpeModeArg> for QpeMode {
    fn from(m: QpeModeArg) -> Self {
        match m {
            QpeModeArg::Subspace => QpeMode::Subspace,
            QpeModeArg::Circuit => QpeMode::Circuit,
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads)
        .build_global()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    std::fs::create_dir_all(&cli.global.output_dir)?;
    let g = &cli.global;
    match &cli.command {
        Command::Ingest(a) => commands::ingest(g, a),
        Command::Train(a) => commands::train(g, a),
        Command::Classify(a) => commands::classify(g, a),
        Command::Infer(a) => commands::infer(g, a),
        Command::Evaluate(a) => commands::evaluate(g, a),
        Command::QaeBench(a) => commands::qae_bench(g, a),
        Command::EncodeVerify(a) => commands::encode_verify(g, a),
        Command::Synth(a) => commands::synth(g, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
