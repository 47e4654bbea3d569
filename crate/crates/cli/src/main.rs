//! `greedy-subnet`: toy data, training, pruning and rate experiments from the
//! command line.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use greedy_subnet::harness::OUTPUT_DIR_ENV;

/// Exit status for each failure class. Bad flags exit with clap's status 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    CheckFailed = 1,
    Io = 3,
    Invalid = 4,
    NotConverged = 5,
    Diverged = 6,
}

/// An error that carries its exit status.
#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub message: String,
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

pub fn fail(status: Status, message: impl Into<String>) -> anyhow::Error {
    Failure {
        status,
        message: message.into(),
    }
    .into()
}

fn status_of(err: &anyhow::Error) -> Status {
    if let Some(f) = err.downcast_ref::<Failure>() {
        return f.status;
    }
    match err.downcast_ref::<greedy_subnet::Error>() {
        Some(greedy_subnet::Error::Io { .. }) => Status::Io,
        Some(greedy_subnet::Error::Diverged { .. }) => Status::Diverged,
        Some(_) => Status::Invalid,
        None if err.downcast_ref::<std::io::Error>().is_some() => Status::Io,
        None => Status::Invalid,
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "greedy-subnet",
    version,
    about = "Greedy forward subnetwork selection experiments"
)]
struct Cli {
    /// Directory that relative output paths are resolved against.
    #[arg(long, global = true, env = OUTPUT_DIR_ENV, default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the toy teacher-student dataset and its teacher network.
    GenData {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Dataset CSV (columns x0..x9, y).
        #[arg(long, default_value = "data.csv")]
        data: PathBuf,
        #[arg(long, default_value = "teacher.json")]
        teacher: PathBuf,
    },
    /// Train a randomly initialized network by full-batch gradient flow.
    Pretrain(PretrainArgs),
    /// Select a subnetwork of a two-layer network or feature instance.
    Prune(PruneArgs),
    /// Pruned-versus-scratch loss over network sizes, per seed.
    SweepRate(SweepArgs),
    /// Fit a log-log slope to a CSV of (n, loss) columns.
    FitSlope(FitArgs),
    /// Polytope statistics and convergence-bound checks along a forward run.
    CheckGeometry(GeometryArgs),
    /// Forward and backward selection on the built-in 43-neuron instance.
    Counterexample(CounterexampleArgs),
    /// Prune every hidden layer of a deep MLP.
    DeepPrune(DeepPruneArgs),
    /// Minibatch SGD from inherited weights.
    Finetune(FinetuneArgs),
}

#[derive(Args, Debug)]
pub struct TrainFlags {
    #[arg(long, default_value_t = greedy_subnet::training::DEFAULT_STEP_SIZE)]
    pub step_size: f64,
    #[arg(long, default_value_t = greedy_subnet::training::DEFAULT_STEP_CAP)]
    pub steps: usize,
    /// Run every step instead of stopping once the loss settles.
    #[arg(long)]
    pub no_early_stop: bool,
}

#[derive(Args, Debug)]
pub struct PretrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Width of a two-layer network.
    #[arg(long, default_value_t = 1000, conflicts_with = "hidden")]
    pub width: usize,
    /// Comma-separated hidden widths of a deep MLP, e.g. `12,12`.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    #[arg(long, default_value = "tanh")]
    pub activation: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub train: TrainFlags,
    /// Exit with status 5 if the loss has not settled within the budget.
    #[arg(long)]
    pub require_convergence: bool,
    #[arg(long, default_value = "model.json")]
    pub out: PathBuf,
    /// Per-step loss CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Forward,
    Backward,
    FrankWolfe,
    Random,
}

#[derive(Args, Debug)]
pub struct PruneArgs {
    /// Two-layer network or feature-instance model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Dataset; required for a network model.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "forward")]
    pub method: MethodArg,
    /// Number of selection steps (multiset size); not used by backward.
    #[arg(long)]
    pub size: Option<usize>,
    /// Forward only: stop once the halved loss is within `eps` of the
    /// network's own loss.
    #[arg(long, conflicts_with = "size")]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "prune_trace.csv")]
    pub trace: PathBuf,
    #[arg(long, default_value = "prune_meta.json")]
    pub meta: PathBuf,
    /// Write the selected subnetwork (network models only).
    #[arg(long)]
    pub subnet: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// TOML sweep definition; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Target band for the median pruned slope, as `lo,hi`; exit 1 when missed.
    #[arg(long, value_delimiter = ',')]
    pub expect_pruned: Option<Vec<f64>>,
    #[arg(long, default_value = "rate_plot.svg")]
    pub plot: PathBuf,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    pub csv: PathBuf,
    /// Loss column; defaults to the second column.
    #[arg(long)]
    pub column: Option<String>,
}

#[derive(Args, Debug)]
pub struct GeometryArgs {
    /// Two-layer network or feature-instance model file; the built-in
    /// 43-neuron instance when omitted.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "geometry.json")]
    pub report: PathBuf,
}

#[derive(Args, Debug)]
pub struct CounterexampleArgs {
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    #[arg(long)]
    pub trace_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DeepPruneArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Allowed loss gap as a fraction of the original loss.
    #[arg(long, default_value_t = 0.05, conflicts_with = "eps")]
    pub eps_factor: f64,
    /// Absolute allowed loss gap.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Minibatch size for candidate scoring; the full dataset by default.
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "pruned.json")]
    pub out: PathBuf,
    #[arg(long, default_value = "deep_prune_trace.csv")]
    pub trace: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScheduleArg {
    Constant,
    Cosine,
}

#[derive(Args, Debug)]
pub struct FinetuneArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub step_size: f64,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long, value_enum, default_value = "cosine")]
    pub schedule: ScheduleArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "finetuned.json")]
    pub out: PathBuf,
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let out = commands::Out::new(cli.out_dir);
    let result = match cli.command {
        Command::GenData { seed, data, teacher } => commands::gen_data(&out, seed, &data, &teacher),
        Command::Pretrain(a) => commands::pretrain(&out, a),
        Command::Prune(a) => commands::prune(&out, a),
        Command::SweepRate(a) => commands::sweep_rate(&out, a),
        Command::FitSlope(a) => commands::fit_slope(a),
        Command::CheckGeometry(a) => commands::check_geometry(&out, a),
        Command::Counterexample(a) => commands::counterexample(&out, a),
        Command::DeepPrune(a) => commands::deep_prune(&out, a),
        Command::Finetune(a) => commands::finetune(&out, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(status_of(&err) as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn library_errors_map_to_statuses() {
        let io = greedy_subnet::Error::Io {
            path: "x".into(),
            source: std::io::Error::other("gone"),
        };
        assert_eq!(status_of(&io.into()), Status::Io);
        let div = greedy_subnet::Error::Diverged {
            step: 1,
            loss: 1e9,
            initial: 1.0,
        };
        assert_eq!(status_of(&div.into()), Status::Diverged);
        let bad = greedy_subnet::Error::InvalidInput("x".into());
        assert_eq!(status_of(&bad.into()), Status::Invalid);
        assert_eq!(status_of(&fail(Status::NotConverged, "slow")), Status::NotConverged);
    }
}
