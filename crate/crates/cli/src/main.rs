//! `beamcast`: ingest CDRs, train the sector forecaster, build sweep
//! schedules and compare sweep policies in simulation.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input or config,
//! 3 numeric failure (diverged training, failed gradient check).

mod commands;
mod error;
mod output;
mod settings;

use clap::{Args, Parser, Subcommand};

use error::CliError;
use settings::{List, Settings};

#[derive(Debug, Parser)]
#[command(name = "beamcast", version, about = "Sector forecasting and SSB sweep ordering")]
struct Cli {
    /// Seed for every random choice in the run [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat `key = value` file; flags override it
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    /// Directory for output files [default: .]
    #[arg(long, global = true)]
    out_dir: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Aggregate raw CDR rows into a per-sector 10-minute series
    Ingest(IngestArgs),
    /// Train a forecaster on a sector series
    Train(TrainArgs),
    /// Forecast the counts of one slot
    Predict(PredictArgs),
    /// Turn a forecast into an SSB sweep schedule
    Schedule(ScheduleArgs),
    /// Compare sweep policies by simulated access delay
    Simulate(SimulateArgs),
    /// Score a model on the held-out split
    Eval(EvalArgs),
    /// Check analytic gradients against finite differences
    Gradcheck(GradcheckArgs),
    /// Write the bundled sample or a synthetic series
    Fixture(FixtureArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Raw CDR file
    #[arg(long)]
    pub raw: Option<String>,
    /// Sector map file (`square=sector` per line)
    #[arg(long)]
    pub map: Option<String>,
    /// Field delimiter: `tab`, `comma` or a single character [default: tab]
    #[arg(long)]
    pub delimiter: Option<String>,
    /// `record_count` or `activity_sum` [default: record_count]
    #[arg(long)]
    pub count_mode: Option<beamcast_core::ingest::CountMode>,
    /// [default: series.csv]
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Sector series CSV
    #[arg(long)]
    pub series: Option<String>,
    /// Input window in slots [default: 144]
    #[arg(long)]
    pub window: Option<usize>,
    /// Share of sequences used for training [default: 0.9]
    #[arg(long)]
    pub train_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// [default: 512]
    #[arg(long)]
    pub hidden: Option<usize>,
    /// [default: 5]
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Steps per epoch [default: 50]
    #[arg(long)]
    pub steps: Option<usize>,
    /// [default: 32]
    #[arg(long)]
    pub batch: Option<usize>,
    /// Learning rate [default: 0.001]
    #[arg(long)]
    pub lr: Option<f64>,
    /// `adam` or `sgd` [default: adam]
    #[arg(long)]
    pub optimizer: Option<beamcast_core::train::OptimizerKind>,
    /// Global gradient norm limit, 0 disables [default: 5]
    #[arg(long)]
    pub clip: Option<f64>,
    /// [default: model.gru]
    #[arg(long)]
    pub model_out: Option<String>,
    /// [default: loss_history.csv]
    #[arg(long)]
    pub history_out: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: Option<String>,
    #[command(flatten)]
    pub data: DataArgs,
    /// [default: eval.csv]
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: Option<String>,
    /// Sector series CSV
    #[arg(long)]
    pub series: Option<String>,
    /// Slot to forecast; the window before it must lie inside the series
    #[arg(long)]
    pub at_slot: Option<usize>,
    /// [default: 144]
    #[arg(long)]
    pub window: Option<usize>,
    /// [default: prediction.csv]
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    /// Explicit forecast `a,b,c,d`; otherwise one is computed from a model
    #[arg(long)]
    pub prediction: Option<List<f64>>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub series: Option<String>,
    #[arg(long)]
    pub at_slot: Option<usize>,
    /// [default: 144]
    #[arg(long)]
    pub window: Option<usize>,
    /// [default: schedule.csv]
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Model for the `predicted` policy
    #[arg(long)]
    pub model: Option<String>,
    /// [default: sequential,predicted,oracle]
    #[arg(long)]
    pub policies: Option<List<String>>,
    /// Number of seeds, starting at --seed [default: 30]
    #[arg(long)]
    pub seeds: Option<usize>,
    /// UEs arriving per CDR [default: 10]
    #[arg(long)]
    pub ues_per_cdr: Option<f64>,
    /// [default: 20000]
    #[arg(long)]
    pub burst_period_us: Option<f64>,
    /// Chance a UE catches one SSB aimed at it [default: 1]
    #[arg(long)]
    pub detect_prob: Option<f64>,
    /// Also write one row per simulated UE [default: false]
    #[arg(long)]
    pub write_ues: Option<bool>,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    /// Number of random models [default: 20]
    #[arg(long)]
    pub models: Option<usize>,
    /// Hidden sizes to cycle through [default: 4,8]
    #[arg(long)]
    pub hidden: Option<List<usize>>,
    /// Longest input sequence [default: 10]
    #[arg(long)]
    pub max_len: Option<usize>,
    /// [default: 0.00001]
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Largest acceptable relative error [default: 0.0001]
    #[arg(long)]
    pub threshold: Option<f64>,
    /// [default: gradcheck.csv]
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    /// `sample`, `milan` or `d-heavy` [default: milan]
    #[arg(long)]
    pub kind: Option<commands::FixtureKind>,
    /// Series length for synthetic kinds [default: 2016]
    #[arg(long)]
    pub slots: Option<usize>,
    /// [default: series.csv, or sample_raw.tsv for the sample]
    #[arg(long)]
    pub out: Option<String>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut s = Settings::load(cli.config.as_deref())?;
    let seed = s.value("seed", cli.seed, 0u64)?;
    let out_dir = s.value("out_dir", cli.out_dir, ".".to_string())?;
    let ctx = commands::Ctx { seed, out: output::OutDir::new(out_dir.into()) };
    match cli.command {
        Command::Ingest(a) => commands::ingest(&mut s, &ctx, a),
        Command::Train(a) => commands::train(&mut s, &ctx, a),
        Command::Predict(a) => commands::predict(&mut s, &ctx, a),
        Command::Schedule(a) => commands::schedule(&mut s, &ctx, a),
        Command::Simulate(a) => commands::simulate(&mut s, &ctx, a),
        Command::Eval(a) => commands::eval(&mut s, &ctx, a),
        Command::Gradcheck(a) => commands::gradcheck(&mut s, &ctx, a),
        Command::Fixture(a) => commands::fixture(&mut s, &ctx, a),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {}", e);
        std::process::exit(e.exit_code());
    }
}
