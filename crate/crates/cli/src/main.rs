//! Command-line entry point wiring graph generation, sampling, reference
//! training, kernel simulation, analytical estimation, and design-space
//! exploration. Reports are deterministic structured text: the same
//! flags and seed always produce byte-identical files.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "gnnaccel",
    version,
    about = "GNN training accelerator modeling toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic graph (edge list + feature sidecar).
    GenGraph(GenGraphArgs),
    /// Sample one mini-batch and dump it as text.
    Sample(SampleArgs),
    /// Run reference training iterations on the host, reporting loss.
    Train(TrainArgs),
    /// Simulate one training iteration on the accelerator kernels.
    Simulate(SimulateArgs),
    /// Evaluate the analytical performance model.
    Estimate(EstimateArgs),
    /// Search for the throughput-optimal per-die parallelism.
    Dse(DseArgs),
    /// Chain sample, simulate, estimate, and dse with one configuration.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct GenGraphArgs {
    #[arg(long)]
    vertices: usize,
    #[arg(long)]
    avg_degree: f64,
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (graph.edges and graph.feats are written there).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct GraphArgs {
    /// Edge-list file: `src dst [weight]` per line, `#` comments.
    #[arg(long)]
    graph: PathBuf,
    /// Binary feature sidecar (u32 rows, u32 dim header, f32 payload).
    #[arg(long)]
    features: PathBuf,
    /// Add missing reverse edges at load time.
    #[arg(long, default_value_t = false)]
    symmetrize: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SamplerChoice {
    Neighbor,
    Subgraph,
}

#[derive(Args, Clone)]
struct SamplerArgs {
    #[arg(long, value_enum)]
    sampler: SamplerChoice,
    /// Target vertex count (neighbor sampling).
    #[arg(long, default_value_t = 64)]
    targets: usize,
    /// Per-layer fanouts NS^1..NS^L, comma separated (neighbor sampling).
    #[arg(long, value_delimiter = ',')]
    ns: Vec<usize>,
    /// Vertex budget (subgraph sampling).
    #[arg(long, default_value_t = 64)]
    budget: usize,
    #[arg(long, default_value_t = 2)]
    layers: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Which batch of the stream to draw.
    #[arg(long, default_value_t = 0)]
    batch_index: u64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModelChoice {
    Gcn,
    Sage,
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelChoice::Gcn)]
    model: ModelChoice,
    /// Hidden dimensions f^1..f^{L-1}, comma separated.
    #[arg(long, value_delimiter = ',')]
    hidden: Vec<usize>,
    /// Output classes f^L.
    #[arg(long, default_value_t = 8)]
    classes: usize,
}

#[derive(Args, Clone)]
struct HardwareArgs {
    /// Platform description file; defaults to the bundled U250-like preset.
    #[arg(long)]
    platform: Option<PathBuf>,
    /// Calibration file (lambda/rho/alpha/t_* overrides).
    #[arg(long)]
    calibration: Option<PathBuf>,
    /// Scatter/gather PE count per die.
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// MAC count per die.
    #[arg(long, default_value_t = 256)]
    m: usize,
    /// Override the platform's die count.
    #[arg(long)]
    dies: Option<usize>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 5)]
    iters: usize,
    #[arg(long, default_value_t = 0.05)]
    lr: f32,
    #[arg(long)]
    out: PathBuf,
    /// Write the trained model checkpoint here.
    #[arg(long)]
    save_model: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    hardware: HardwareArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    sampler: SamplerArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    hardware: HardwareArgs,
    /// Input feature width f^0 (read from --features when given).
    #[arg(long)]
    feat_dim: Option<usize>,
    /// Graph files, required to fit the sparsity model for subgraph shapes.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long, default_value_t = false)]
    symmetrize: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DseArgs {
    #[command(flatten)]
    estimate: EstimateArgs,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    sampler: SamplerArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    hardware: HardwareArgs,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenGraph(args) => commands::gen_graph(&args),
        Command::Sample(args) => commands::sample(&args),
        Command::Train(args) => commands::train(&args),
        Command::Simulate(args) => commands::simulate(&args),
        Command::Estimate(args) => commands::estimate(&args),
        Command::Dse(args) => commands::dse(&args),
        Command::Pipeline(args) => commands::pipeline(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
