use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use egs_core::analysis::ModelFamily;
use egs_core::Basis;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "egs",
    version,
    about = "Maximum-entropy spectral densities of large sparse graphs"
)]
pub struct Cli {
    /// Worker threads for parallel stages; all cores when unset.
    #[arg(long, global = true, env = "EGS_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the entropic spectrum of a graph and export it with a density grid.
    Spectrum(SpectrumArgs),
    /// Estimate the number of clusters from the mass below the spectral gap.
    Clusters(ClustersArgs),
    /// Pairwise symmetric KL divergences between graph spectra.
    Similarity(SimilarityArgs),
    /// Entropic, smoothed Lanczos and exact densities on a shared grid.
    CompareBaseline(CompareArgs),
    /// Write a synthetic graph as an edge list.
    Generate(GenerateArgs),
    /// Infer the parameter of one random-graph family for a graph.
    Infer(InferArgs),
    /// Rank the ER, WS and BA families for a graph.
    Classify(ClassifyArgs),
    /// Rerun the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisArg {
    Power,
    Chebyshev,
}

impl From<BasisArg> for Basis {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::Power => Basis::Power,
            BasisArg::Chebyshev => Basis::ChebyshevShifted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyArg {
    Er,
    Ws,
    Ba,
}

impl From<FamilyArg> for ModelFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Er => ModelFamily::Er,
            FamilyArg::Ws => ModelFamily::Ws,
            FamilyArg::Ba => ModelFamily::Ba,
        }
    }
}

/// Moment estimation and fitting options shared by every fitting command.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FitArgs {
    /// Number of moments.
    #[arg(short = 'm', long = "moments", default_value_t = 50)]
    pub moments: usize,

    /// Number of random probe vectors.
    #[arg(short = 'd', long = "probes", default_value_t = 100)]
    pub probes: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, value_enum, default_value_t = BasisArg::Chebyshev)]
    pub basis: BasisArg,

    /// Solver tolerance on the (penalized) moment residual.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,

    /// Standard errors of moment noise the fit may absorb; 0 demands an
    /// exact moment match.
    #[arg(long, default_value_t = 1.0)]
    pub noise_scale: f64,
}

/// Output destination shared by every command.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OutArgs {
    /// Output prefix. Every artifact goes to `<out>.<ext>` next to
    /// `<out>.manifest.json`; without it the main result goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Format of the result printed to stdout.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    pub graph: PathBuf,
    #[command(flatten)]
    pub fit: FitArgs,
    /// Points of the exported density grid.
    #[arg(long, default_value_t = 1001)]
    pub grid: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ClustersArgs {
    pub graph: PathBuf,
    #[command(flatten)]
    pub fit: FitArgs,
    /// Derivative tolerance; relative to the largest |p'| when unset.
    #[arg(long)]
    pub eta: Option<f64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimilarityArgs {
    /// Two or more graph files.
    #[arg(required = true, num_args = 2..)]
    pub graphs: Vec<PathBuf>,
    #[command(flatten)]
    pub fit: FitArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    pub graph: PathBuf,
    #[command(flatten)]
    pub fit: FitArgs,
    /// Gaussian bandwidth for smoothing the Lanczos atoms.
    #[arg(long, default_value_t = 1e-3)]
    pub sigma: f64,
    /// Lanczos steps per probe; the moment count when unset.
    #[arg(long)]
    pub lanczos_steps: Option<usize>,
    /// Histogram bins of the exact spectrum (graphs with at most 3000 nodes).
    #[arg(long, default_value_t = 100)]
    pub bins: usize,
    #[arg(long, default_value_t = 1001)]
    pub grid: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    /// Node count; the product of cluster count and size for planted graphs.
    #[arg(short = 'n', long)]
    pub nodes: Option<usize>,
    /// Edge probability (ER and planted clusters).
    #[arg(long)]
    pub p: Option<f64>,
    /// Ring degree (WS).
    #[arg(long, default_value_t = egs_core::generators::DEFAULT_WS_DEGREE)]
    pub k: usize,
    /// Rewiring probability (WS).
    #[arg(long)]
    pub p_rewire: Option<f64>,
    /// Attachment edges per node (BA).
    #[arg(long)]
    pub r: Option<usize>,
    /// Number of planted clusters.
    #[arg(long)]
    pub clusters: Option<usize>,
    /// Nodes per planted cluster.
    #[arg(long)]
    pub cluster_size: Option<usize>,
    /// Edges added between distinct planted clusters.
    #[arg(long, default_value_t = 0)]
    pub inter_edges: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output prefix; the edge list goes to `<out>.txt`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelArg {
    Er,
    Ws,
    Ba,
    Planted,
}

/// Candidate search options shared by `infer` and `classify`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SearchArgs {
    /// Node count of candidate graphs; the target's when unset.
    #[arg(long)]
    pub n0: Option<usize>,
    /// Objective evaluations of the probability search.
    #[arg(long, default_value_t = 20)]
    pub evaluations: usize,
    /// Largest attachment count tried for BA candidates.
    #[arg(long)]
    pub r_max: Option<usize>,
    /// Seed of the candidate graphs.
    #[arg(long, default_value_t = 0)]
    pub search_seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct InferArgs {
    pub graph: PathBuf,
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[command(flatten)]
    pub fit: FitArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    pub graph: PathBuf,
    #[command(flatten)]
    pub fit: FitArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Write to this prefix instead of the recorded one.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
