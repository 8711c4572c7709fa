use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Kernels between geometric trees: dataset generation, Gram matrices,
/// two-sample tests, classification and benchmarks.
///
/// Exit codes: 0 success, 1 data error, 2 usage error.
#[derive(Debug, Parser)]
#[command(name = "geotree", version)]
pub struct Cli {
    /// Worker threads for Gram assembly and permutation tests (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labelled two-class synthetic dataset.
    Gen(GenArgs),
    /// Compute a Gram matrix over a dataset.
    Kernel(KernelArgs),
    /// Permutation two-sample test on a Gram matrix.
    Test(TestArgs),
    /// Nearest-mean classification on a stratified holdout split.
    Classify(ClassifyArgs),
    /// Time pairwise kernel evaluation on balanced trees of growing size.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Named class configurations.
    #[arg(long, value_parser = ["null", "attr-shift", "branch-shift"], default_value = "null")]
    pub preset: String,
    /// JSON generator config: one config for both classes, or
    /// `{"class_a": {...}, "class_b": {...}}`. Overrides the preset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Total number of trees, split evenly (class A gets the odd one).
    #[arg(long, default_value_t = 100)]
    pub size: usize,
    #[arg(long)]
    pub size_a: Option<usize>,
    #[arg(long)]
    pub size_b: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; receives trees.json, labels.csv and manifest.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelName {
    AllPairsEmbedded,
    RootpathEmbedded,
    AllPairsNode,
    RootpathNodeNaive,
    RootpathNode,
    RootpathNodeLinearFast,
    Pointcloud,
    Aaw,
    Agaw,
    Lbc,
    Gbc,
    Sp,
    Wl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Form {
    Linear,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Length {
    Delta,
    Linear,
}

/// Kernel parameters. Unset bandwidths use the dimension heuristics.
#[derive(Debug, Clone, Args)]
pub struct KernelParams {
    /// Node / landmark / summary kernel form. Defaults to linear for
    /// rootpath-node-linear-fast and gaussian otherwise.
    #[arg(long, value_enum)]
    pub form: Option<Form>,
    /// Multiply node kernels by an attribute kernel.
    #[arg(long)]
    pub attributed: bool,
    /// Position bandwidth (default 1/n).
    #[arg(long)]
    pub lambda1: Option<f64>,
    /// Attribute bandwidth (default 1/d).
    #[arg(long)]
    pub lambda2: Option<f64>,
    /// Landmark bandwidth for embedded paths (default 1/(m·n)).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Landmarks per embedded path.
    #[arg(long, default_value_t = 20)]
    pub landmarks: usize,
    /// Attribute component used by aaw/agaw.
    #[arg(long, default_value_t = 0)]
    pub attr_index: usize,
    /// First generation (root = 0) averaged by agaw.
    #[arg(long, default_value_t = 3)]
    pub gen_lo: usize,
    /// Last generation averaged by agaw.
    #[arg(long, default_value_t = 6)]
    pub gen_hi: usize,
    /// Path-length kernel for sp.
    #[arg(long, value_enum, default_value_t = Length::Delta)]
    pub length_kernel: Length,
    /// Refinement rounds for wl.
    #[arg(long, default_value_t = 10)]
    pub iterations: usize,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// Dataset: a JSON file (array or single tree) or a directory of JSON files.
    #[arg(long)]
    pub trees: PathBuf,
    #[arg(long, value_enum, required_unless_present = "spec_file")]
    pub kernel: Option<KernelName>,
    /// JSON kernel spec (`{"kernel": "<name>", ...}`); replaces --kernel and
    /// parameter flags.
    #[arg(long, conflicts_with = "kernel")]
    pub spec_file: Option<PathBuf>,
    #[command(flatten)]
    pub params: KernelParams,
    /// Divide by the square roots of the diagonal entries.
    #[arg(long)]
    pub normalize: bool,
    /// Report the eigenvalue range and fail if the matrix is not PSD.
    #[arg(long)]
    pub psd_check: bool,
    /// Recompute with the naive rootpath kernel and fail on any relative
    /// difference above 1e-9 (rootpath-node kernels only).
    #[arg(long)]
    pub check_against_naive: bool,
    /// Output CSV; the sidecar and manifest are written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[arg(long)]
    pub gram: PathBuf,
    /// `tree_id,label` CSV with labels 0 (class A) and 1 (class B).
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub permutations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Result JSON.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub gram: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// Fraction of each class held out for testing.
    #[arg(long, default_value_t = 0.3)]
    pub holdout: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Replace labels by a seeded random permutation of themselves.
    #[arg(long)]
    pub shuffle_labels: bool,
    /// Report JSON.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["rootpath-node-linear-fast", "rootpath-node-naive"])]
    pub kernel: Vec<KernelName>,
    #[arg(long, value_delimiter = ',', default_values_t = [50, 100, 200, 400, 800])]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub params: KernelParams,
    /// Timing CSV.
    #[arg(long)]
    pub out: PathBuf,
}
