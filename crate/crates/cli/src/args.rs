use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use genefuse::evaluation::Averaging;
use genefuse::learners::VoteMode;
use genefuse::pipeline::PipelineConfig;

#[derive(Parser, Debug)]
#[command(name = "genefuse", version, about = "Ensemble feature selection, particle swarm subset search and voting classification")]
pub struct Cli {
    /// Worker threads for every parallel stage (default: all cores)
    #[arg(long, global = true, env = "GENEFUSE_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Repeated hold-out runs (and optional k-fold CV) on a dataset
    Run(RunArgs),
    /// Runs the same workload at several thread caps and compares timings
    Scale(ScaleArgs),
    /// Writes a synthetic dataset and its informative-feature indices
    Synth(SynthArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Arff,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VoteArg {
    Hard,
    Weighted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AveragingArg {
    Macro,
    Weighted,
}

#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    /// Input dataset (CSV or ARFF)
    #[arg(long)]
    pub data: PathBuf,

    /// Input format; inferred from the extension when omitted
    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// CSV label column, by header name or 0-based index
    #[arg(long, default_value = "class")]
    pub label: String,
}

#[derive(Args, Debug, Clone, Default)]
pub struct PipelineArgs {
    /// JSON or TOML pipeline config; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[arg(long)]
    pub runs: Option<usize>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Also run k-fold cross-validation
    #[arg(long)]
    pub folds: Option<usize>,

    #[arg(long, value_enum)]
    pub vote: Option<VoteArg>,

    #[arg(long, value_enum)]
    pub averaging: Option<AveragingArg>,

    /// Select features once on all rows instead of per split
    #[arg(long)]
    pub global_selection: bool,

    /// Skip the swarm and train on the whole candidate pool
    #[arg(long)]
    pub no_pso: bool,

    #[arg(long)]
    pub pool_cap: Option<usize>,

    #[arg(long)]
    pub pso_swarm: Option<usize>,

    #[arg(long)]
    pub pso_iters: Option<usize>,

    #[arg(long)]
    pub pso_inertia: Option<f64>,

    #[arg(long)]
    pub pso_c1: Option<f64>,

    #[arg(long)]
    pub pso_c2: Option<f64>,

    /// Symmetric velocity clamp
    #[arg(long)]
    pub pso_vmax: Option<f64>,

    /// Size penalty weight in the swarm fitness
    #[arg(long)]
    pub pso_penalty: Option<f64>,

    /// Stop after this many iterations without improvement
    #[arg(long)]
    pub pso_patience: Option<usize>,

    #[arg(long)]
    pub rfe_target: Option<usize>,

    #[arg(long)]
    pub rfe_iterations: Option<usize>,

    /// Remove this many features per round instead of scheduling by rounds
    #[arg(long)]
    pub rfe_step: Option<usize>,

    #[arg(long)]
    pub rfe_trees: Option<usize>,
}

impl PipelineArgs {
    /// Applies every flag that was given on top of `cfg`.
    pub fn apply(&self, cfg: &mut PipelineConfig) {
        macro_rules! set {
            ($flag:expr => $field:expr) => {
                if let Some(v) = $flag {
                    $field = v;
                }
            };
        }
        set!(self.runs => cfg.runs);
        set!(self.seed => cfg.seed);
        if self.folds.is_some() {
            cfg.folds = self.folds;
        }
        set!(self.vote.map(|v| match v {
            VoteArg::Hard => VoteMode::Hard,
            VoteArg::Weighted => VoteMode::Weighted,
        }) => cfg.ensemble.vote);
        set!(self.averaging.map(|a| match a {
            AveragingArg::Macro => Averaging::Macro,
            AveragingArg::Weighted => Averaging::Weighted,
        }) => cfg.averaging);
        if self.global_selection {
            cfg.global_selection = true;
        }
        if self.no_pso {
            cfg.use_pso = false;
        }
        if self.pool_cap.is_some() {
            cfg.pool.cap = self.pool_cap;
        }
        set!(self.pso_swarm => cfg.pso.swarm_size);
        set!(self.pso_iters => cfg.pso.max_iter);
        set!(self.pso_inertia => cfg.pso.inertia);
        set!(self.pso_c1 => cfg.pso.c1);
        set!(self.pso_c2 => cfg.pso.c2);
        if let Some(v) = self.pso_vmax {
            cfg.pso.v_min = -v;
            cfg.pso.v_max = v;
        }
        set!(self.pso_penalty => cfg.pso.size_penalty);
        if self.pso_patience.is_some() {
            cfg.pso.early_stop = self.pso_patience;
        }
        set!(self.rfe_target => cfg.rfe.target_count);
        set!(self.rfe_iterations => cfg.rfe.iterations);
        if self.rfe_step.is_some() {
            cfg.rfe.step = self.rfe_step;
        }
        set!(self.rfe_trees => cfg.rfe.forest.n_trees);
    }
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub pipeline: PipelineArgs,

    /// Output directory for the report and manifest
    #[arg(long, default_value = "genefuse-out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ScaleArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub pipeline: PipelineArgs,

    /// Comma-separated thread caps
    #[arg(long = "caps", value_delimiter = ',', default_value = "1,2,4,8")]
    pub caps: Vec<usize>,

    #[arg(long, default_value = "genefuse-scale")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(short = 'n', long, default_value_t = 80)]
    pub samples: usize,

    #[arg(short = 'p', long, default_value_t = 2000)]
    pub features: usize,

    #[arg(long, default_value_t = 20)]
    pub informative: usize,

    #[arg(short = 'C', long, default_value_t = 2)]
    pub classes: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Mean shift of informative features between classes
    #[arg(long)]
    pub separation: Option<f64>,

    /// CSV path; the truth indices go to `<out>.truth`
    #[arg(long, default_value = "synthetic.csv")]
    pub out: PathBuf,
}
