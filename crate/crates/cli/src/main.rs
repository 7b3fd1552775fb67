use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use shapegp_cli::config::ExperimentConfig;
use shapegp_cli::run::{execute, Command};

#[derive(Parser)]
#[command(
    name = "shapegp",
    version,
    about = "Shape-constrained Gaussian process approximation: fits and benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit a CSV dataset (Q² on a holdout) or one synthetic replication
    Fit(Flags),
    /// RMSE of the mode on the 1-D monotone functions
    RmseBench(Flags),
    /// Empirical coverage of pointwise credible bands
    CoverageBench(Flags),
    /// MSE of the mode on the 2-D isotonic functions
    Mse2dBench(Flags),
    /// RMSE against design size
    Sweep(Flags),
    /// Leave-one-out lengthscale scores
    Cv(Flags),
}

#[derive(Args, Default)]
struct Flags {
    /// JSON file with ExperimentConfig fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Knot subdivisions N
    #[arg(long = "grid-n")]
    grid_n: Option<usize>,
    #[arg(long)]
    noise: Option<f64>,
    /// none, positive, bounded:LO:HI, monotone, decreasing, convex,
    /// isotonic, isotonic:S1S2, convex2d
    #[arg(long)]
    constraint: Option<String>,
    /// se, matern52, matern32, exponential
    #[arg(long)]
    kernel: Option<String>,
    /// Lengthscales in original coordinates, comma separated
    #[arg(long, value_delimiter = ',')]
    theta: Option<Vec<f64>>,
    /// Test function ids, comma separated
    #[arg(long = "function", value_delimiter = ',')]
    functions: Option<Vec<String>>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Holdout fraction for `fit`
    #[arg(long)]
    holdout: Option<f64>,
    /// File of holdout row indices for `fit`
    #[arg(long = "holdout-index")]
    holdout_index: Option<PathBuf>,
    /// Posterior samples per fit
    #[arg(long)]
    samples: Option<usize>,
    /// Credible level
    #[arg(long)]
    level: Option<f64>,
    /// Select lengthscales by leave-one-out
    #[arg(long)]
    cv: bool,
    /// Fit raw outputs without subtracting their mean
    #[arg(long = "no-center")]
    no_center: bool,
    #[arg(long)]
    threads: Option<usize>,
}

impl Flags {
    fn into_config(self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($field:ident, $value:expr) => {
                if let Some(v) = $value {
                    cfg.$field = v;
                }
            };
        }
        set!(seed, self.seed);
        set!(out, self.out);
        set!(replications, self.reps);
        set!(kernel, self.kernel);
        set!(functions, self.functions);
        set!(holdout, self.holdout);
        set!(samples, self.samples);
        set!(level, self.level);
        if self.n.is_some() {
            cfg.n = self.n;
        }
        if self.grid_n.is_some() {
            cfg.grid_n = self.grid_n;
        }
        if self.noise.is_some() {
            cfg.noise = self.noise;
        }
        if self.constraint.is_some() {
            cfg.constraint = self.constraint;
        }
        if self.theta.is_some() {
            cfg.theta = self.theta;
        }
        if self.dataset.is_some() {
            cfg.dataset = self.dataset;
        }
        if self.holdout_index.is_some() {
            cfg.holdout_index = self.holdout_index;
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        cfg.cv |= self.cv;
        if self.no_center {
            cfg.center = false;
        }
        cfg.validate().context("invalid configuration")?;
        Ok(cfg)
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Cmd::Fit(f) => (Command::Fit, f),
        Cmd::RmseBench(f) => (Command::RmseBench, f),
        Cmd::CoverageBench(f) => (Command::CoverageBench, f),
        Cmd::Mse2dBench(f) => (Command::Mse2dBench, f),
        Cmd::Sweep(f) => (Command::Sweep, f),
        Cmd::Cv(f) => (Command::Cv, f),
    };
    let cfg = flags.into_config()?;
    for path in execute(command, &cfg)? {
        println!("{}", path.display());
    }
    Ok(())
}
