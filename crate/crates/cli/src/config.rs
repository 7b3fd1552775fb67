//! Experiment configuration, read from JSON and overridden by flags.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use shapegp::{Direction, KernelFamily, ShapeConstraint};

use crate::functions::TestFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Test function ids; empty means the benchmark's default set.
    pub functions: Vec<String>,
    /// CSV dataset for `fit` and `cv`.
    pub dataset: Option<PathBuf>,
    /// Constraint spec, see [`parse_constraint`]. Defaults to the shape
    /// declared by the test function.
    pub constraint: Option<String>,
    pub kernel: String,
    /// Lengthscales in original coordinates; one value is broadcast.
    pub theta: Option<Vec<f64>>,
    pub variance: f64,
    /// Select lengthscales by leave-one-out instead of `theta`.
    pub cv: bool,
    /// Knot subdivisions `N`.
    pub grid_n: Option<usize>,
    /// Design size `n`.
    pub n: Option<usize>,
    pub noise: Option<f64>,
    pub replications: usize,
    /// Posterior samples per fit.
    pub samples: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub level: f64,
    /// Subtract the training mean before fitting.
    pub center: bool,
    /// Fraction of dataset rows held out by `fit`; zero evaluates on the
    /// training rows.
    pub holdout: f64,
    /// File with one zero-based holdout row index per line.
    pub holdout_index: Option<PathBuf>,
    /// Domain bounds for dataset inputs; default is the data bounding box.
    pub domain_lower: Option<Vec<f64>>,
    pub domain_upper: Option<Vec<f64>>,
    pub sweep_sizes: Vec<usize>,
    pub coverage_points: Vec<f64>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            functions: Vec::new(),
            dataset: None,
            constraint: None,
            kernel: "se".into(),
            theta: None,
            variance: 1.0,
            cv: false,
            grid_n: None,
            n: None,
            noise: None,
            replications: 200,
            samples: 1000,
            seed: 20_170_101,
            out: PathBuf::from("results"),
            level: 0.95,
            center: true,
            holdout: 0.25,
            holdout_index: None,
            domain_lower: None,
            domain_upper: None,
            sweep_sizes: vec![25, 50, 100, 160, 200, 400],
            coverage_points: (1..=10).map(|k| 0.5 * k as f64).collect(),
            threads: None,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            bail!("replications must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.level) {
            bail!("level must lie in [0, 1]");
        }
        if !(0.0..1.0).contains(&self.holdout) {
            bail!("holdout fraction must lie in [0, 1)");
        }
        if !(self.variance > 0.0 && self.variance.is_finite()) {
            bail!("variance must be positive");
        }
        if let Some(s) = self.noise {
            if !(s >= 0.0 && s.is_finite()) {
                bail!("noise must be a finite nonnegative number");
            }
        }
        if let Some(t) = &self.theta {
            if t.is_empty() || t.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                bail!("theta values must be positive");
            }
        }
        if matches!(self.grid_n, Some(0)) {
            bail!("grid_n must be at least 1");
        }
        if matches!(self.n, Some(0)) {
            bail!("n must be at least 1");
        }
        if self.sweep_sizes.contains(&0) {
            bail!("sweep sizes must be positive");
        }
        self.kernel_family()?;
        if let Some(c) = &self.constraint {
            parse_constraint(c)?;
        }
        for f in &self.functions {
            TestFunction::parse(f).ok_or_else(|| anyhow!("unknown test function '{f}'"))?;
        }
        Ok(())
    }

    pub fn kernel_family(&self) -> Result<KernelFamily> {
        KernelFamily::parse(&self.kernel)
            .ok_or_else(|| anyhow!("unknown kernel family '{}'", self.kernel))
    }

    /// Requested functions, or `default` when none were named.
    pub fn function_list(&self, default: &[TestFunction]) -> Result<Vec<TestFunction>> {
        if self.functions.is_empty() {
            return Ok(default.to_vec());
        }
        self.functions
            .iter()
            .map(|f| TestFunction::parse(f).ok_or_else(|| anyhow!("unknown test function '{f}'")))
            .collect()
    }

    /// `theta` broadcast to `dim` inputs, or `fallback`.
    pub fn theta_for(&self, dim: usize, fallback: &[f64]) -> Result<Vec<f64>> {
        match &self.theta {
            None => Ok(fallback.to_vec()),
            Some(t) if t.len() == 1 => Ok(vec![t[0]; dim]),
            Some(t) if t.len() == dim => Ok(t.clone()),
            Some(t) => bail!("{} theta values given for a {dim}-input model", t.len()),
        }
    }

    pub fn constraint_for(&self, fallback: ShapeConstraint) -> Result<ShapeConstraint> {
        match &self.constraint {
            None => Ok(fallback),
            Some(c) => parse_constraint(c),
        }
    }
}

/// Accepted forms: `none`, `positive`, `bounded:<lo>:<hi>` (either side may
/// be `inf`), `monotone` / `increasing`, `decreasing`, `convex`,
/// `isotonic` (both inputs increasing), `isotonic:<s1><s2>` with each of
/// `s1`, `s2` one of `+`, `-`, `0`, and `convex2d`.
pub fn parse_constraint(s: &str) -> Result<ShapeConstraint> {
    let s = s.trim().to_ascii_lowercase();
    let c = match s.as_str() {
        "none" | "unconstrained" => ShapeConstraint::Unconstrained,
        "positive" => ShapeConstraint::bounded(0.0, f64::INFINITY)?,
        "monotone" | "increasing" => ShapeConstraint::Monotone1D(Direction::Increasing),
        "decreasing" => ShapeConstraint::Monotone1D(Direction::Decreasing),
        "convex" => ShapeConstraint::Convex1D,
        "isotonic" => ShapeConstraint::Isotonic2D([Some(Direction::Increasing); 2]),
        "convex2d" => ShapeConstraint::Convex2D,
        other => {
            if let Some(rest) = other.strip_prefix("bounded:") {
                let (lo, hi) = rest
                    .split_once(':')
                    .ok_or_else(|| anyhow!("expected bounded:<lo>:<hi>"))?;
                ShapeConstraint::bounded(parse_bound(lo)?, parse_bound(hi)?)?
            } else if let Some(rest) = other.strip_prefix("isotonic:") {
                let flags: Vec<Option<Direction>> = rest
                    .chars()
                    .map(|c| match c {
                        '+' => Ok(Some(Direction::Increasing)),
                        '-' => Ok(Some(Direction::Decreasing)),
                        '0' => Ok(None),
                        _ => Err(anyhow!("isotonic flags are +, - or 0")),
                    })
                    .collect::<Result<_>>()?;
                if flags.len() != 2 {
                    bail!("isotonic needs exactly two flags");
                }
                let c = ShapeConstraint::Isotonic2D([flags[0], flags[1]]);
                c.validate()?;
                c
            } else {
                bail!("unknown constraint '{other}'");
            }
        }
    };
    Ok(c)
}

fn parse_bound(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        v => v.parse::<f64>().with_context(|| format!("bad bound '{v}'")),
    }
}
