//! CSV datasets, holdout fits with Q², and lengthscale selection on data.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use shapegp::tuning::{cv_scores, select, CvConfig};
use shapegp::{DomainMap, ObservationSet, RngStream, ShapeConstraint};

use crate::bench::{observe, random_design, replication_rng, Record};
use crate::config::ExperimentConfig;
use crate::functions::TestFunction;
use crate::model::Surrogate;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub names: Vec<String>,
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<f64>,
    /// File line of each row, for messages.
    pub lines: Vec<u64>,
}

impl Dataset {
    pub fn dim(&self) -> usize {
        self.names.len() - 1
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .with_context(|| format!("opening {}", path.display()))?;
        let names: Vec<String> = rdr
            .headers()?
            .iter()
            .map(|s| s.trim().to_string())
            .collect();
        if names.len() < 2 {
            bail!(
                "{}: need at least one input column and a response",
                path.display()
            );
        }
        let mut ds = Dataset {
            names,
            xs: Vec::new(),
            ys: Vec::new(),
            lines: Vec::new(),
        };
        for rec in rdr.records() {
            let rec = rec.with_context(|| format!("{}: malformed CSV", path.display()))?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            if rec.len() != ds.names.len() {
                bail!(
                    "{} line {line}: expected {} fields, found {}",
                    path.display(),
                    ds.names.len(),
                    rec.len()
                );
            }
            let vals = rec
                .iter()
                .map(|s| {
                    let v: f64 = s.trim().parse().map_err(|_| {
                        anyhow!("{} line {line}: '{s}' is not a number", path.display())
                    })?;
                    if !v.is_finite() {
                        bail!("{} line {line}: non-finite value", path.display());
                    }
                    Ok(v)
                })
                .collect::<Result<Vec<f64>>>()?;
            let (x, y) = vals.split_at(vals.len() - 1);
            ds.xs.push(x.to_vec());
            ds.ys.push(y[0]);
            ds.lines.push(line);
        }
        if ds.is_empty() {
            bail!("{}: no data rows", path.display());
        }
        Ok(ds)
    }

    /// Configured bounds, or the bounding box of the inputs.
    pub fn domain(&self, cfg: &ExperimentConfig) -> Result<DomainMap> {
        let d = self.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for x in &self.xs {
            for k in 0..d {
                lo[k] = lo[k].min(x[k]);
                hi[k] = hi[k].max(x[k]);
            }
        }
        let lower = cfg.domain_lower.clone().unwrap_or(lo);
        let upper = cfg.domain_upper.clone().unwrap_or(hi);
        if lower.len() != d || upper.len() != d {
            bail!("domain bounds must have {d} entries");
        }
        DomainMap::new(lower, upper).map_err(|e| anyhow!("invalid domain: {e}"))
    }

    /// Lines of rows outside `domain`.
    pub fn out_of_domain(&self, domain: &DomainMap) -> Vec<u64> {
        self.xs
            .iter()
            .zip(&self.lines)
            .filter(|(x, _)| !domain.contains(x))
            .map(|(_, &l)| l)
            .collect()
    }
}

/// `1 − Σ(t − p)² / Σ(t − t̄)²`.
pub fn q2(truth: &[f64], pred: &[f64]) -> f64 {
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let num: f64 = truth.iter().zip(pred).map(|(t, p)| (t - p) * (t - p)).sum();
    let den: f64 = truth.iter().map(|t| (t - mean) * (t - mean)).sum();
    1.0 - num / den
}

/// Holdout rows: from the index file, else a seeded random fraction. An
/// empty holdout means evaluation on the training rows.
fn holdout_rows(cfg: &ExperimentConfig, n: usize) -> Result<Vec<usize>> {
    if let Some(path) = &cfg.holdout_index {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut rows = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let i: usize = t
                .parse()
                .map_err(|_| anyhow!("{} line {}: bad row index '{t}'", path.display(), k + 1))?;
            if i >= n {
                bail!("{} line {}: row {i} out of range", path.display(), k + 1);
            }
            rows.push(i);
        }
        rows.sort_unstable();
        rows.dedup();
        return Ok(rows);
    }
    let count = (cfg.holdout * n as f64).round() as usize;
    if count == 0 {
        return Ok(Vec::new());
    }
    if count >= n {
        bail!("holdout leaves no training rows");
    }
    let mut rng = RngStream::new(cfg.seed);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        idx.swap(i, j);
    }
    let mut rows = idx[..count].to_vec();
    rows.sort_unstable();
    Ok(rows)
}

fn default_grid_n(dim: usize) -> usize {
    match dim {
        1 => 50,
        2 => 20,
        _ => 4,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelInfo {
    pub family: String,
    pub variance: f64,
    /// Original coordinates.
    pub lengthscales: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitArtifact {
    pub dataset: String,
    pub inputs: Vec<String>,
    pub response: String,
    pub model: String,
    pub constraint: String,
    pub grid_n: usize,
    pub kernel: KernelInfo,
    pub domain_lower: Vec<f64>,
    pub domain_upper: Vec<f64>,
    pub noise: f64,
    pub offset: f64,
    pub n_train: usize,
    pub n_holdout: usize,
    pub holdout_rows: Vec<usize>,
    pub q2_unconstrained: f64,
    pub q2_map: f64,
    pub qp_iterations: usize,
    pub active_rows: usize,
    pub kkt_residual: f64,
    pub map_shape_ok: bool,
    pub gamma_cond_dim: [usize; 2],
    pub zeta_i: Vec<f64>,
    pub mu: Vec<f64>,
    pub config: ExperimentConfig,
}

#[derive(Debug)]
pub struct FitOutcome {
    pub artifact: FitArtifact,
    pub records: Vec<Record>,
    /// `(row, set, x…, y, unconstrained, map)` lines.
    pub predictions: (Vec<String>, Vec<Vec<String>>),
}

fn selected_theta(
    cfg: &ExperimentConfig,
    constraint: ShapeConstraint,
    domain: &DomainMap,
    grid_n: usize,
    xs: &[Vec<f64>],
    ys: &[f64],
    noise: f64,
) -> Result<Vec<f64>> {
    let d = domain.dim();
    if !cfg.cv {
        if let Some(t) = &cfg.theta {
            return cfg.theta_for(d, t);
        }
    }
    let (scores, _) = cv_table(cfg, constraint, domain, grid_n, xs, ys, noise)?;
    let i = select(&scores).ok_or_else(|| anyhow!("no finite cross-validation score"))?;
    Ok(scores[i].lengthscales.clone())
}

/// Leave-one-out scores over the default grid; lengthscales returned in
/// original coordinates.
fn cv_table(
    cfg: &ExperimentConfig,
    constraint: ShapeConstraint,
    domain: &DomainMap,
    grid_n: usize,
    xs: &[Vec<f64>],
    ys: &[f64],
    noise: f64,
) -> Result<(Vec<shapegp::tuning::CvScore>, Vec<f64>)> {
    let d = domain.dim();
    let kind = constraint.natural_kind(d);
    let grid = shapegp::KnotGrid::new(d, grid_n)?;
    let offset = if cfg.center {
        ys.iter().sum::<f64>() / ys.len() as f64
    } else {
        0.0
    };
    let units = xs
        .iter()
        .map(|x| domain.to_unit(x))
        .collect::<shapegp::Result<Vec<_>>>()?;
    let obs = ObservationSet::new(units, ys.iter().map(|y| y - offset).collect(), noise)?;
    let mut cv = CvConfig::default_for(d);
    cv.variance = cfg.variance;
    let mut scores = cv_scores(kind, &grid, cfg.kernel_family()?, &obs, &cv)?;
    let widths = domain.widths();
    for s in &mut scores {
        for (t, w) in s.lengthscales.iter_mut().zip(&widths) {
            *t *= w;
        }
    }
    Ok((scores, widths))
}

/// Fits on the training rows of a CSV dataset and scores the holdout.
pub fn fit_csv(path: &Path, cfg: &ExperimentConfig) -> Result<FitOutcome> {
    cfg.validate()?;
    let ds = Dataset::load(path)?;
    let d = ds.dim();
    let domain = ds.domain(cfg)?;
    let bad = ds.out_of_domain(&domain);
    if !bad.is_empty() {
        let list: Vec<String> = bad.iter().map(|l| l.to_string()).collect();
        bail!(
            "{}: rows outside the domain at lines {}",
            path.display(),
            list.join(", ")
        );
    }
    let constraint = cfg.constraint_for(ShapeConstraint::Unconstrained)?;
    let grid_n = cfg.grid_n.unwrap_or(default_grid_n(d));
    let noise = cfg.noise.unwrap_or(1e-6);
    let hold = holdout_rows(cfg, ds.len())?;
    let in_hold = |i: usize| hold.binary_search(&i).is_ok();
    let train: Vec<usize> = (0..ds.len()).filter(|&i| !in_hold(i)).collect();
    let test: Vec<usize> = if hold.is_empty() {
        train.clone()
    } else {
        hold.clone()
    };
    let txs: Vec<Vec<f64>> = train.iter().map(|&i| ds.xs[i].clone()).collect();
    let tys: Vec<f64> = train.iter().map(|&i| ds.ys[i]).collect();

    let theta = selected_theta(cfg, constraint, &domain, grid_n, &txs, &tys, noise)?;
    let s = Surrogate::new(
        constraint,
        domain.clone(),
        grid_n,
        cfg.kernel_family()?,
        cfg.variance,
        theta.clone(),
        cfg.center,
    )?;
    let fit = s.fit(&txs, &tys, noise)?;

    let truth: Vec<f64> = test.iter().map(|&i| ds.ys[i]).collect();
    let unc: Vec<f64> = test
        .iter()
        .map(|&i| s.unconstrained_at(&fit, &ds.xs[i]))
        .collect::<Result<_>>()?;
    let map: Vec<f64> = test
        .iter()
        .map(|&i| s.map_at(&fit, &ds.xs[i]))
        .collect::<Result<_>>()?;
    let q2_unc = q2(&truth, &unc);
    let q2_map = q2(&truth, &map);
    let probes = if d == 1 { 1001 } else { 10 * grid_n + 1 };
    let shape_ok = d > 2 || s.map_shape_ok(&fit, probes)?;

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    let rec = |estimator: &str, value: f64| Record {
        function: name.clone(),
        estimator: estimator.into(),
        metric: "q2".into(),
        value,
        stderr: 0.0,
        replications: 1,
        seed: cfg.seed,
    };
    let records = vec![rec("unconstrained_mean", q2_unc), rec("map", q2_map)];

    let mut header = vec!["row".to_string(), "set".to_string()];
    header.extend(ds.names.iter().cloned());
    header.push("unconstrained".into());
    header.push("map".into());
    let mut rows = Vec::new();
    for i in 0..ds.len() {
        let mut r = vec![
            i.to_string(),
            if in_hold(i) { "holdout" } else { "train" }.to_string(),
        ];
        r.extend(ds.xs[i].iter().map(|v| v.to_string()));
        r.push(ds.ys[i].to_string());
        r.push(s.unconstrained_at(&fit, &ds.xs[i])?.to_string());
        r.push(s.map_at(&fit, &ds.xs[i])?.to_string());
        rows.push(r);
    }

    let dim_coef = fit.posterior.dim();
    let artifact = FitArtifact {
        dataset: path.display().to_string(),
        inputs: ds.names[..d].to_vec(),
        response: ds.names[d].clone(),
        model: s.kind().name().into(),
        constraint: constraint.name().into(),
        grid_n,
        kernel: KernelInfo {
            family: cfg.kernel_family()?.name().into(),
            variance: cfg.variance,
            lengthscales: theta,
        },
        domain_lower: domain.lower().to_vec(),
        domain_upper: domain.upper().to_vec(),
        noise,
        offset: fit.offset,
        n_train: train.len(),
        n_holdout: hold.len(),
        holdout_rows: hold,
        q2_unconstrained: q2_unc,
        q2_map,
        qp_iterations: fit.solution.iterations,
        active_rows: fit.solution.active.len(),
        kkt_residual: fit.solution.kkt_residual,
        map_shape_ok: shape_ok,
        gamma_cond_dim: [dim_coef, dim_coef],
        zeta_i: fit.posterior.mean.clone(),
        mu: fit.solution.mu.clone(),
        config: cfg.clone(),
    };
    Ok(FitOutcome {
        artifact,
        records,
        predictions: (header, rows),
    })
}

/// One synthetic replication of a test function, with posterior curves on
/// a probe grid: `(header, rows)` with columns `x, truth, unconstrained,
/// map, mean, lower, upper`. 1-D only.
pub fn fit_function_curves(
    f: TestFunction,
    cfg: &ExperimentConfig,
) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    cfg.validate()?;
    if f.dim() != 1 {
        bail!("curve output is available for 1-D functions");
    }
    let n = cfg.n.unwrap_or(100);
    let noise = cfg.noise.unwrap_or(if f == TestFunction::Logistic2 {
        0.5
    } else {
        1.0
    });
    let grid_n = cfg.grid_n.unwrap_or(50);
    let mut rng = replication_rng(cfg.seed, f, 0);
    let xs = random_design(f, n, &mut rng);
    let ys = observe(f, &xs, noise, &mut rng);
    let constraint = cfg.constraint_for(f.constraint())?;
    let theta = if cfg.cv {
        selected_theta(cfg, constraint, &f.domain(), grid_n, &xs, &ys, noise)?
    } else {
        cfg.theta_for(1, &f.reference_theta())?
    };
    let s = Surrogate::new(
        constraint,
        f.domain(),
        grid_n,
        cfg.kernel_family()?,
        cfg.variance,
        theta,
        cfg.center,
    )?;
    let fit = s.fit(&xs, &ys, noise)?;
    let probes: Vec<Vec<f64>> = crate::bench::eval_points_1d(f, 200);
    // zero samples skips the band columns
    let band = if cfg.samples == 0 {
        None
    } else {
        let batch = s.sample(
            &fit,
            cfg.samples.max(shapegp::sampler::MIN_BAND_SAMPLES),
            &mut rng.split(0),
        )?;
        let (lo, hi) = s.band(&fit, &batch, &probes, cfg.level)?;
        Some((batch.mean_coefficients()?, lo, hi))
    };
    let header: Vec<String> = [
        "x",
        "truth",
        "unconstrained",
        "map",
        "mean",
        "lower",
        "upper",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut rows = Vec::new();
    for (k, x) in probes.iter().enumerate() {
        let mut row = vec![
            x[0].to_string(),
            f.eval(x).to_string(),
            s.unconstrained_at(&fit, x)?.to_string(),
            s.map_at(&fit, x)?.to_string(),
        ];
        match &band {
            Some((mean_coef, lo, hi)) => {
                let u = f.domain().to_unit(x)?;
                let mean = fit.offset + shapegp::linalg::dot(&s.gp.design_row(&u)?, mean_coef);
                row.extend([mean.to_string(), lo[k].to_string(), hi[k].to_string()]);
            }
            None => row.extend([String::new(), String::new(), String::new()]),
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// Leave-one-out scores on a dataset, or on one synthetic replication of
/// each configured test function.
pub fn run_cv(cfg: &ExperimentConfig) -> Result<Vec<Record>> {
    cfg.validate()?;
    let mut out = Vec::new();
    let mut push = |name: &str,
                    scores: &[shapegp::tuning::CvScore],
                    reference: Option<Vec<f64>>|
     -> Result<()> {
        let best = select(scores).ok_or_else(|| anyhow!("no finite cross-validation score"))?;
        for s in scores {
            let label: Vec<String> = s.lengthscales.iter().map(|t| format!("{t:.6}")).collect();
            out.push(Record {
                function: name.into(),
                estimator: "loo".into(),
                metric: format!("score@theta={}", label.join(";")),
                value: s.score,
                stderr: 0.0,
                replications: 1,
                seed: cfg.seed,
            });
        }
        for (k, t) in scores[best].lengthscales.iter().enumerate() {
            out.push(Record {
                function: name.into(),
                estimator: "loo".into(),
                metric: format!("selected_theta_{}", k + 1),
                value: *t,
                stderr: 0.0,
                replications: 1,
                seed: cfg.seed,
            });
        }
        if let Some(r) = reference {
            for (k, t) in r.iter().enumerate() {
                out.push(Record {
                    function: name.into(),
                    estimator: "reference".into(),
                    metric: format!("theta_{}", k + 1),
                    value: *t,
                    stderr: 0.0,
                    replications: 1,
                    seed: cfg.seed,
                });
            }
        }
        Ok(())
    };
    if let Some(path) = &cfg.dataset {
        let ds = Dataset::load(path)?;
        let domain = ds.domain(cfg)?;
        let constraint = cfg.constraint_for(ShapeConstraint::Unconstrained)?;
        let grid_n = cfg.grid_n.unwrap_or(default_grid_n(ds.dim()));
        let noise = cfg.noise.unwrap_or(1e-6);
        let (scores, _) = cv_table(cfg, constraint, &domain, grid_n, &ds.xs, &ds.ys, noise)?;
        let name = dataset_name(path);
        push(&name, &scores, None)?;
        return Ok(out);
    }
    for f in cfg.function_list(&TestFunction::ONE_D)? {
        let noise = cfg.noise.unwrap_or(match f.dim() {
            1 if f == TestFunction::Logistic2 => 0.5,
            1 => 1.0,
            _ => 0.1,
        });
        let n = cfg.n.unwrap_or(if f.dim() == 1 { 100 } else { 1024 });
        let grid_n = cfg.grid_n.unwrap_or(default_grid_n(f.dim()));
        let mut rng = replication_rng(cfg.seed, f, 0);
        let xs = random_design(f, n, &mut rng);
        let ys = observe(f, &xs, noise, &mut rng);
        let constraint = cfg.constraint_for(f.constraint())?;
        let (scores, _) = cv_table(cfg, constraint, &f.domain(), grid_n, &xs, &ys, noise)?;
        push(f.name(), &scores, Some(f.reference_theta()))?;
    }
    Ok(out)
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into())
}

/// Output file names used by the subcommands.
pub fn output_path(out: &Path, name: &str) -> PathBuf {
    out.join(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q2_definition() {
        let t = [1.0, 2.0, 3.0];
        assert_eq!(q2(&t, &t), 1.0);
        assert_eq!(q2(&t, &[2.0, 2.0, 2.0]), 0.0);
    }
}
