//! Replicated simulation studies on the synthetic test functions.
//!
//! Every replication draws its design and noise from
//! `RngStream::new(seed).split(function id).split(replication)`, so results
//! do not depend on thread scheduling or on which other functions run.
//! Replications run on the rayon pool and are aggregated in index order.

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use shapegp::model::ReferenceKriging;
use shapegp::tuning::{cv_select, CvConfig};
use shapegp::{KernelSpec, ObservationSet, RngStream};

use crate::config::ExperimentConfig;
use crate::functions::TestFunction;
use crate::model::Surrogate;

/// One line of a results table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub function: String,
    pub estimator: String,
    pub metric: String,
    pub value: f64,
    pub stderr: f64,
    pub replications: usize,
    pub seed: u64,
}

/// Probes used for the shape check of every fitted mode, per input.
pub const SHAPE_PROBES_1D: usize = 1001;

/// Mean and standard error, summed in index order.
pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    shapegp::sampler::quantile_sorted(&s, 0.5)
}

pub fn replication_rng(seed: u64, f: TestFunction, rep: usize) -> RngStream {
    RngStream::new(seed).split(f.id()).split(rep as u64)
}

/// `n` points uniform on the half-open box `(lower, upper]`.
pub fn random_design(f: TestFunction, n: usize, rng: &mut RngStream) -> Vec<Vec<f64>> {
    let dom = f.domain();
    (0..n)
        .map(|_| {
            let u: Vec<f64> = (0..f.dim()).map(|_| 1.0 - rng.next_f64()).collect();
            dom.from_unit(&u)
        })
        .collect()
}

pub fn observe(f: TestFunction, xs: &[Vec<f64>], noise: f64, rng: &mut RngStream) -> Vec<f64> {
    xs.iter()
        .map(|x| f.eval(x) + noise * rng.next_normal())
        .collect()
}

/// `count` equispaced points `lower + width k / count`, `k = 1..=count`.
pub fn eval_points_1d(f: TestFunction, count: usize) -> Vec<Vec<f64>> {
    let dom = f.domain();
    (1..=count)
        .map(|k| dom.from_unit(&[k as f64 / count as f64]))
        .collect()
}

/// `side × side` lattice including the corners.
pub fn eval_points_2d(f: TestFunction, side: usize) -> Vec<Vec<f64>> {
    let dom = f.domain();
    let t = |k: usize| k as f64 / (side - 1) as f64;
    let mut out = Vec::with_capacity(side * side);
    for i in 0..side {
        for j in 0..side {
            out.push(dom.from_unit(&[t(i), t(j)]));
        }
    }
    out
}

fn run_reps<T: Send>(reps: usize, job: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    (0..reps)
        .into_par_iter()
        .map(|r| job(r).with_context(|| format!("replication {r}")))
        .collect()
}

fn rmse(f: TestFunction, xs: &[Vec<f64>], pred: impl Fn(&[f64]) -> Result<f64>) -> Result<f64> {
    let mut s = 0.0;
    for x in xs {
        let e = f.eval(x) - pred(x)?;
        s += e * e;
    }
    Ok((s / xs.len() as f64).sqrt())
}

fn mse(f: TestFunction, xs: &[Vec<f64>], pred: impl Fn(&[f64]) -> Result<f64>) -> Result<f64> {
    rmse(f, xs, pred).map(|r| r * r)
}

/// Lengthscales for one replication: leave-one-out on its data when
/// requested, otherwise the configured or reference values.
fn lengthscales(
    cfg: &ExperimentConfig,
    f: TestFunction,
    grid_n: usize,
    xs: &[Vec<f64>],
    ys: &[f64],
    noise: f64,
) -> Result<Vec<f64>> {
    let base = cfg.theta_for(f.dim(), &f.reference_theta())?;
    if !cfg.cv {
        return Ok(base);
    }
    let dom = f.domain();
    let probe = Surrogate::new(
        shapegp::ShapeConstraint::Unconstrained,
        dom.clone(),
        grid_n,
        cfg.kernel_family()?,
        cfg.variance,
        base,
        cfg.center,
    )?;
    let mean = if cfg.center {
        ys.iter().sum::<f64>() / ys.len() as f64
    } else {
        0.0
    };
    let units = xs
        .iter()
        .map(|x| dom.to_unit(x))
        .collect::<shapegp::Result<Vec<_>>>()?;
    let obs = ObservationSet::new(units, ys.iter().map(|y| y - mean).collect(), noise)?;
    let kind = f.constraint().natural_kind(f.dim());
    let mut cv = CvConfig::default_for(f.dim());
    cv.variance = cfg.variance;
    let k = cv_select(kind, probe.grid(), cfg.kernel_family()?, &obs, &cv)?;
    let widths = dom.widths();
    Ok(k.lengthscales()
        .iter()
        .zip(&widths)
        .map(|(t, w)| t * w)
        .collect())
}

fn surrogate(
    cfg: &ExperimentConfig,
    f: TestFunction,
    grid_n: usize,
    theta: Vec<f64>,
    center: bool,
) -> Result<Surrogate> {
    Surrogate::new(
        cfg.constraint_for(f.constraint())?,
        f.domain(),
        grid_n,
        cfg.kernel_family()?,
        cfg.variance,
        theta,
        center,
    )
}

fn record(
    cfg: &ExperimentConfig,
    f: TestFunction,
    estimator: &str,
    metric: String,
    values: &[f64],
) -> Record {
    let (value, stderr) = mean_se(values);
    Record {
        function: f.name().into(),
        estimator: estimator.into(),
        metric,
        value,
        stderr,
        replications: values.len(),
        seed: cfg.seed,
    }
}

struct RmseRep {
    centered: f64,
    uncentered: f64,
    unconstrained: f64,
    kriging: f64,
    shape_failures: f64,
    theta: Vec<f64>,
}

/// RMSE (× 100) of the mode at 100 equispaced points, with and without
/// output centering, next to the unconstrained mean and exact-kernel
/// kriging.
pub fn run_rmse_benchmark(cfg: &ExperimentConfig) -> Result<Vec<Record>> {
    cfg.validate()?;
    let n = cfg.n.unwrap_or(100);
    let noise = cfg.noise.unwrap_or(1.0);
    let grid_n = cfg.grid_n.unwrap_or(50);
    let mut out = Vec::new();
    for f in cfg.function_list(&TestFunction::ONE_D)? {
        let eval = eval_points_1d(f, 100);
        let fixed = if cfg.cv {
            None
        } else {
            let theta = cfg.theta_for(f.dim(), &f.reference_theta())?;
            Some((
                surrogate(cfg, f, grid_n, theta.clone(), true)?,
                surrogate(cfg, f, grid_n, theta, false)?,
            ))
        };
        let reps = run_reps(cfg.replications, |r| {
            let mut rng = replication_rng(cfg.seed, f, r);
            let xs = random_design(f, n, &mut rng);
            let ys = observe(f, &xs, noise, &mut rng);
            let owned;
            let (cen, unc) = match &fixed {
                Some((a, b)) => (a, b),
                None => {
                    let theta = lengthscales(cfg, f, grid_n, &xs, &ys, noise)?;
                    owned = (
                        surrogate(cfg, f, grid_n, theta.clone(), true)?,
                        surrogate(cfg, f, grid_n, theta, false)?,
                    );
                    (&owned.0, &owned.1)
                }
            };
            let fc = cen.fit(&xs, &ys, noise)?;
            let fu = unc.fit(&xs, &ys, noise)?;
            let mut fails = 0.0;
            for (s, fit) in [(cen, &fc), (unc, &fu)] {
                if !s.map_shape_ok(fit, SHAPE_PROBES_1D)? {
                    fails += 1.0;
                }
            }
            let offset = fc.offset;
            let kernel = KernelSpec::new(cfg.kernel_family()?, cfg.variance, cen.theta.clone())?;
            let yc: Vec<f64> = ys.iter().map(|y| y - offset).collect();
            let kr = ReferenceKriging::fit(&kernel, &xs, &yc, noise)?;
            Ok(RmseRep {
                centered: 100.0 * rmse(f, &eval, |x| cen.map_at(&fc, x))?,
                uncentered: 100.0 * rmse(f, &eval, |x| unc.map_at(&fu, x))?,
                unconstrained: 100.0 * rmse(f, &eval, |x| cen.unconstrained_at(&fc, x))?,
                kriging: 100.0 * rmse(f, &eval, |x| Ok(offset + kr.predict(x)?.0))?,
                shape_failures: fails,
                theta: cen.theta.clone(),
            })
        })?;
        let col = |g: fn(&RmseRep) -> f64| reps.iter().map(g).collect::<Vec<f64>>();
        out.push(record(
            cfg,
            f,
            "map",
            "rmse_x100".into(),
            &col(|r| r.centered),
        ));
        out.push(record(
            cfg,
            f,
            "map_uncentered",
            "rmse_x100".into(),
            &col(|r| r.uncentered),
        ));
        out.push(record(
            cfg,
            f,
            "unconstrained_mean",
            "rmse_x100".into(),
            &col(|r| r.unconstrained),
        ));
        out.push(record(
            cfg,
            f,
            "kriging",
            "rmse_x100".into(),
            &col(|r| r.kriging),
        ));
        let fails = col(|r| r.shape_failures);
        out.push(Record {
            value: fails.iter().sum(),
            stderr: 0.0,
            ..record(cfg, f, "map", "shape_check_failures".into(), &fails)
        });
        let thetas: Vec<f64> = reps.iter().map(|r| r.theta[0]).collect();
        out.push(record(cfg, f, "map", "theta".into(), &thetas));
    }
    Ok(out)
}

/// Percentage of replications whose pointwise credible band contains the
/// true function at each configured point.
pub fn run_coverage_benchmark(cfg: &ExperimentConfig) -> Result<Vec<Record>> {
    cfg.validate()?;
    let n = cfg.n.unwrap_or(100);
    let noise = cfg.noise.unwrap_or(1.0);
    let grid_n = cfg.grid_n.unwrap_or(50);
    let mut out = Vec::new();
    for f in cfg.function_list(&[TestFunction::Sinusoidal])? {
        if f.dim() != 1 {
            anyhow::bail!("coverage benchmark is one-dimensional");
        }
        let points: Vec<Vec<f64>> = cfg.coverage_points.iter().map(|&x| vec![x]).collect();
        let theta = cfg.theta_for(1, &f.reference_theta())?;
        let fixed = surrogate(cfg, f, grid_n, theta, cfg.center)?;
        let reps = run_reps(cfg.replications, |r| {
            let mut rng = replication_rng(cfg.seed, f, r);
            let xs = random_design(f, n, &mut rng);
            let ys = observe(f, &xs, noise, &mut rng);
            let owned;
            let s = if cfg.cv {
                owned = surrogate(
                    cfg,
                    f,
                    grid_n,
                    lengthscales(cfg, f, grid_n, &xs, &ys, noise)?,
                    cfg.center,
                )?;
                &owned
            } else {
                &fixed
            };
            let fit = s.fit(&xs, &ys, noise)?;
            let mut srng = rng.split(0);
            let batch = s.sample(&fit, cfg.samples, &mut srng)?;
            let (lo, hi) = s.band(&fit, &batch, &points, cfg.level)?;
            let hits: Vec<f64> = points
                .iter()
                .enumerate()
                .map(|(k, x)| {
                    let v = f.eval(x);
                    if lo[k] <= v && v <= hi[k] {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect();
            Ok((hits, batch.acceptance_rate))
        })?;
        for (k, x) in cfg.coverage_points.iter().enumerate() {
            let hits: Vec<f64> = reps.iter().map(|r| r.0[k]).collect();
            let p = hits.iter().sum::<f64>() / hits.len() as f64;
            out.push(Record {
                value: 100.0 * p,
                stderr: 100.0 * (p * (1.0 - p) / hits.len() as f64).sqrt(),
                ..record(
                    cfg,
                    f,
                    "credible_band",
                    format!("coverage_pct@x={x}"),
                    &hits,
                )
            });
        }
        let acc: Vec<f64> = reps.iter().map(|r| r.1).collect();
        out.push(record(cfg, f, "sampler", "acceptance_rate".into(), &acc));
    }
    Ok(out)
}

/// Default knot subdivisions per input for the 2-D study.
pub const DEFAULT_GRID_N_2D: usize = 20;

/// MSE (× 100) of the mode surface on a 32 × 32 lattice.
pub fn run_mse2d_benchmark(cfg: &ExperimentConfig) -> Result<Vec<Record>> {
    cfg.validate()?;
    let n = cfg.n.unwrap_or(1024);
    let noise = cfg.noise.unwrap_or(0.1);
    let grid_n = cfg.grid_n.unwrap_or(DEFAULT_GRID_N_2D);
    let mut out = Vec::new();
    for f in cfg.function_list(&TestFunction::TWO_D)? {
        if f.dim() != 2 {
            anyhow::bail!("mse2d benchmark is two-dimensional");
        }
        let eval = eval_points_2d(f, 32);
        let theta = cfg.theta_for(2, &f.reference_theta())?;
        let fixed = surrogate(cfg, f, grid_n, theta, cfg.center)?;
        let probes = 10 * grid_n + 1;
        let reps = run_reps(cfg.replications, |r| {
            let mut rng = replication_rng(cfg.seed, f, r);
            let xs = random_design(f, n, &mut rng);
            let ys = observe(f, &xs, noise, &mut rng);
            let owned;
            let s = if cfg.cv {
                owned = surrogate(
                    cfg,
                    f,
                    grid_n,
                    lengthscales(cfg, f, grid_n, &xs, &ys, noise)?,
                    cfg.center,
                )?;
                &owned
            } else {
                &fixed
            };
            let fit = s.fit(&xs, &ys, noise)?;
            let map = 100.0 * mse(f, &eval, |x| s.map_at(&fit, x))?;
            let unc = 100.0 * mse(f, &eval, |x| s.unconstrained_at(&fit, x))?;
            let ok = s.map_shape_ok(&fit, probes)?;
            Ok((map, unc, if ok { 0.0 } else { 1.0 }))
        })?;
        let map: Vec<f64> = reps.iter().map(|r| r.0).collect();
        let unc: Vec<f64> = reps.iter().map(|r| r.1).collect();
        let dom: Vec<f64> = reps
            .iter()
            .map(|r| if r.0 <= r.1 { 100.0 } else { 0.0 })
            .collect();
        let fails: Vec<f64> = reps.iter().map(|r| r.2).collect();
        out.push(record(cfg, f, "map", "mse_x100".into(), &map));
        out.push(record(
            cfg,
            f,
            "unconstrained_mean",
            "mse_x100".into(),
            &unc,
        ));
        out.push(record(
            cfg,
            f,
            "map_vs_unconstrained",
            "dominance_pct".into(),
            &dom,
        ));
        out.push(Record {
            value: fails.iter().sum(),
            stderr: 0.0,
            ..record(cfg, f, "map", "shape_check_failures".into(), &fails)
        });
    }
    Ok(out)
}

/// RMSE of the mode against the design size.
pub fn run_sample_size_sweep(cfg: &ExperimentConfig) -> Result<Vec<Record>> {
    cfg.validate()?;
    let noise = cfg.noise.unwrap_or(0.5);
    let grid_n = cfg.grid_n.unwrap_or(50);
    let mut out = Vec::new();
    for f in cfg.function_list(&[TestFunction::Logistic2])? {
        let eval = if f.dim() == 1 {
            eval_points_1d(f, 100)
        } else {
            eval_points_2d(f, 32)
        };
        let theta = cfg.theta_for(f.dim(), &f.reference_theta())?;
        let fixed = surrogate(cfg, f, grid_n, theta, cfg.center)?;
        for &n in &cfg.sweep_sizes {
            let reps = run_reps(cfg.replications, |r| {
                let mut rng = replication_rng(cfg.seed, f, r).split(n as u64);
                let xs = random_design(f, n, &mut rng);
                let ys = observe(f, &xs, noise, &mut rng);
                let owned;
                let s = if cfg.cv {
                    owned = surrogate(
                        cfg,
                        f,
                        grid_n,
                        lengthscales(cfg, f, grid_n, &xs, &ys, noise)?,
                        cfg.center,
                    )?;
                    &owned
                } else {
                    &fixed
                };
                let fit = s.fit(&xs, &ys, noise)?;
                rmse(f, &eval, |x| s.map_at(&fit, x))
            })?;
            out.push(record(cfg, f, "map", format!("rmse@n={n}"), &reps));
            out.push(Record {
                value: median(&reps),
                stderr: 0.0,
                ..record(cfg, f, "map", format!("median_rmse@n={n}"), &reps)
            });
        }
    }
    Ok(out)
}
