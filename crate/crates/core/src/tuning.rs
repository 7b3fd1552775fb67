//! Lengthscale selection by cross-validation of the unconstrained mean.
//!
//! For leave-one-out the residuals come from a single factorization of
//! `C = AΓAᵀ + σ²I`: `y_i − ŷ_{−i} = [C⁻¹y]_i / [C⁻¹]_ii`.

use alloc::vec;
use alloc::vec::Vec;

use crate::basis::KnotGrid;
use crate::error::{Error, Result};
use crate::kernel::{KernelFamily, KernelSpec};
use crate::linalg::{dot, Cholesky, JitterPolicy, SymmetricMatrix};
use crate::model::{build_prior, condition, CoefficientPrior, ModelKind, ObservationSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Folds {
    LeaveOneOut,
    /// Observation `i` goes to fold `i mod k`.
    KFold(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    /// Candidate lengthscales for each input, strictly increasing. The
    /// search runs over their Cartesian product.
    pub grid: Vec<Vec<f64>>,
    pub folds: Folds,
    /// Process variance, held fixed.
    pub variance: f64,
}

impl CvConfig {
    pub fn new(grid: Vec<Vec<f64>>) -> Result<Self> {
        let c = CvConfig {
            grid,
            folds: Folds::LeaveOneOut,
            variance: 1.0,
        };
        c.validate()?;
        Ok(c)
    }

    /// `points` log-spaced values over `[lo, hi]` for each of `dim` inputs.
    pub fn log_spaced(dim: usize, lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && points >= 1) {
            return Err(Error::config(
                "log-spaced grid needs 0 < lo < hi and a point",
            ));
        }
        let (a, b) = (libm::log(lo), libm::log(hi));
        let axis: Vec<f64> = if points == 1 {
            vec![lo]
        } else {
            (0..points)
                .map(|k| libm::exp(a + (b - a) * k as f64 / (points - 1) as f64))
                .collect()
        };
        CvConfig::new(vec![axis; dim])
    }

    /// 20 log-spaced values over `[0.05, 100]` times the domain width, in
    /// unit-domain coordinates.
    pub fn default_for(dim: usize) -> Self {
        CvConfig::log_spaced(dim, 0.05, 100.0, 20).expect("valid default grid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::config("empty lengthscale grid"));
        }
        for axis in &self.grid {
            if axis.is_empty() {
                return Err(Error::config("empty lengthscale grid"));
            }
            if axis.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
                return Err(Error::config("lengthscales must be positive and finite"));
            }
            if axis.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::config(
                    "lengthscale grid must be strictly increasing",
                ));
            }
        }
        if !(self.variance > 0.0 && self.variance.is_finite()) {
            return Err(Error::config("variance must be positive"));
        }
        if let Folds::KFold(k) = self.folds {
            if k < 2 {
                return Err(Error::config("k-fold needs k >= 2"));
            }
        }
        Ok(())
    }

    fn candidates(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new()];
        for axis in &self.grid {
            let mut next = Vec::with_capacity(out.len() * axis.len());
            for prefix in &out {
                for &t in axis {
                    let mut p = prefix.clone();
                    p.push(t);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }
}

/// Score of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct CvScore {
    pub lengthscales: Vec<f64>,
    /// Mean squared held-out prediction error.
    pub score: f64,
}

/// Held-out residuals `y_i − ŷ_{−i}` by the closed form.
pub fn loo_residuals(
    prior: &CoefficientPrior,
    a: &crate::linalg::Matrix,
    y: &[f64],
    noise_sd: f64,
) -> Result<Vec<f64>> {
    let n = y.len();
    if a.rows() != n || a.cols() != prior.covariance.dim() {
        return Err(Error::arg("observation matrix does not match"));
    }
    let ag = a.matmul(prior.covariance.as_matrix());
    let mut c = a.matmul(&ag.transpose());
    for i in 0..n {
        c[(i, i)] += noise_sd * noise_sd;
    }
    let chol = Cholesky::new(&SymmetricMatrix::symmetrize(c), JitterPolicy::default())?;
    let alpha = chol.solve(y);
    let diag = chol.inverse_diagonal();
    Ok(alpha.iter().zip(&diag).map(|(a, d)| a / d).collect())
}

fn kfold_residuals(
    prior: &CoefficientPrior,
    a: &crate::linalg::Matrix,
    y: &[f64],
    noise_sd: f64,
    k: usize,
) -> Result<Vec<f64>> {
    let n = y.len();
    let mut resid = vec![0.0; n];
    for fold in 0..k {
        let train: Vec<usize> = (0..n).filter(|i| i % k != fold).collect();
        if train.len() == n {
            continue;
        }
        let rows: Vec<Vec<f64>> = train.iter().map(|&i| a.row(i).to_vec()).collect();
        let at = crate::linalg::Matrix::from_rows(&rows, a.cols())?;
        let yt: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let post = condition(prior, &at, &yt, noise_sd)?;
        for i in (0..n).filter(|i| i % k == fold) {
            resid[i] = y[i] - dot(a.row(i), &post.mean);
        }
    }
    Ok(resid)
}

fn check_data(data: &ObservationSet) -> Result<()> {
    if data.len() < 3 {
        return Err(Error::config(
            "cross-validation needs at least three observations",
        ));
    }
    let first = &data.points()[0];
    if data.points().iter().all(|p| p == first) {
        return Err(Error::config("all inputs coincide"));
    }
    Ok(())
}

/// Scores every grid point, in grid order (last input fastest).
pub fn cv_scores(
    kind: ModelKind,
    grid: &KnotGrid,
    family: KernelFamily,
    data: &ObservationSet,
    config: &CvConfig,
) -> Result<Vec<CvScore>> {
    config.validate()?;
    check_data(data)?;
    if config.grid.len() != kind.input_dim() {
        return Err(Error::config("grid dimension does not match the model"));
    }
    let mut out = Vec::new();
    for theta in config.candidates() {
        let kernel = KernelSpec::new(family, config.variance, theta.clone())?;
        let prior = build_prior(kind, grid, &kernel)?;
        let a = grid_observation_matrix(kind, grid, data)?;
        let resid = match config.folds {
            Folds::LeaveOneOut => loo_residuals(&prior, &a, data.values(), data.noise_sd())?,
            Folds::KFold(k) => kfold_residuals(&prior, &a, data.values(), data.noise_sd(), k)?,
        };
        let score = resid.iter().map(|r| r * r).sum::<f64>() / resid.len() as f64;
        out.push(CvScore {
            lengthscales: theta,
            score,
        });
    }
    Ok(out)
}

fn grid_observation_matrix(
    kind: ModelKind,
    grid: &KnotGrid,
    data: &ObservationSet,
) -> Result<crate::linalg::Matrix> {
    let rows: Vec<Vec<f64>> = data
        .points()
        .iter()
        .map(|p| grid.design_row(kind, p))
        .collect::<Result<_>>()?;
    crate::linalg::Matrix::from_rows(&rows, kind.coefficient_count(grid))
}

/// Index of the best score; near ties (relative `1e-12`) go to the later,
/// smoother grid point.
pub fn select(scores: &[CvScore]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, s) in scores.iter().enumerate() {
        if !s.score.is_finite() {
            continue;
        }
        match best {
            None => best = Some(i),
            Some(b) => {
                if s.score <= scores[b].score * (1.0 + 1e-12) {
                    best = Some(i);
                }
            }
        }
    }
    best
}

/// The kernel whose lengthscales minimize the held-out error.
pub fn cv_select(
    kind: ModelKind,
    grid: &KnotGrid,
    family: KernelFamily,
    data: &ObservationSet,
    config: &CvConfig,
) -> Result<KernelSpec> {
    let scores = cv_scores(kind, grid, family, data, config)?;
    let i = select(&scores).ok_or_else(|| Error::config("no finite cross-validation score"))?;
    KernelSpec::new(family, config.variance, scores[i].lengthscales.clone())
}
