//! A constrained surrogate on a rectangular domain: scaling to the unit
//! cube, output centering, conditioning, mode and sampling.

use anyhow::{Context, Result};
use shapegp::constraint::{check_function_shape, encode};
use shapegp::linalg::dot;
use shapegp::qp::{solve_map, QpSolution};
use shapegp::sampler::{credible_band, sample_truncated};
use shapegp::{
    CoefficientPosterior, DomainMap, FiniteGp, KernelFamily, KernelSpec, KnotGrid,
    LinearInequalitySystem, ModelKind, ObservationSet, RngStream, SampleBatch, ShapeConstraint,
};

/// Model pieces that do not depend on the data.
#[derive(Debug, Clone)]
pub struct Surrogate {
    pub gp: FiniteGp,
    pub constraint: ShapeConstraint,
    pub system: LinearInequalitySystem,
    pub domain: DomainMap,
    pub center: bool,
    /// Lengthscales in original coordinates.
    pub theta: Vec<f64>,
}

impl Surrogate {
    pub fn new(
        constraint: ShapeConstraint,
        domain: DomainMap,
        grid_n: usize,
        family: KernelFamily,
        variance: f64,
        theta: Vec<f64>,
        center: bool,
    ) -> Result<Self> {
        let dim = domain.dim();
        let kind = constraint.natural_kind(dim);
        if kind.input_dim() != dim {
            anyhow::bail!(
                "{} constraint needs {} inputs, data has {dim}",
                constraint.name(),
                kind.input_dim()
            );
        }
        let grid = KnotGrid::new(dim, grid_n)?;
        let kernel =
            KernelSpec::new(family, variance, theta.clone())?.rescaled(&domain.widths())?;
        let gp = FiniteGp::new(kind, grid, kernel)?;
        let system = encode(&constraint, gp.grid(), kind)?;
        Ok(Surrogate {
            gp,
            constraint,
            system,
            domain,
            center,
            theta,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.gp.kind()
    }

    pub fn grid(&self) -> &KnotGrid {
        self.gp.grid()
    }

    /// Conditions on data in original coordinates and finds the mode.
    pub fn fit(&self, xs: &[Vec<f64>], ys: &[f64], noise: f64) -> Result<Fit> {
        let offset = if self.center && !ys.is_empty() {
            ys.iter().sum::<f64>() / ys.len() as f64
        } else {
            0.0
        };
        let units = xs
            .iter()
            .map(|x| self.domain.to_unit(x))
            .collect::<shapegp::Result<Vec<_>>>()?;
        let yc: Vec<f64> = ys.iter().map(|y| y - offset).collect();
        let obs = ObservationSet::new(units, yc, noise)?;
        let posterior = self.gp.condition(&obs).context("conditioning")?;
        let solution = solve_map(&posterior, &self.system).context("computing the mode")?;
        Ok(Fit {
            posterior,
            solution,
            offset,
        })
    }

    fn row(&self, x: &[f64]) -> Result<Vec<f64>> {
        let u = self.domain.to_unit(x)?;
        Ok(self.gp.design_row(&u)?)
    }

    pub fn map_at(&self, fit: &Fit, x: &[f64]) -> Result<f64> {
        Ok(fit.offset + dot(&self.row(x)?, &fit.solution.mu))
    }

    pub fn unconstrained_at(&self, fit: &Fit, x: &[f64]) -> Result<f64> {
        Ok(fit.offset + dot(&self.row(x)?, &fit.posterior.mean))
    }

    /// Checks the mode's shape at `probes` points per input.
    pub fn map_shape_ok(&self, fit: &Fit, probes: usize) -> Result<bool> {
        Ok(check_function_shape(
            self.kind(),
            self.grid(),
            &self.constraint,
            &fit.solution.mu,
            probes,
            1e-8 * (1.0 + shapegp::linalg::norm_inf(&fit.solution.mu)),
        )?)
    }

    pub fn sample(&self, fit: &Fit, m: usize, rng: &mut RngStream) -> Result<SampleBatch> {
        Ok(sample_truncated(
            &fit.posterior,
            &self.system,
            &fit.solution.mu,
            m,
            rng,
        )?)
    }

    /// Pointwise band in original coordinates.
    pub fn band(
        &self,
        fit: &Fit,
        batch: &SampleBatch,
        xs: &[Vec<f64>],
        level: f64,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let units = xs
            .iter()
            .map(|x| self.domain.to_unit(x))
            .collect::<shapegp::Result<Vec<_>>>()?;
        let (lo, hi) = credible_band(batch, self.kind(), self.grid(), &units, level)?;
        Ok((
            lo.into_iter().map(|v| v + fit.offset).collect(),
            hi.into_iter().map(|v| v + fit.offset).collect(),
        ))
    }
}

#[derive(Debug, Clone)]
pub struct Fit {
    pub posterior: CoefficientPosterior,
    pub solution: QpSolution,
    /// Added back to every prediction.
    pub offset: f64,
}
