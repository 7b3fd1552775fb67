//! Exact sampling from the truncated coefficient posterior by rejection
//! from the mode, and Monte-Carlo summaries of the sampled paths.
//!
//! Proposals are `ζ = μ + L w` with `Γ_cond = L Lᵀ` and `w` standard
//! normal. Infeasible proposals are discarded; a feasible one is accepted
//! with probability
//!
//! ```text
//! t = exp((ζ_I − μ)ᵀ Γ_cond⁻¹ (ζ − μ)) = exp(−z*·w),   μ = ζ_I + L z*,
//! ```
//!
//! which never exceeds one on the feasible set because `μ` is the mode.

use alloc::vec;
use alloc::vec::Vec;

use crate::basis::KnotGrid;
use crate::constraint::LinearInequalitySystem;
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix, PivotedCholesky};
use crate::model::{CoefficientPosterior, ModelKind};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based 64-bit generator: output `k` is `mix64(key + k γ)`.
///
/// Child streams from [`split`](Self::split) use the key
/// `mix64(key ^ mix64(index + 1))`, so sub-batches seeded by index are
/// reproducible regardless of scheduling.
#[derive(Debug, Clone, PartialEq)]
pub struct RngStream {
    seed: u64,
    key: u64,
    counter: u64,
    spare: Option<f64>,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            seed,
            key: mix64(seed),
            counter: 0,
            spare: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of 64-bit words drawn so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn split(&self, index: u64) -> RngStream {
        let key = mix64(self.key ^ mix64(index.wrapping_add(1)));
        RngStream {
            seed: self.seed,
            key,
            counter: 0,
            spare: None,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let x = self
            .key
            .wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA));
        self.counter = self.counter.wrapping_add(1);
        mix64(x)
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal by the Box–Muller transform.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let a = 2.0 * core::f64::consts::PI * u2;
        self.spare = Some(r * libm::sin(a));
        r * libm::cos(a)
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.next_normal();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerOptions {
    /// Proposal count after which a low acceptance rate becomes an error.
    pub stall_proposals: u64,
    pub min_acceptance_rate: f64,
    /// Membership tolerance for proposals.
    pub membership_tol: f64,
    /// Relative pivot below which `Γ_cond` is treated as singular.
    pub pivot_tol: f64,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions {
            stall_proposals: 10_000_000,
            min_acceptance_rate: 1e-6,
            membership_tol: 0.0,
            pivot_tol: 1e-11,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    /// One accepted coefficient vector per row.
    pub samples: Matrix,
    pub proposals: u64,
    /// Proposals that satisfied the constraints.
    pub feasible: u64,
    pub acceptance_rate: f64,
    /// Largest exponent `−z*·w` seen on a feasible proposal. Positive
    /// values are round-off only.
    pub max_exponent: f64,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.samples.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.rows() == 0
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        self.samples.row(i)
    }

    /// Column means of the samples.
    pub fn mean_coefficients(&self) -> Result<Vec<f64>> {
        let m = self.len();
        if m == 0 {
            return Err(Error::arg("empty sample batch"));
        }
        let mut mean = vec![0.0; self.samples.cols()];
        for i in 0..m {
            for (acc, v) in mean.iter_mut().zip(self.samples.row(i)) {
                *acc += v;
            }
        }
        mean.iter_mut().for_each(|v| *v /= m as f64);
        Ok(mean)
    }

    /// Path values `Φ(x)ᵀ ζ^{(s)}` at one point, one per sample.
    pub fn path_values(&self, kind: ModelKind, grid: &KnotGrid, x: &[f64]) -> Result<Vec<f64>> {
        let row = grid.design_row(kind, x)?;
        if row.len() != self.samples.cols() {
            return Err(Error::arg("batch does not match the model"));
        }
        Ok((0..self.len())
            .map(|i| dot(&row, self.samples.row(i)))
            .collect())
    }

    /// Concatenates batches in order.
    pub fn merge(batches: &[SampleBatch]) -> Result<SampleBatch> {
        let first = batches
            .first()
            .ok_or_else(|| Error::arg("nothing to merge"))?;
        let cols = first.samples.cols();
        let mut data = Vec::new();
        let (mut proposals, mut feasible) = (0u64, 0u64);
        let mut max_exponent = f64::NEG_INFINITY;
        for b in batches {
            if b.samples.cols() != cols {
                return Err(Error::arg("batches have different widths"));
            }
            data.extend_from_slice(b.samples.as_slice());
            proposals += b.proposals;
            feasible += b.feasible;
            max_exponent = max_exponent.max(b.max_exponent);
        }
        let rows = data.len() / cols.max(1);
        Ok(SampleBatch {
            samples: Matrix::from_vec(rows, cols, data),
            proposals,
            feasible,
            acceptance_rate: if proposals == 0 {
                1.0
            } else {
                rows as f64 / proposals as f64
            },
            max_exponent,
        })
    }
}

/// Draws `m` samples of `N(ζ_I, Γ_cond)` restricted to `system`, using the
/// mode `mu` (from [`crate::qp::solve_map`]) as proposal centre.
pub fn sample_truncated(
    posterior: &CoefficientPosterior,
    system: &LinearInequalitySystem,
    mu: &[f64],
    m: usize,
    rng: &mut RngStream,
) -> Result<SampleBatch> {
    sample_truncated_with(posterior, system, mu, m, rng, &SamplerOptions::default())
}

pub fn sample_truncated_with(
    posterior: &CoefficientPosterior,
    system: &LinearInequalitySystem,
    mu: &[f64],
    m: usize,
    rng: &mut RngStream,
    options: &SamplerOptions,
) -> Result<SampleBatch> {
    let dim = posterior.dim();
    if mu.len() != dim || system.dim() != dim {
        return Err(Error::arg("sampler dimensions are inconsistent"));
    }
    let chol = PivotedCholesky::new(&posterior.covariance, options.pivot_tol)?;
    let offset: Vec<f64> = mu.iter().zip(&posterior.mean).map(|(a, b)| a - b).collect();
    let z_star = chol.solve_range(&offset);

    let mut data = Vec::with_capacity(m * dim);
    let mut w = vec![0.0; chol.rank()];
    let (mut proposals, mut feasible, mut accepted) = (0u64, 0u64, 0usize);
    let mut max_exponent = f64::NEG_INFINITY;
    while accepted < m {
        if proposals >= options.stall_proposals
            && (accepted as f64) < options.min_acceptance_rate * proposals as f64
        {
            return Err(Error::SamplerStall {
                proposals,
                accepted: accepted as u64,
            });
        }
        proposals += 1;
        rng.fill_normal(&mut w);
        let mut zeta = chol.mul(&w);
        for (v, c) in zeta.iter_mut().zip(mu) {
            *v += c;
        }
        if system
            .first_violation_unchecked(&zeta, options.membership_tol)
            .is_some()
        {
            continue;
        }
        feasible += 1;
        let e = -dot(&z_star, &w);
        max_exponent = max_exponent.max(e);
        let t = libm::exp(e.min(0.0));
        if rng.next_f64() < t {
            data.extend_from_slice(&zeta);
            accepted += 1;
        }
    }
    Ok(SampleBatch {
        samples: Matrix::from_vec(m, dim, data),
        proposals,
        feasible,
        acceptance_rate: if proposals == 0 {
            1.0
        } else {
            m as f64 / proposals as f64
        },
        max_exponent,
    })
}

/// `design_row(x)ᵀ ζ_pos` with `ζ_pos` the sample mean.
pub fn posterior_mean(
    batch: &SampleBatch,
    kind: ModelKind,
    grid: &KnotGrid,
    x: &[f64],
) -> Result<f64> {
    let mean = batch.mean_coefficients()?;
    if mean.len() != kind.coefficient_count(grid) {
        return Err(Error::arg("batch does not match the model"));
    }
    Ok(dot(&grid.design_row(kind, x)?, &mean))
}

/// Smallest batch accepted by [`credible_band`].
pub const MIN_BAND_SAMPLES: usize = 100;

/// Pointwise equal-tailed band: the `(1 − level)/2` and `(1 + level)/2`
/// empirical quantiles (linear interpolation between order statistics) of
/// the sampled paths at each probe. `level = 1` returns infinite bounds,
/// since the posterior has unbounded support.
pub fn credible_band(
    batch: &SampleBatch,
    kind: ModelKind,
    grid: &KnotGrid,
    probes: &[Vec<f64>],
    level: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if batch.len() < MIN_BAND_SAMPLES {
        return Err(Error::arg(alloc::format!(
            "credible band needs at least {MIN_BAND_SAMPLES} samples, got {}",
            batch.len()
        )));
    }
    if !(0.0..=1.0).contains(&level) {
        return Err(Error::arg("level must lie in [0, 1]"));
    }
    let (plo, phi) = (0.5 * (1.0 - level), 0.5 * (1.0 + level));
    let mut lower = Vec::with_capacity(probes.len());
    let mut upper = Vec::with_capacity(probes.len());
    for x in probes {
        let mut v = batch.path_values(kind, grid, x)?;
        if level >= 1.0 {
            lower.push(f64::NEG_INFINITY);
            upper.push(f64::INFINITY);
            continue;
        }
        v.sort_by(f64::total_cmp);
        lower.push(quantile_sorted(&v, plo));
        upper.push(quantile_sorted(&v, phi));
    }
    Ok((lower, upper))
}

/// Empirical quantile of sorted data, interpolating at `(m − 1) p`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let m = sorted.len();
    assert!(m > 0);
    let h = (m - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(m - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Mean curve, band and mode at a set of probes.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    /// `ζ_pos`.
    pub mean_coefficients: Vec<f64>,
    /// `μ`.
    pub map_coefficients: Vec<f64>,
    pub level: f64,
    pub probes: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub map: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl PosteriorSummary {
    pub fn new(
        batch: &SampleBatch,
        mu: &[f64],
        kind: ModelKind,
        grid: &KnotGrid,
        probes: Vec<Vec<f64>>,
        level: f64,
    ) -> Result<Self> {
        let mean_coefficients = batch.mean_coefficients()?;
        if mu.len() != mean_coefficients.len() {
            return Err(Error::arg("mode does not match the batch"));
        }
        let (lower, upper) = credible_band(batch, kind, grid, &probes, level)?;
        let mut mean = Vec::with_capacity(probes.len());
        let mut map = Vec::with_capacity(probes.len());
        for x in &probes {
            let row = grid.design_row(kind, x)?;
            mean.push(dot(&row, &mean_coefficients));
            map.push(dot(&row, mu));
        }
        Ok(PosteriorSummary {
            mean_coefficients,
            map_coefficients: mu.to_vec(),
            level,
            probes,
            mean,
            map,
            lower,
            upper,
        })
    }
}
