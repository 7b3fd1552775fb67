//! The finite-dimensional process and its Gaussian coefficient posterior.
//!
//! Three coefficient layouts are supported:
//!
//! * [`ModelKind::ValueBasis`]: `ζ_{i_1..i_d} = Y(t_{i_1}, .., t_{i_d})`,
//!   stored row-major with the first input's index slowest. The prior
//!   covariance is the kernel on the knot grid.
//! * [`ModelKind::MonotoneDerivBasis1D`]: `(γ, ζ_0..ζ_N)` with `γ = Y(0)`,
//!   `ζ_j = Y'(t_j)` and `Y^N(x) = γ + Σ ζ_j I_j(x)`.
//! * [`ModelKind::ConvexSecondDerivBasis1D`]: `(γ, κ, ζ_0..ζ_N)` with
//!   `κ = Y'(0)`, `ζ_j = Y''(t_j)` and `Y^N(x) = γ + κx + Σ ζ_j Φ̄_j(x)`.
//!
//! Inputs to everything in this module are already mapped to `[0,1]^d`.

use alloc::vec;
use alloc::vec::Vec;

use crate::basis::{clamp_unit, KnotGrid};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::linalg::{dot, Cholesky, JitterPolicy, Matrix, SymmetricMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    ValueBasis { dim: usize },
    MonotoneDerivBasis1D,
    ConvexSecondDerivBasis1D,
}

impl ModelKind {
    pub fn input_dim(self) -> usize {
        match self {
            ModelKind::ValueBasis { dim } => dim,
            _ => 1,
        }
    }

    pub fn coefficient_count(self, grid: &KnotGrid) -> usize {
        match self {
            ModelKind::ValueBasis { .. } => grid.value_coefficient_count(),
            ModelKind::MonotoneDerivBasis1D => grid.knots_per_dim() + 1,
            ModelKind::ConvexSecondDerivBasis1D => grid.knots_per_dim() + 2,
        }
    }

    /// Offset of `ζ_0` in the coefficient vector.
    pub fn knot_offset(self) -> usize {
        match self {
            ModelKind::ValueBasis { .. } => 0,
            ModelKind::MonotoneDerivBasis1D => 1,
            ModelKind::ConvexSecondDerivBasis1D => 2,
        }
    }

    /// Kernel derivative order needed per argument.
    pub fn required_kernel_order(self) -> u32 {
        match self {
            ModelKind::ValueBasis { .. } => 0,
            ModelKind::MonotoneDerivBasis1D => 1,
            ModelKind::ConvexSecondDerivBasis1D => 2,
        }
    }

    pub(crate) fn check_grid(self, grid: &KnotGrid) -> Result<()> {
        if let ModelKind::ValueBasis { dim } = self {
            if dim == 0 {
                return Err(Error::config("value basis needs dimension >= 1"));
            }
        }
        if grid.dim() != self.input_dim() {
            return Err(Error::config(alloc::format!(
                "{self:?} needs a {}-dimensional grid, got {}",
                self.input_dim(),
                grid.dim()
            )));
        }
        Ok(())
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::ValueBasis { .. } => "value",
            ModelKind::MonotoneDerivBasis1D => "monotone-derivative",
            ModelKind::ConvexSecondDerivBasis1D => "convex-second-derivative",
        }
    }
}

/// Covariance `Γ^N` of the coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientPrior {
    pub covariance: SymmetricMatrix,
}

/// Noisy observations `ỹ_i = y(x_i) + ε_i` with inputs in `[0,1]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    noise_sd: f64,
}

impl ObservationSet {
    pub fn new(points: Vec<Vec<f64>>, values: Vec<f64>, noise_sd: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::arg("observation set needs at least one point"));
        }
        if points.len() != values.len() {
            return Err(Error::arg("point and value counts differ"));
        }
        if !(noise_sd >= 0.0) || !noise_sd.is_finite() {
            return Err(Error::arg("noise standard deviation must be >= 0"));
        }
        let d = points[0].len();
        let mut clamped = Vec::with_capacity(points.len());
        for (i, p) in points.into_iter().enumerate() {
            if p.len() != d {
                return Err(Error::arg(alloc::format!(
                    "point {i} has the wrong dimension"
                )));
            }
            let mut q = Vec::with_capacity(d);
            for v in p {
                q.push(clamp_unit(v).map_err(|_| {
                    Error::arg(alloc::format!("point {i} lies outside the unit domain"))
                })?);
            }
            clamped.push(q);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("observation values must be finite"));
        }
        Ok(ObservationSet {
            points: clamped,
            values,
            noise_sd,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn noise_sd(&self) -> f64 {
        self.noise_sd
    }
}

/// Gaussian law of ζ given `Aζ + ε = ỹ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientPosterior {
    /// `ζ_I`.
    pub mean: Vec<f64>,
    /// `Γ_cond`.
    pub covariance: SymmetricMatrix,
    /// Observation operator `A` the posterior was conditioned on.
    pub observation: Matrix,
    /// Jitter that was needed to factor `AΓAᵀ + σ²I`.
    pub jitter: f64,
}

impl CoefficientPosterior {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

pub fn build_prior(
    kind: ModelKind,
    grid: &KnotGrid,
    kernel: &KernelSpec,
) -> Result<CoefficientPrior> {
    kind.check_grid(grid)?;
    if kernel.dim() != kind.input_dim() {
        return Err(Error::config("kernel dimension does not match model"));
    }
    kernel.require_order(kind.required_kernel_order())?;
    let t = grid.knots();
    let k = t.len();
    let covariance = match kind {
        ModelKind::ValueBasis { dim } => {
            // Γ = σ² C_1 ⊗ .. ⊗ C_d with per-dimension correlation matrices
            let corr: Vec<Matrix> = kernel
                .lengthscales()
                .iter()
                .map(|&theta| {
                    let k1 = KernelSpec::new(kernel.family(), 1.0, vec![theta])
                        .expect("validated lengthscale");
                    Matrix::from_fn(k, k, |i, j| k1.eval_unchecked(&[t[i]], &[t[j]]))
                })
                .collect();
            let total = k.pow(dim as u32);
            let mut idx_a = vec![0usize; dim];
            let mut idx_b = vec![0usize; dim];
            SymmetricMatrix::from_lower_fn(total, |a, b| {
                unravel(a, k, &mut idx_a);
                unravel(b, k, &mut idx_b);
                let mut v = kernel.variance();
                for m in 0..dim {
                    v *= corr[m][(idx_a[m], idx_b[m])];
                }
                v
            })
        }
        ModelKind::MonotoneDerivBasis1D => {
            let cov = |a: usize, b: usize| -> f64 {
                match (a, b) {
                    (0, 0) => kernel.deriv_1d(0.0, 0.0, 0, 0),
                    (0, j) => kernel.deriv_1d(0.0, t[j - 1], 0, 1),
                    (i, 0) => kernel.deriv_1d(t[i - 1], 0.0, 1, 0),
                    (i, j) => kernel.deriv_1d(t[i - 1], t[j - 1], 1, 1),
                }
            };
            SymmetricMatrix::from_lower_fn(k + 1, cov)
        }
        ModelKind::ConvexSecondDerivBasis1D => {
            // position 0 → Y(0), 1 → Y'(0), 2+j → Y''(t_j)
            let site = |a: usize| -> (f64, u32) {
                match a {
                    0 => (0.0, 0),
                    1 => (0.0, 1),
                    j => (t[j - 2], 2),
                }
            };
            SymmetricMatrix::from_lower_fn(k + 2, |a, b| {
                let (xa, pa) = site(a);
                let (xb, pb) = site(b);
                kernel.deriv_1d(xa, xb, pa, pb)
            })
        }
    };
    Ok(CoefficientPrior { covariance })
}

fn unravel(mut flat: usize, k: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = flat % k;
        flat /= k;
    }
}

/// Conditions `ζ ~ N(0, Γ)` on `Aζ + ε = ỹ`, `ε ~ N(0, σ²I)`.
pub fn condition(
    prior: &CoefficientPrior,
    a: &Matrix,
    y: &[f64],
    noise_sd: f64,
) -> Result<CoefficientPosterior> {
    let gamma = &prior.covariance;
    let dim = gamma.dim();
    if a.cols() != dim {
        return Err(Error::arg("observation matrix width does not match prior"));
    }
    if a.rows() != y.len() {
        return Err(Error::arg("observation count does not match A"));
    }
    if !(noise_sd >= 0.0) {
        return Err(Error::arg("noise standard deviation must be >= 0"));
    }
    let n = y.len();
    if n == 0 {
        return Ok(CoefficientPosterior {
            mean: vec![0.0; dim],
            covariance: gamma.clone(),
            observation: a.clone(),
            jitter: 0.0,
        });
    }
    if noise_sd == 0.0 {
        reject_duplicate_rows(a)?;
    }

    let ag = a.matmul(gamma.as_matrix()); // n × D
    let mut s = a.matmul(&ag.transpose()); // A (AΓ)ᵀ = AΓAᵀ
    let noise_var = noise_sd * noise_sd;
    for i in 0..n {
        s[(i, i)] += noise_var;
    }
    let s = SymmetricMatrix::symmetrize(s);
    let chol = Cholesky::new(&s, JitterPolicy::default())?;

    let alpha = chol.solve(y);
    let mean = ag.t_matvec(&alpha);

    // Γ_cond = Γ - BᵀB with B = L⁻¹ AΓ
    let b = chol.solve_lower_matrix(&ag);
    let mut cov = gamma.as_matrix().clone();
    for k in 0..n {
        let row = b.row(k);
        for i in 0..dim {
            let bi = row[i];
            if bi == 0.0 {
                continue;
            }
            let target = cov.row_mut(i);
            for j in 0..=i {
                target[j] -= bi * row[j];
            }
        }
    }
    for i in 0..dim {
        for j in 0..i {
            cov[(j, i)] = cov[(i, j)];
        }
    }

    Ok(CoefficientPosterior {
        mean,
        covariance: SymmetricMatrix::symmetrize(cov),
        observation: a.clone(),
        jitter: chol.jitter(),
    })
}

fn reject_duplicate_rows(a: &Matrix) -> Result<()> {
    for i in 0..a.rows() {
        for j in 0..i {
            if a.row(i) == a.row(j) {
                return Err(Error::Conditioning(alloc::format!(
                    "noise-free observations {j} and {i} share a design row"
                )));
            }
        }
    }
    Ok(())
}

/// A finite-dimensional approximation: model kind, knot grid, kernel
/// (in unit-domain coordinates) and the coefficient prior it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGp {
    kind: ModelKind,
    grid: KnotGrid,
    kernel: KernelSpec,
    prior: CoefficientPrior,
}

impl FiniteGp {
    pub fn new(kind: ModelKind, grid: KnotGrid, kernel: KernelSpec) -> Result<Self> {
        let prior = build_prior(kind, &grid, &kernel)?;
        Ok(FiniteGp {
            kind,
            grid,
            kernel,
            prior,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn grid(&self) -> &KnotGrid {
        &self.grid
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn prior(&self) -> &CoefficientPrior {
        &self.prior
    }

    pub fn coefficient_count(&self) -> usize {
        self.kind.coefficient_count(&self.grid)
    }

    pub fn design_row(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.grid.design_row(self.kind, x)
    }

    /// `K_N(x, x') = Φ(x)ᵀ Γ Φ(x')`.
    pub fn approx_kernel(&self, x: &[f64], xp: &[f64]) -> Result<f64> {
        let a = self.design_row(x)?;
        let b = self.design_row(xp)?;
        let gb = self.prior.covariance.as_matrix().matvec(&b);
        Ok(dot(&a, &gb))
    }

    /// Rows `Φ(x_i)ᵀ`.
    pub fn observation_matrix(&self, points: &[Vec<f64>]) -> Result<Matrix> {
        let rows = points
            .iter()
            .map(|p| self.design_row(p))
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_rows(&rows, self.coefficient_count())
    }

    pub fn condition(&self, obs: &ObservationSet) -> Result<CoefficientPosterior> {
        if obs.dim() != self.kind.input_dim() {
            return Err(Error::arg("observation dimension does not match model"));
        }
        let a = self.observation_matrix(obs.points())?;
        condition(&self.prior, &a, obs.values(), obs.noise_sd())
    }

    /// `Φ(x)ᵀ coefficients`.
    pub fn evaluate(&self, coefficients: &[f64], x: &[f64]) -> Result<f64> {
        if coefficients.len() != self.coefficient_count() {
            return Err(Error::arg("coefficient vector has the wrong length"));
        }
        Ok(dot(&self.design_row(x)?, coefficients))
    }

    /// `m^N(x) = Φ(x)ᵀ ζ_I`.
    pub fn unconstrained_mean(&self, posterior: &CoefficientPosterior, x: &[f64]) -> Result<f64> {
        self.evaluate(&posterior.mean, x)
    }
}

/// Exact-kernel kriging predictor with zero trend, used as a reference.
#[derive(Debug, Clone)]
pub struct ReferenceKriging {
    kernel: KernelSpec,
    points: Vec<Vec<f64>>,
    chol: Option<Cholesky>,
    alpha: Vec<f64>,
}

impl ReferenceKriging {
    pub fn fit(kernel: &KernelSpec, points: &[Vec<f64>], y: &[f64], noise_sd: f64) -> Result<Self> {
        if points.len() != y.len() {
            return Err(Error::arg("point and value counts differ"));
        }
        if points.iter().any(|p| p.len() != kernel.dim()) {
            return Err(Error::arg("point dimension does not match kernel"));
        }
        let n = y.len();
        if n == 0 {
            return Ok(ReferenceKriging {
                kernel: kernel.clone(),
                points: Vec::new(),
                chol: None,
                alpha: Vec::new(),
            });
        }
        if noise_sd == 0.0 {
            for i in 0..n {
                for j in 0..i {
                    if points[i] == points[j] {
                        return Err(Error::Conditioning(alloc::format!(
                            "noise-free observations {j} and {i} coincide"
                        )));
                    }
                }
            }
        }
        let nv = noise_sd * noise_sd;
        let k = SymmetricMatrix::from_lower_fn(n, |i, j| {
            kernel.eval_unchecked(&points[i], &points[j]) + if i == j { nv } else { 0.0 }
        });
        let chol = Cholesky::new(&k, JitterPolicy::default())?;
        let alpha = chol.solve(y);
        Ok(ReferenceKriging {
            kernel: kernel.clone(),
            points: points.to_vec(),
            chol: Some(chol),
            alpha,
        })
    }

    /// Kriging mean `ζ(x)` and variance `τ²(x)`.
    pub fn predict(&self, x: &[f64]) -> Result<(f64, f64)> {
        if x.len() != self.kernel.dim() {
            return Err(Error::arg("point dimension does not match kernel"));
        }
        let prior_var = self.kernel.eval_unchecked(x, x);
        let Some(chol) = &self.chol else {
            return Ok((0.0, prior_var));
        };
        let mut kx: Vec<f64> = self
            .points
            .iter()
            .map(|p| self.kernel.eval_unchecked(x, p))
            .collect();
        let mean = dot(&kx, &self.alpha);
        chol.solve_lower_in_place(&mut kx);
        Ok((mean, prior_var - dot(&kx, &kx)))
    }
}

pub fn reference_kriging(
    kernel: &KernelSpec,
    points: &[Vec<f64>],
    y: &[f64],
    noise_sd: f64,
    x: &[f64],
) -> Result<(f64, f64)> {
    ReferenceKriging::fit(kernel, points, y, noise_sd)?.predict(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelFamily;

    fn se(theta: f64) -> KernelSpec {
        KernelSpec::new(KernelFamily::SquaredExponential, 1.0, vec![theta]).unwrap()
    }

    #[test]
    fn value_prior_n1() {
        let g = KnotGrid::new(1, 1).unwrap();
        let p = build_prior(ModelKind::ValueBasis { dim: 1 }, &g, &se(1.0)).unwrap();
        let c = &p.covariance;
        assert_eq!(c[(0, 0)], 1.0);
        assert_eq!(c[(1, 1)], 1.0);
        assert!((c[(0, 1)] - libm::exp(-0.5)).abs() < 1e-15);
        assert_eq!(c[(0, 1)], c[(1, 0)]);
    }

    #[test]
    fn monotone_prior_n1() {
        let g = KnotGrid::new(1, 1).unwrap();
        let p = build_prior(ModelKind::MonotoneDerivBasis1D, &g, &se(1.0)).unwrap();
        let c = &p.covariance;
        assert_eq!(c.dim(), 3);
        assert_eq!(c[(0, 0)], 1.0);
        assert!((c[(1, 1)] - 1.0).abs() < 1e-15);
        // Cov(Y(0), Y'(0)) = 0 for a stationary kernel
        assert_eq!(c[(0, 1)], 0.0);
        // Cov(Y(0), Y'(1)) = ∂K/∂x'(0, 1) = (x - x') e^{-(x-x')²/2} = -e^{-1/2}
        assert!((c[(0, 2)] + libm::exp(-0.5)).abs() < 1e-15);
        assert_eq!(c[(0, 2)], c[(2, 0)]);
    }

    #[test]
    fn two_dimensional_prior_is_tensor_product() {
        let g = KnotGrid::new(2, 2).unwrap();
        let k = KernelSpec::new(KernelFamily::SquaredExponential, 2.0, vec![0.3, 0.8]).unwrap();
        let p = build_prior(ModelKind::ValueBasis { dim: 2 }, &g, &k).unwrap();
        let t = g.knots();
        for a in 0..9 {
            for b in 0..9 {
                let xa = [t[a / 3], t[a % 3]];
                let xb = [t[b / 3], t[b % 3]];
                let direct = k.eval(&xa, &xb).unwrap();
                assert!((p.covariance[(a, b)] - direct).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn insufficient_smoothness() {
        let g = KnotGrid::new(1, 3).unwrap();
        let m32 = KernelSpec::new(KernelFamily::Matern32, 1.0, vec![0.5]).unwrap();
        assert!(build_prior(ModelKind::MonotoneDerivBasis1D, &g, &m32).is_ok());
        assert!(matches!(
            build_prior(ModelKind::ConvexSecondDerivBasis1D, &g, &m32),
            Err(Error::UnsupportedDerivative { .. })
        ));
        let ex = KernelSpec::new(KernelFamily::Exponential, 1.0, vec![0.5]).unwrap();
        assert!(build_prior(ModelKind::MonotoneDerivBasis1D, &g, &ex).is_err());
    }

    #[test]
    fn grid_kind_mismatch() {
        let g = KnotGrid::new(2, 3).unwrap();
        assert!(matches!(
            build_prior(ModelKind::MonotoneDerivBasis1D, &g, &se(1.0)),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn no_data_returns_prior() {
        let g = KnotGrid::new(1, 4).unwrap();
        let gp = FiniteGp::new(ModelKind::ValueBasis { dim: 1 }, g, se(0.5)).unwrap();
        let a = Matrix::zeros(0, 5);
        let post = condition(gp.prior(), &a, &[], 0.1).unwrap();
        assert!(post.mean.iter().all(|&v| v == 0.0));
        assert_eq!(post.covariance, gp.prior().covariance);
        assert_eq!(gp.unconstrained_mean(&post, &[0.3]).unwrap(), 0.0);
    }

    #[test]
    fn single_observation_at_knot() {
        let g = KnotGrid::new(1, 4).unwrap();
        let gp = FiniteGp::new(ModelKind::ValueBasis { dim: 1 }, g, se(0.5)).unwrap();
        let obs = ObservationSet::new(vec![vec![0.5]], vec![1.3], 0.1).unwrap();
        let post = gp.condition(&obs).unwrap();
        let gamma = &gp.prior().covariance;
        for i in 0..5 {
            let expected = gamma[(i, 2)] * 1.3 / (gamma[(2, 2)] + 0.01);
            assert!((post.mean[i] - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn huge_noise_ignores_data() {
        let g = KnotGrid::new(1, 6).unwrap();
        let gp = FiniteGp::new(ModelKind::MonotoneDerivBasis1D, g, se(0.4)).unwrap();
        let y = vec![1.0, -2.0, 0.5, 3.0];
        let pts = vec![vec![0.1], vec![0.4], vec![0.6], vec![0.95]];
        let obs = ObservationSet::new(pts, y.clone(), 1e6).unwrap();
        let post = gp.condition(&obs).unwrap();
        let ny = libm::sqrt(dot(&y, &y));
        assert!(libm::sqrt(dot(&post.mean, &post.mean)) <= 1e-3 * ny);
    }

    #[test]
    fn duplicate_noise_free_points_rejected() {
        let g = KnotGrid::new(1, 4).unwrap();
        let gp = FiniteGp::new(ModelKind::ValueBasis { dim: 1 }, g, se(0.5)).unwrap();
        let obs = ObservationSet::new(vec![vec![0.3], vec![0.3]], vec![1.0, 1.0], 0.0).unwrap();
        assert!(matches!(gp.condition(&obs), Err(Error::Conditioning(_))));
        assert!(matches!(
            reference_kriging(&se(0.5), &[vec![0.3], vec![0.3]], &[1.0, 1.0], 0.0, &[0.5]),
            Err(Error::Conditioning(_))
        ));
    }

    #[test]
    fn kriging_interpolates_noise_free() {
        let k = se(0.3);
        let pts = vec![vec![0.1], vec![0.5], vec![0.8]];
        let y = [1.0, -0.5, 2.0];
        for (p, &v) in pts.iter().zip(&y) {
            let (m, var) = reference_kriging(&k, &pts, &y, 0.0, p).unwrap();
            assert!((m - v).abs() < 1e-8);
            assert!(var.abs() < 1e-8);
        }
        let (m, var) = reference_kriging(&k, &[], &[], 0.0, &[0.4]).unwrap();
        assert_eq!((m, var), (0.0, 1.0));
    }

    #[test]
    fn approx_kernel_at_knots_is_prior_entry() {
        let g = KnotGrid::new(1, 5).unwrap();
        let gp = FiniteGp::new(ModelKind::ValueBasis { dim: 1 }, g, se(0.3)).unwrap();
        for j in 0..=5 {
            let t = g.knot(j);
            let v = gp.approx_kernel(&[t], &[t]).unwrap();
            assert!((v - gp.prior().covariance[(j, j)]).abs() < 1e-15);
        }
    }

    #[test]
    fn observation_matrix_at_knots() {
        let g = KnotGrid::new(1, 3).unwrap();
        let gp = FiniteGp::new(ModelKind::ValueBasis { dim: 1 }, g, se(0.3)).unwrap();
        let pts: Vec<Vec<f64>> = [2, 0, 3, 1].iter().map(|&j| vec![g.knot(j)]).collect();
        let a = gp.observation_matrix(&pts).unwrap();
        for (r, &j) in [2usize, 0, 3, 1].iter().enumerate() {
            for c in 0..4 {
                assert_eq!(a[(r, c)], if c == j { 1.0 } else { 0.0 });
            }
        }
        let gp = FiniteGp::new(ModelKind::MonotoneDerivBasis1D, g, se(0.3)).unwrap();
        let a = gp.observation_matrix(&[vec![0.0]]).unwrap();
        assert_eq!(a.row(0), &[1.0, 0.0, 0.0, 0.0, 0.0]);
    }
}
