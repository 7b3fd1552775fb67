//! Posterior mode of the truncated coefficient distribution.
//!
//! The mode solves
//!
//! ```text
//! minimize ½ (x − ζ_I)ᵀ Γ_cond⁻¹ (x − ζ_I)   subject to   l ≤ Λx ≤ u.
//! ```
//!
//! With `Γ_cond = L Lᵀ` and `x = ζ_I + L z` this becomes the projection of
//! the origin onto a polyhedron, `min ½‖z‖²` subject to `l − Λζ_I ≤ ΛL z ≤
//! u − Λζ_I`, solved exactly by an active-set method without ever forming
//! `Γ_cond⁻¹`. Row slacks in `z` coordinates coincide with the slacks in
//! coefficient space.
//!
//! [`QpMethod::Dual`] (the default) starts at the unconstrained minimum and
//! adds violated rows one at a time; the objective never decreases.
//! [`QpMethod::Primal`] starts from a feasible point and walks down; the
//! objective never increases.
//!
//! Multipliers are reported per row as `ν` with
//! `Γ_cond⁻¹ (μ − ζ_I) = Λᵀ ν`, `ν_r ≥ 0` on rows active at their lower
//! bound, `ν_r ≤ 0` on rows active at their upper bound and `ν_r = 0`
//! elsewhere.

use alloc::vec;
use alloc::vec::Vec;

use crate::basis::KnotGrid;
use crate::constraint::LinearInequalitySystem;
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm2, norm_inf, PivotedCholesky, SymmetricMatrix};
use crate::model::{CoefficientPosterior, ModelKind};

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    /// The mode `μ`.
    pub mu: Vec<f64>,
    /// Rows held at a bound at the solution, ascending.
    pub active: Vec<usize>,
    /// `ν`, one entry per row.
    pub multipliers: Vec<f64>,
    pub iterations: usize,
    /// Largest violation among stationarity, primal feasibility, multiplier
    /// sign and complementarity.
    pub kkt_residual: f64,
    /// Objective value after each iteration, starting point first.
    pub objective_history: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpOptions {
    /// Row tolerance relative to `1 + ‖ζ_I‖_∞`.
    pub feasibility_tol: f64,
    /// Defaults to `50 (rows + dims)`.
    pub max_iterations: Option<usize>,
    /// Relative pivot below which `Γ_cond` is treated as singular in that
    /// direction (noise-free data pin those directions).
    pub pivot_tol: f64,
    pub method: QpMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QpMethod {
    #[default]
    Dual,
    Primal,
}

impl Default for QpOptions {
    fn default() -> Self {
        QpOptions {
            feasibility_tol: 1e-9,
            max_iterations: None,
            pivot_tol: 1e-11,
            method: QpMethod::Dual,
        }
    }
}

pub fn solve_map(
    posterior: &CoefficientPosterior,
    system: &LinearInequalitySystem,
) -> Result<QpSolution> {
    solve_qp(
        &posterior.mean,
        &posterior.covariance,
        system,
        &QpOptions::default(),
    )
}

pub fn solve_map_with(
    posterior: &CoefficientPosterior,
    system: &LinearInequalitySystem,
    options: &QpOptions,
) -> Result<QpSolution> {
    solve_qp(&posterior.mean, &posterior.covariance, system, options)
}

/// `design_row(x)ᵀ μ`.
pub fn map_curve(
    solution: &QpSolution,
    kind: ModelKind,
    grid: &KnotGrid,
    x: &[f64],
) -> Result<f64> {
    if solution.mu.len() != kind.coefficient_count(grid) {
        return Err(Error::arg("solution does not match the model"));
    }
    Ok(dot(&grid.design_row(kind, x)?, &solution.mu))
}

/// One side of a row, written as `c·z ≥ b`.
struct Side {
    row: usize,
    sign: f64,
    c: Vec<f64>,
    b: f64,
    norm: f64,
}

/// Orthonormal basis of the working normals with the triangular factor
/// `C_Wᵀ = Q R`.
struct WorkingSet {
    members: Vec<usize>,
    q: Vec<Vec<f64>>,
    r: Vec<Vec<f64>>,
}

impl WorkingSet {
    fn new() -> Self {
        WorkingSet {
            members: Vec::new(),
            q: Vec::new(),
            r: Vec::new(),
        }
    }

    fn contains(&self, i: usize) -> bool {
        self.members.contains(&i)
    }

    /// Appends `c` unless it is numerically dependent on the current set.
    fn push(&mut self, index: usize, c: &[f64], norm: f64) -> bool {
        let mut v = c.to_vec();
        let mut coef = vec![0.0; self.q.len() + 1];
        for _ in 0..2 {
            for (k, qk) in self.q.iter().enumerate() {
                let h = dot(qk, &v);
                coef[k] += h;
                axpy(-h, qk, &mut v);
            }
        }
        let rn = norm2(&v);
        if !(rn > 1e-10 * norm) {
            return false;
        }
        v.iter_mut().for_each(|x| *x /= rn);
        coef[self.q.len()] = rn;
        self.q.push(v);
        self.r.push(coef);
        self.members.push(index);
        true
    }

    fn rebuild(&mut self, keep: Vec<usize>, sides: &[Side]) {
        *self = WorkingSet::new();
        for i in keep {
            let s = &sides[i];
            self.push(i, &s.c, s.norm);
        }
    }

    /// `z − Q Qᵀ z`.
    fn null_component(&self, z: &[f64]) -> Vec<f64> {
        let mut v = z.to_vec();
        for _ in 0..2 {
            for qk in &self.q {
                let h = dot(qk, &v);
                axpy(-h, qk, &mut v);
            }
        }
        v
    }

    /// Least-squares `λ` with `C_Wᵀ λ ≈ z`.
    fn multipliers(&self, z: &[f64]) -> Vec<f64> {
        let k = self.q.len();
        let mut lam: Vec<f64> = self.q.iter().map(|qk| dot(qk, z)).collect();
        for j in (0..k).rev() {
            lam[j] /= self.r[j][j];
            let lj = lam[j];
            for i in 0..j {
                lam[i] -= self.r[j][i] * lj;
            }
        }
        lam
    }
}

type Outcome = (Vec<f64>, WorkingSet, Vec<f64>, usize, Vec<f64>);

fn feasible_start(center: &[f64], system: &LinearInequalitySystem, tol: f64) -> Result<Vec<f64>> {
    let start = match system.start_point(center) {
        Some(p) => p,
        None => {
            let zero = vec![0.0; center.len()];
            let row = system.first_violation_unchecked(&zero, 0.0).unwrap_or(0);
            return Err(Error::Infeasible { row });
        }
    };
    if let Some(row) = system.first_violation_unchecked(&start, tol) {
        return Err(Error::Infeasible { row });
    }
    Ok(start)
}

fn primal(sides: &[Side], mut z: Vec<f64>, tol: f64, max_iter: usize) -> Result<Outcome> {
    let mut work = WorkingSet::new();
    for (i, s) in sides.iter().enumerate() {
        if dot(&s.c, &z) - s.b <= tol {
            work.push(i, &s.c, s.norm);
        }
    }

    let mut history = vec![0.5 * dot(&z, &z)];
    let mut iterations = 0;
    let lambda = loop {
        if iterations >= max_iter {
            return Err(Error::IterationLimit(max_iter));
        }
        iterations += 1;

        let resid = work.null_component(&z);
        let zn = norm2(&z);
        let pn = norm2(&resid);
        if pn <= 1e-12 * (1.0 + zn) {
            let lam = work.multipliers(&z);
            let scale = 1.0 + norm_inf(&lam);
            let mut drop: Option<usize> = None;
            for (k, &v) in lam.iter().enumerate() {
                if v < -1e-11 * scale {
                    let better = match drop {
                        None => true,
                        Some(d) => v < lam[d] || (v == lam[d] && work.members[k] < work.members[d]),
                    };
                    if better {
                        drop = Some(k);
                    }
                }
            }
            match drop {
                None => {
                    history.push(0.5 * dot(&z, &z));
                    break lam;
                }
                Some(k) => {
                    let mut keep = work.members.clone();
                    keep.remove(k);
                    work.rebuild(keep, sides);
                    history.push(0.5 * dot(&z, &z));
                    continue;
                }
            }
        }

        // step p = −(I − QQᵀ) z toward the minimum on the working face
        let p: Vec<f64> = resid.iter().map(|v| -v).collect();
        let mut alpha = 1.0;
        let mut blocking = None;
        for (i, s) in sides.iter().enumerate() {
            if work.contains(i) {
                continue;
            }
            let cp = dot(&s.c, &p);
            if cp < -1e-12 * s.norm * pn {
                let slack = (dot(&s.c, &z) - s.b).max(0.0);
                let a = slack / -cp;
                if a < alpha {
                    alpha = a;
                    blocking = Some(i);
                }
            }
        }
        axpy(alpha, &p, &mut z);
        history.push(0.5 * dot(&z, &z));
        if let Some(i) = blocking {
            let s = &sides[i];
            work.push(i, &s.c, s.norm);
        }
    };

    Ok((z, work, lambda, iterations, history))
}

/// Goldfarb–Idnani iteration with identity Hessian, started at `z = 0`.
fn dual(sides: &[Side], dim: usize, tol: f64, max_iter: usize) -> Result<Outcome> {
    let mut z = vec![0.0; dim];
    let mut work = WorkingSet::new();
    let mut u: Vec<f64> = Vec::new();
    let mut history = vec![0.0];
    let mut iterations = 0;
    loop {
        let mut pick: Option<(usize, f64)> = None;
        for (i, s) in sides.iter().enumerate() {
            if work.contains(i) {
                continue;
            }
            let slack = dot(&s.c, &z) - s.b;
            if slack < -tol && pick.is_none_or(|(_, v)| slack < v) {
                pick = Some((i, slack));
            }
        }
        let Some((p, _)) = pick else {
            return Ok((z, work, u, iterations, history));
        };
        let np = &sides[p].c;
        let mut up = 0.0;
        loop {
            if iterations >= max_iter {
                return Err(Error::IterationLimit(max_iter));
            }
            iterations += 1;
            let step = work.null_component(np);
            let r = work.multipliers(np);
            let mut partial: Option<(usize, f64)> = None;
            for (k, &rk) in r.iter().enumerate() {
                if rk > 0.0 {
                    let t = u[k] / rk;
                    if partial.is_none_or(|(_, v)| t < v) {
                        partial = Some((k, t));
                    }
                }
            }
            let sn = dot(&step, np);
            let full = if norm2(&step) > 1e-10 * sides[p].norm && sn > 0.0 {
                let slack = dot(np, &z) - sides[p].b;
                Some((-slack / sn).max(0.0))
            } else {
                None
            };
            let t = match (full, partial) {
                (None, None) => return Err(Error::Infeasible { row: sides[p].row }),
                (Some(f), None) => f,
                (None, Some((_, t1))) => t1,
                (Some(f), Some((_, t1))) => f.min(t1),
            };
            axpy(t, &step, &mut z);
            for (uk, rk) in u.iter_mut().zip(&r) {
                *uk = (*uk - t * rk).max(0.0);
            }
            up += t;
            history.push(0.5 * dot(&z, &z));
            if full.is_some_and(|f| f <= t) {
                if work.push(p, np, sides[p].norm) {
                    u.push(up);
                }
                break;
            }
            let (k, _) = partial.expect("partial step");
            let mut keep = work.members.clone();
            keep.remove(k);
            u.remove(k);
            work.rebuild(keep, sides);
        }
    }
}

/// Mode of `N(center, covariance)` restricted to `system`.
pub fn solve_qp(
    center: &[f64],
    covariance: &SymmetricMatrix,
    system: &LinearInequalitySystem,
    options: &QpOptions,
) -> Result<QpSolution> {
    let dim = center.len();
    if covariance.dim() != dim || system.dim() != dim {
        return Err(Error::arg("QP dimensions are inconsistent"));
    }
    let rows = system.len();
    let tol = options.feasibility_tol * (1.0 + norm_inf(center));

    if system.first_violation_unchecked(center, tol).is_none() {
        return Ok(QpSolution {
            mu: center.to_vec(),
            active: Vec::new(),
            multipliers: vec![0.0; rows],
            iterations: 0,
            kkt_residual: 0.0,
            objective_history: vec![0.0],
        });
    }
    let chol = PivotedCholesky::new(covariance, options.pivot_tol)?;
    let rank = chol.rank();

    let mut sides = Vec::new();
    for (r, row) in system.rows().iter().enumerate() {
        // g = Lᵀ Λ_rᵀ
        let mut g = vec![0.0; rank];
        for (i, a) in row.entries() {
            axpy(a, chol.row(i), &mut g);
        }
        let v = row.dot(center);
        let norm = norm2(&g);
        let (lo, hi) = (system.lower()[r], system.upper()[r]);
        if lo.is_finite() {
            sides.push(Side {
                row: r,
                sign: 1.0,
                c: g.clone(),
                b: lo - v,
                norm,
            });
        }
        if hi.is_finite() {
            sides.push(Side {
                row: r,
                sign: -1.0,
                c: g.iter().map(|x| -x).collect(),
                b: v - hi,
                norm,
            });
        }
    }

    let max_iter = options.max_iterations.unwrap_or(50 * (rows + dim));
    let (z, work, lambda, iterations, history) = match options.method {
        QpMethod::Dual => dual(&sides, rank, tol, max_iter)?,
        QpMethod::Primal => {
            if rank < dim {
                return Err(Error::config(
                    "the primal method needs a nonsingular covariance",
                ));
            }
            let start = feasible_start(center, system, tol)?;
            let offset: Vec<f64> = start.iter().zip(center).map(|(s, c)| s - c).collect();
            primal(&sides, chol.solve_range(&offset), tol, max_iter)?
        }
    };

    let mut mu = chol.mul(&z);
    for (m, c) in mu.iter_mut().zip(center) {
        *m += c;
    }

    let mut multipliers = vec![0.0; rows];
    let mut stationarity = z.clone();
    let mut sign_violation = 0.0f64;
    let mut complementarity = 0.0f64;
    for (k, &i) in work.members.iter().enumerate() {
        let s = &sides[i];
        multipliers[s.row] += s.sign * lambda[k];
        axpy(-lambda[k], &s.c, &mut stationarity);
        sign_violation = sign_violation.max(-lambda[k]);
        let slack = dot(&s.c, &z) - s.b;
        complementarity = complementarity.max((lambda[k] * slack).abs());
    }
    let values = system.apply(&mu);
    let mut primal = 0.0f64;
    for r in 0..rows {
        primal = primal
            .max(system.lower()[r] - values[r])
            .max(values[r] - system.upper()[r]);
    }
    let kkt_residual = norm_inf(&stationarity)
        .max(primal)
        .max(sign_violation)
        .max(complementarity);

    let mut active: Vec<usize> = work.members.iter().map(|&i| sides[i].row).collect();
    active.sort_unstable();
    active.dedup();

    Ok(QpSolution {
        mu,
        active,
        multipliers,
        iterations,
        kkt_residual,
        objective_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::{encode, ShapeConstraint};
    use crate::linalg::Matrix;

    fn orthant(dim: usize) -> LinearInequalitySystem {
        let grid = KnotGrid::new(1, dim - 1).unwrap();
        encode(
            &ShapeConstraint::bounded(0.0, f64::INFINITY).unwrap(),
            &grid,
            ModelKind::ValueBasis { dim: 1 },
        )
        .unwrap()
    }

    #[test]
    fn projection_onto_orthant() {
        let sol = solve_qp(
            &[-1.0, 2.0],
            &SymmetricMatrix::identity(2),
            &orthant(2),
            &QpOptions::default(),
        )
        .unwrap();
        assert!((sol.mu[0]).abs() < 1e-14);
        assert!((sol.mu[1] - 2.0).abs() < 1e-14);
        assert_eq!(sol.active, vec![0]);
        // Γ⁻¹(μ − ζ_I) = (1, 0) = Λᵀν
        assert!((sol.multipliers[0] - 1.0).abs() < 1e-14);
        assert_eq!(sol.multipliers[1], 0.0);
        assert!(sol.kkt_residual < 1e-12);
    }

    #[test]
    fn feasible_center_is_returned_unchanged() {
        let c = [0.3, 1.5, 2.0];
        let sol = solve_qp(
            &c,
            &SymmetricMatrix::identity(3),
            &orthant(3),
            &QpOptions::default(),
        )
        .unwrap();
        assert_eq!(sol.mu, c.to_vec());
        assert_eq!(sol.iterations, 0);
    }

    #[test]
    fn correlated_upper_bound() {
        // min ½ xᵀΣ⁻¹x - ... with Σ = [[1, .9],[.9, 1]], center (2, 2), x ≤ 1
        let cov = SymmetricMatrix::new(Matrix::from_vec(2, 2, vec![1.0, 0.9, 0.9, 1.0])).unwrap();
        let grid = KnotGrid::new(1, 1).unwrap();
        let sys = encode(
            &ShapeConstraint::bounded(f64::NEG_INFINITY, 1.0).unwrap(),
            &grid,
            ModelKind::ValueBasis { dim: 1 },
        )
        .unwrap();
        let sol = solve_qp(&[2.0, 2.0], &cov, &sys, &QpOptions::default()).unwrap();
        // symmetric problem: both bounds active
        assert!((sol.mu[0] - 1.0).abs() < 1e-12 && (sol.mu[1] - 1.0).abs() < 1e-12);
        assert!(sol.multipliers.iter().all(|&v| v < 0.0));
        assert!(sol.kkt_residual < 1e-10);
    }

    #[test]
    fn infeasible_box_reports_row() {
        let grid = KnotGrid::new(1, 1).unwrap();
        let mut sys = encode(
            &ShapeConstraint::bounded(0.0, 1.0).unwrap(),
            &grid,
            ModelKind::ValueBasis { dim: 1 },
        )
        .unwrap();
        let other = encode(
            &ShapeConstraint::bounded(2.0, 3.0).unwrap(),
            &grid,
            ModelKind::ValueBasis { dim: 1 },
        )
        .unwrap();
        sys.extend(&other).unwrap();
        let err = solve_qp(
            &[5.0, 5.0],
            &SymmetricMatrix::identity(2),
            &sys,
            &QpOptions::default(),
        );
        assert!(matches!(err, Err(Error::Infeasible { .. })));
    }

    #[test]
    fn dimension_mismatch() {
        let err = solve_qp(
            &[0.0; 3],
            &SymmetricMatrix::identity(2),
            &orthant(3),
            &QpOptions::default(),
        );
        assert!(matches!(err, Err(Error::Argument(_))));
    }

    fn random_problem(seed: u64) -> (Vec<f64>, SymmetricMatrix, LinearInequalitySystem) {
        use crate::sampler::RngStream;
        let mut rng = RngStream::new(seed);
        let grid = KnotGrid::new(1, 7).unwrap();
        let kind = ModelKind::MonotoneDerivBasis1D;
        let d = kind.coefficient_count(&grid);
        let sys = encode(
            &ShapeConstraint::Monotone1D(crate::constraint::Direction::Increasing),
            &grid,
            kind,
        )
        .unwrap();
        let mut f = vec![0.0; d * d];
        rng.fill_normal(&mut f);
        let m = Matrix::from_fn(d, d, |i, j| {
            let v: f64 = (0..d).map(|k| f[i * d + k] * f[j * d + k]).sum();
            v + if i == j { 0.1 } else { 0.0 }
        });
        let mut c = vec![0.0; d];
        rng.fill_normal(&mut c);
        (
            c.iter().map(|x| 3.0 * x).collect(),
            SymmetricMatrix::new(m).unwrap(),
            sys,
        )
    }

    #[test]
    fn methods_agree_and_objectives_are_monotone() {
        for seed in 0..20 {
            let (c, cov, sys) = random_problem(seed);
            let dual = solve_qp(&c, &cov, &sys, &QpOptions::default()).unwrap();
            let primal = solve_qp(
                &c,
                &cov,
                &sys,
                &QpOptions {
                    method: QpMethod::Primal,
                    ..QpOptions::default()
                },
            )
            .unwrap();
            for (a, b) in dual.mu.iter().zip(&primal.mu) {
                assert!((a - b).abs() < 1e-8, "seed {seed}: {a} vs {b}");
            }
            assert!(dual.kkt_residual < 1e-8 && primal.kkt_residual < 1e-8);
            for w in dual.objective_history.windows(2) {
                assert!(w[1] >= w[0] - 1e-12);
            }
            for w in primal.objective_history.windows(2) {
                assert!(w[1] <= w[0] + 1e-12);
            }
        }
    }
}
