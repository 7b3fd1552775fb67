#![allow(clippy::type_complexity)]

use shapegp::model::reference_kriging;
mod support;

use shapegp::{FiniteGp, KernelFamily, KernelSpec, KnotGrid, ModelKind, ObservationSet};
use support::{joint_gaussian_oracle, to_rows};

#[test]
fn conditioning_matches_joint_gaussian_oracle() {
    let se = |t: Vec<f64>| KernelSpec::new(KernelFamily::SquaredExponential, 1.5, t).unwrap();
    let cases: Vec<(ModelKind, usize, KernelSpec, Vec<Vec<f64>>, Vec<f64>, f64)> = vec![
        (
            ModelKind::ValueBasis { dim: 1 },
            4,
            se(vec![0.3]),
            vec![vec![0.1], vec![0.55], vec![0.9]],
            vec![0.2, -0.4, 1.1],
            0.1,
        ),
        (
            ModelKind::MonotoneDerivBasis1D,
            3,
            se(vec![0.5]),
            vec![vec![0.2], vec![0.7]],
            vec![0.3, 0.8],
            0.05,
        ),
        (
            ModelKind::ConvexSecondDerivBasis1D,
            4,
            se(vec![0.4]),
            vec![vec![0.0], vec![0.5], vec![1.0]],
            vec![1.0, 0.1, 0.9],
            0.2,
        ),
        (
            ModelKind::ValueBasis { dim: 2 },
            2,
            se(vec![0.4, 0.7]),
            vec![vec![0.3, 0.2], vec![0.8, 0.6]],
            vec![0.5, -0.2],
            0.1,
        ),
        (
            ModelKind::MonotoneDerivBasis1D,
            4,
            KernelSpec::new(KernelFamily::Matern52, 0.7, vec![0.25]).unwrap(),
            vec![vec![0.15], vec![0.35], vec![0.95]],
            vec![-0.3, 0.0, 0.6],
            0.0,
        ),
    ];
    for (kind, n_sub, kernel, points, y, noise) in cases {
        let gp = FiniteGp::new(
            kind,
            KnotGrid::new(kind.input_dim(), n_sub).unwrap(),
            kernel,
        )
        .unwrap();
        let obs = ObservationSet::new(points.clone(), y.clone(), noise).unwrap();
        let post = gp.condition(&obs).unwrap();
        let gamma = to_rows(gp.prior().covariance.as_matrix());
        let a = to_rows(&gp.observation_matrix(&points).unwrap());
        let (mean, cov) = joint_gaussian_oracle(&gamma, &a, &y, noise);
        for (u, v) in post.mean.iter().zip(&mean) {
            assert!((u - v).abs() < 1e-8, "{kind:?}: mean {u} vs {v}");
        }
        for (i, row) in cov.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let u = post.covariance.as_matrix()[(i, j)];
                assert!((u - v).abs() < 1e-8, "{kind:?}: cov[{i},{j}] {u} vs {v}");
            }
        }
    }
}

#[test]
fn noise_free_mean_interpolates() {
    let kernel = KernelSpec::new(KernelFamily::Matern52, 1.0, vec![0.2]).unwrap();
    for kind in [
        ModelKind::ValueBasis { dim: 1 },
        ModelKind::MonotoneDerivBasis1D,
    ] {
        let gp = FiniteGp::new(kind, KnotGrid::new(1, 10).unwrap(), kernel.clone()).unwrap();
        let pts = vec![vec![0.13], vec![0.5], vec![0.81]];
        let y = vec![0.4, 1.0, 1.7];
        let post = gp
            .condition(&ObservationSet::new(pts.clone(), y.clone(), 0.0).unwrap())
            .unwrap();
        for (p, v) in pts.iter().zip(&y) {
            assert!((gp.unconstrained_mean(&post, p).unwrap() - v).abs() < 1e-9);
        }
    }
}

#[test]
fn value_basis_prior_is_exact_at_knots() {
    let kernel = KernelSpec::new(KernelFamily::SquaredExponential, 2.0, vec![0.3, 0.5]).unwrap();
    let grid = KnotGrid::new(2, 3).unwrap();
    let gp = FiniteGp::new(ModelKind::ValueBasis { dim: 2 }, grid, kernel.clone()).unwrap();
    let t = grid.knots();
    for &a in &t {
        for &b in &t {
            let (x, xp) = ([a, b], [b, t[1]]);
            let approx = gp.approx_kernel(&x, &xp).unwrap();
            let exact = kernel.eval(&x, &xp).unwrap();
            assert!((approx - exact).abs() < 1e-13);
        }
    }
}

#[test]
fn approximate_kernel_error_shrinks_with_n() {
    let kernel = KernelSpec::new(KernelFamily::SquaredExponential, 1.0, vec![0.3]).unwrap();
    let xs: Vec<f64> = (0..=50).map(|i| i as f64 / 50.0).collect();
    let mut last = f64::INFINITY;
    for n in [5, 10, 20, 40] {
        let gp = FiniteGp::new(
            ModelKind::ValueBasis { dim: 1 },
            KnotGrid::new(1, n).unwrap(),
            kernel.clone(),
        )
        .unwrap();
        let mut sup = 0.0f64;
        for &x in &xs {
            for &xp in &xs {
                let e = gp.approx_kernel(&[x], &[xp]).unwrap() - kernel.eval(&[x], &[xp]).unwrap();
                sup = sup.max(e.abs());
            }
        }
        assert!(sup <= last, "N={n}: {sup} > {last}");
        last = sup;
    }
    assert!(last < 0.02);
}

#[test]
fn fine_grid_mean_approaches_kriging() {
    let kernel = KernelSpec::new(KernelFamily::SquaredExponential, 1.0, vec![0.25]).unwrap();
    let pts = vec![vec![0.1], vec![0.4], vec![0.45], vec![0.8]];
    let y = vec![0.3, -0.2, 0.1, 0.9];
    let noise = 0.05;
    let gp = FiniteGp::new(
        ModelKind::ValueBasis { dim: 1 },
        KnotGrid::new(1, 400).unwrap(),
        kernel.clone(),
    )
    .unwrap();
    let post = gp
        .condition(&ObservationSet::new(pts.clone(), y.clone(), noise).unwrap())
        .unwrap();
    for i in 0..=20 {
        let x = [i as f64 / 20.0];
        let (k, _) = reference_kriging(&kernel, &pts, &y, noise, &x).unwrap();
        assert!((gp.unconstrained_mean(&post, &x).unwrap() - k).abs() < 1e-3);
    }
}

#[test]
fn derivative_basis_prior_matches_kernel_derivatives() {
    // Γ for the monotone basis is the covariance of (Y(0), Y'(t_0..t_N))
    let kernel = KernelSpec::new(KernelFamily::Matern52, 1.3, vec![0.4]).unwrap();
    let grid = KnotGrid::new(1, 3).unwrap();
    let gp = FiniteGp::new(ModelKind::MonotoneDerivBasis1D, grid, kernel.clone()).unwrap();
    let t = grid.knots();
    let g = gp.prior().covariance.as_matrix();
    assert!((g[(0, 0)] - kernel.eval(&[0.0], &[0.0]).unwrap()).abs() < 1e-14);
    for i in 0..t.len() {
        let c = kernel.eval_deriv(&[0.0], &[t[i]], &[0], &[1]).unwrap();
        assert!((g[(0, i + 1)] - c).abs() < 1e-14);
        for j in 0..t.len() {
            let c = kernel.eval_deriv(&[t[i]], &[t[j]], &[1], &[1]).unwrap();
            assert!((g[(i + 1, j + 1)] - c).abs() < 1e-14);
        }
    }
}
