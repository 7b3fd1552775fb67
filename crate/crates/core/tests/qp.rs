mod support;

use proptest::prelude::*;
use shapegp::constraint::{encode, LinearInequalitySystem};
use shapegp::qp::{solve_map, solve_map_with, solve_qp, QpMethod, QpOptions};
use shapegp::{
    CoefficientPosterior, Direction, FiniteGp, KernelFamily, KernelSpec, KnotGrid, ObservationSet,
    RngStream, ShapeConstraint,
};
use support::{enumerate_qp, to_rows};

/// A posterior from random noisy data and its constraint system.
fn random_posterior(
    constraint: &ShapeConstraint,
    dim: usize,
    n_sub: usize,
    variance: f64,
    rng: &mut RngStream,
) -> (FiniteGp, CoefficientPosterior, LinearInequalitySystem) {
    let kind = constraint.natural_kind(dim);
    let theta: Vec<f64> = (0..dim).map(|_| rng.uniform(0.15, 1.0)).collect();
    let kernel = KernelSpec::new(KernelFamily::SquaredExponential, variance, theta).unwrap();
    let grid = KnotGrid::new(dim, n_sub).unwrap();
    let gp = FiniteGp::new(kind, grid, kernel).unwrap();
    let n = 2 + (rng.next_u64() % 5) as usize;
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.next_f64()).collect())
        .collect();
    // decreasing-ish data so that increasing constraints bind
    let y: Vec<f64> = pts
        .iter()
        .map(|p| -2.0 * p[0] + 0.5 * rng.next_normal())
        .collect();
    let noise = rng.uniform(0.05, 0.5);
    let post = gp
        .condition(&ObservationSet::new(pts, y, noise).unwrap())
        .unwrap();
    let sys = encode(constraint, &grid, kind).unwrap();
    (gp, post, sys)
}

fn small_kinds() -> Vec<(ShapeConstraint, usize, usize)> {
    vec![
        (ShapeConstraint::Monotone1D(Direction::Increasing), 1, 2),
        (ShapeConstraint::Convex1D, 1, 2),
        (ShapeConstraint::bounded(0.0, 0.5).unwrap(), 1, 3),
        (
            ShapeConstraint::Isotonic2D([Some(Direction::Increasing); 2]),
            2,
            1,
        ),
    ]
}

#[test]
fn matches_active_set_enumeration() {
    let mut rng = RngStream::new(41);
    let mut bound = 0;
    for trial in 0..40 {
        for (c, dim, n) in small_kinds() {
            let (_, post, sys) = random_posterior(&c, dim, n, 1.0, &mut rng);
            let cov = to_rows(post.covariance.as_matrix());
            let oracle = enumerate_qp(&post.mean, &cov, &sys);
            for method in [QpMethod::Dual, QpMethod::Primal] {
                let opts = QpOptions {
                    method,
                    ..QpOptions::default()
                };
                let sol = solve_map_with(&post, &sys, &opts).unwrap();
                for (a, b) in sol.mu.iter().zip(&oracle) {
                    assert!(
                        (a - b).abs() < 1e-7,
                        "{} trial {trial} {method:?}: {a} vs {b}",
                        c.name()
                    );
                }
                bound += (!sol.active.is_empty()) as usize;
            }
        }
    }
    assert!(bound > 40, "too few problems with active rows: {bound}");
}

#[test]
fn kkt_residual_on_random_problems() {
    let kinds = [
        (ShapeConstraint::Monotone1D(Direction::Increasing), 1, 20),
        (ShapeConstraint::Convex1D, 1, 15),
        (ShapeConstraint::bounded(-0.5, 0.5).unwrap(), 1, 25),
        (
            ShapeConstraint::Isotonic2D([Some(Direction::Increasing); 2]),
            2,
            5,
        ),
        (ShapeConstraint::Convex2D, 2, 4),
    ];
    let mut rng = RngStream::new(5);
    for trial in 0..100 {
        let (c, dim, n) = &kinds[trial % kinds.len()];
        let (_, post, sys) = random_posterior(c, *dim, *n, 1.0, &mut rng);
        let scale = 1.0 + post.mean.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let sol = solve_map(&post, &sys).unwrap();
        assert!(
            sol.kkt_residual <= 1e-6 * scale,
            "trial {trial}: {}",
            sol.kkt_residual
        );
        assert!(sys.is_member(&sol.mu, 1e-8 * scale).unwrap());
        // multiplier signs: lower rows push up, upper rows push down
        for (r, &v) in sol.multipliers.iter().enumerate() {
            if !sol.active.contains(&r) {
                assert_eq!(v, 0.0);
            } else if sys.upper()[r].is_infinite() {
                assert!(v >= -1e-9 * scale);
            } else if sys.lower()[r].is_infinite() {
                assert!(v <= 1e-9 * scale);
            }
        }
    }
}

#[test]
fn feasible_center_is_the_mode() {
    let grid = KnotGrid::new(1, 10).unwrap();
    let kernel = KernelSpec::new(KernelFamily::SquaredExponential, 1.0, vec![0.3]).unwrap();
    let c = ShapeConstraint::Monotone1D(Direction::Increasing);
    let gp = FiniteGp::new(c.natural_kind(1), grid, kernel).unwrap();
    let pts: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64 / 7.0]).collect();
    let y: Vec<f64> = pts.iter().map(|p| 2.0 * p[0]).collect();
    let post = gp
        .condition(&ObservationSet::new(pts, y, 0.01).unwrap())
        .unwrap();
    let sys = encode(&c, &grid, c.natural_kind(1)).unwrap();
    assert!(sys.is_member(&post.mean, 0.0).unwrap());
    let sol = solve_map(&post, &sys).unwrap();
    assert_eq!(sol.mu, post.mean);
    assert!(sol.active.is_empty());
}

#[test]
fn mode_does_not_depend_on_prior_variance() {
    let c = ShapeConstraint::Monotone1D(Direction::Increasing);
    let grid = KnotGrid::new(1, 12).unwrap();
    let pts = vec![vec![0.1], vec![0.35], vec![0.6], vec![0.9]];
    let y = vec![0.0, 0.9, 1.0, 1.02];
    let sys = encode(&c, &grid, c.natural_kind(1)).unwrap();
    let mode = |variance: f64| {
        let kernel = KernelSpec::new(KernelFamily::Matern52, variance, vec![0.3]).unwrap();
        let gp = FiniteGp::new(c.natural_kind(1), grid, kernel).unwrap();
        let post = gp
            .condition(&ObservationSet::new(pts.clone(), y.clone(), 0.0).unwrap())
            .unwrap();
        let sol = solve_map(&post, &sys).unwrap();
        assert!(!sol.active.is_empty());
        sol.mu
    };
    let base = mode(1.0);
    for v in [0.01, 0.5, 7.0, 250.0] {
        for (a, b) in mode(v).iter().zip(&base) {
            assert!((a - b).abs() < 1e-7, "σ²={v}: {a} vs {b}");
        }
    }
}

#[test]
fn infeasible_system_is_reported() {
    let mut sys = LinearInequalitySystem::empty(2);
    sys.push(&[(0, 1.0), (1, 1.0)], 2.0, f64::INFINITY).unwrap();
    sys.push(&[(0, 1.0)], f64::NEG_INFINITY, 0.5).unwrap();
    sys.push(&[(1, 1.0)], f64::NEG_INFINITY, 0.5).unwrap();
    let cov = shapegp::linalg::SymmetricMatrix::identity(2);
    let err = solve_qp(&[0.0, 0.0], &cov, &sys, &QpOptions::default());
    assert!(matches!(err, Err(shapegp::Error::Infeasible { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn objectives_are_monotone_and_methods_agree(seed in any::<u64>(), which in 0usize..4) {
        let (c, dim, n) = &small_kinds()[which];
        let mut rng = RngStream::new(seed);
        let (_, post, sys) = random_posterior(c, *dim, *n + 3, 1.0, &mut rng);
        let dual = solve_map(&post, &sys).unwrap();
        let primal = solve_map_with(&post, &sys, &QpOptions { method: QpMethod::Primal, ..QpOptions::default() }).unwrap();
        for w in dual.objective_history.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12 * (1.0 + w[0]));
        }
        for w in primal.objective_history.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 * (1.0 + w[0]));
        }
        for (a, b) in dual.mu.iter().zip(&primal.mu) {
            prop_assert!((a - b).abs() < 1e-7);
        }
    }
}
