use proptest::prelude::*;
use shapegp::linalg::{Cholesky, JitterPolicy, SymmetricMatrix};
use shapegp::{Error, KernelFamily, KernelSpec};

const FAMILIES: [KernelFamily; 4] = [
    KernelFamily::SquaredExponential,
    KernelFamily::Matern52,
    KernelFamily::Matern32,
    KernelFamily::Exponential,
];

/// Central difference of the order-(p, q) derivative, built up from the
/// plain kernel one order at a time.
fn fd(k: &KernelSpec, x: f64, xp: f64, p: u32, q: u32) -> f64 {
    let h = 1e-3;
    if p > 0 {
        (fd(k, x + h, xp, p - 1, q) - fd(k, x - h, xp, p - 1, q)) / (2.0 * h)
    } else if q > 0 {
        (fd(k, x, xp + h, p, q - 1) - fd(k, x, xp - h, p, q - 1)) / (2.0 * h)
    } else {
        k.eval(&[x], &[xp]).unwrap()
    }
}

#[test]
fn derivatives_match_finite_differences_away_from_the_diagonal() {
    for family in FAMILIES {
        let k = KernelSpec::new(family, 1.7, vec![0.6]).unwrap();
        let max = family.max_order().min(2);
        for &(x, xp) in &[(0.1, 0.7), (0.9, 0.2), (0.45, 0.3)] {
            for p in 0..=max {
                for q in 0..=max {
                    let exact = k.eval_deriv(&[x], &[xp], &[p], &[q]).unwrap();
                    let approx = fd(&k, x, xp, p, q);
                    let scale = 1.0 + exact.abs();
                    assert!(
                        (exact - approx).abs() < 1e-3 * scale,
                        "{family} p={p} q={q} at ({x},{xp}): {exact} vs {approx}"
                    );
                }
            }
        }
    }
}

#[test]
fn orders_beyond_smoothness_are_rejected() {
    let k = KernelSpec::new(KernelFamily::Matern32, 1.0, vec![0.3]).unwrap();
    assert!(matches!(
        k.eval_deriv(&[0.1], &[0.2], &[2], &[0]),
        Err(Error::UnsupportedDerivative {
            max: 1,
            requested: 2,
            ..
        })
    ));
    let e = KernelSpec::new(KernelFamily::Exponential, 1.0, vec![0.3]).unwrap();
    assert!(e.require_order(1).is_err());
    assert!(e.require_order(0).is_ok());
}

#[test]
fn product_kernel_factorizes() {
    let k = KernelSpec::new(KernelFamily::SquaredExponential, 2.0, vec![0.3, 0.8]).unwrap();
    let k1 = KernelSpec::new(KernelFamily::SquaredExponential, 1.0, vec![0.3]).unwrap();
    let k2 = KernelSpec::new(KernelFamily::SquaredExponential, 1.0, vec![0.8]).unwrap();
    let (x, y) = ([0.2, 0.9], [0.6, 0.1]);
    let joint = k.eval(&x, &y).unwrap();
    let prod = 2.0 * k1.eval(&x[..1], &y[..1]).unwrap() * k2.eval(&x[1..], &y[1..]).unwrap();
    assert!((joint - prod).abs() < 1e-15);
}

#[test]
fn rescaling_matches_original_coordinates() {
    let k = KernelSpec::new(KernelFamily::Matern52, 1.0, vec![2.5]).unwrap();
    let ku = k.rescaled(&[10.0]).unwrap();
    let a = k.eval(&[3.0], &[7.5]).unwrap();
    let b = ku.eval(&[0.3], &[0.75]).unwrap();
    assert!((a - b).abs() < 1e-14);
}

fn min_pivot_ok(m: SymmetricMatrix) -> bool {
    let shift = 1e-12 * m.trace();
    let n = m.dim();
    let shifted = SymmetricMatrix::from_lower_fn(n, |i, j| {
        m.as_matrix()[(i, j)] + if i == j { shift } else { 0.0 }
    });
    Cholesky::new(&shifted, JitterPolicy::NONE).is_ok()
}

proptest! {
    #[test]
    fn kernels_are_symmetric(fi in 0usize..4, x in 0.0f64..1.0, y in 0.0f64..1.0, t in 0.05f64..3.0) {
        let k = KernelSpec::new(FAMILIES[fi], 1.3, vec![t]).unwrap();
        let a = k.eval(&[x], &[y]).unwrap();
        let b = k.eval(&[y], &[x]).unwrap();
        prop_assert!((a - b).abs() <= 1e-15 * a.abs().max(1.0));
        prop_assert!(a <= 1.3 + 1e-15);
    }

    #[test]
    fn gram_matrices_are_psd(
        fi in 0usize..4,
        pts in proptest::collection::vec(0.0f64..1.0, 2..12),
        t in 0.05f64..2.0,
    ) {
        let k = KernelSpec::new(FAMILIES[fi], 1.0, vec![t]).unwrap();
        let n = pts.len();
        let g = SymmetricMatrix::from_lower_fn(n, |i, j| k.eval(&[pts[i]], &[pts[j]]).unwrap());
        prop_assert!(min_pivot_ok(g));
    }

    #[test]
    fn value_and_derivative_gram_is_psd(
        pts in proptest::collection::vec(0.0f64..1.0, 2..8),
        t in 0.1f64..2.0,
        se in any::<bool>(),
    ) {
        let family = if se { KernelFamily::SquaredExponential } else { KernelFamily::Matern52 };
        let k = KernelSpec::new(family, 1.0, vec![t]).unwrap();
        let n = pts.len();
        // first n entries are values, last n are first derivatives
        let g = SymmetricMatrix::from_lower_fn(2 * n, |a, b| {
            let (ia, pa) = (a % n, (a / n) as u32);
            let (ib, pb) = (b % n, (b / n) as u32);
            k.eval_deriv(&[pts[ia]], &[pts[ib]], &[pa], &[pb]).unwrap()
        });
        prop_assert!(min_pivot_ok(g));
    }
}
