//! Oracles and generators shared by the integration tests.
#![allow(dead_code)]

use shapegp::constraint::LinearInequalitySystem;
use shapegp::{KnotGrid, Matrix, ModelKind, RngStream, ShapeConstraint};

/// Dense inverse by Gauss–Jordan elimination with partial pivoting.
pub fn inverse(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        a.swap(c, p);
        let d = a[c][c];
        a[c].iter_mut().for_each(|v| *v /= d);
        for r in 0..n {
            if r != c {
                let f = a[r][c];
                let pivot = a[c].clone();
                a[r].iter_mut().zip(&pivot).for_each(|(v, pv)| *v -= f * pv);
            }
        }
    }
    a.into_iter().map(|r| r[n..].to_vec()).collect()
}

pub fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

/// Conditional law of ζ given ỹ from the joint covariance of (ζ, ỹ).
pub fn joint_gaussian_oracle(
    gamma: &[Vec<f64>],
    a: &[Vec<f64>],
    y: &[f64],
    noise: f64,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = gamma.len();
    let n = a.len();
    // cross = Γ Aᵀ  (d × n)
    let cross: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            (0..n)
                .map(|k| (0..d).map(|j| gamma[i][j] * a[k][j]).sum())
                .collect()
        })
        .collect();
    let s: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            (0..n)
                .map(|l| {
                    let v: f64 = (0..d).map(|j| a[k][j] * cross[j][l]).sum();
                    v + if k == l { noise * noise } else { 0.0 }
                })
                .collect()
        })
        .collect();
    let si = inverse(&s);
    let gain: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            (0..n)
                .map(|l| (0..n).map(|k| cross[i][k] * si[k][l]).sum())
                .collect()
        })
        .collect();
    let mean = (0..d)
        .map(|i| (0..n).map(|l| gain[i][l] * y[l]).sum())
        .collect();
    let cov = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| gamma[i][j] - (0..n).map(|l| gain[i][l] * cross[j][l]).sum::<f64>())
                .collect()
        })
        .collect();
    (mean, cov)
}

/// Mean and variance of `N(m, s²)` truncated to `[lo, ∞)`.
pub fn truncated_normal_moments(m: f64, s: f64, lo: f64) -> (f64, f64) {
    let a = (lo - m) / s;
    let pdf = (-0.5 * a * a).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let tail = 0.5 * libm::erfc(a / std::f64::consts::SQRT_2);
    let lambda = pdf / tail;
    (m + s * lambda, s * s * (1.0 + a * lambda - lambda * lambda))
}

/// Exact minimizer of `½ (x − c)ᵀ Q⁻¹ (x − c)` over `system` by trying
/// every subset of rows held at a bound. Only for a handful of rows.
pub fn enumerate_qp(center: &[f64], cov: &[Vec<f64>], system: &LinearInequalitySystem) -> Vec<f64> {
    let d = center.len();
    let qinv = inverse(cov);
    let objective = |x: &[f64]| -> f64 {
        let r: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
        0.5 * (0..d)
            .map(|i| (0..d).map(|j| r[i] * qinv[i][j] * r[j]).sum::<f64>())
            .sum::<f64>()
    };
    // each row is free, at its lower bound or at its upper bound
    let sides: Vec<(usize, f64)> = (0..system.len())
        .flat_map(|r| {
            let mut v = Vec::new();
            if system.lower()[r].is_finite() {
                v.push((r, system.lower()[r]));
            }
            if system.upper()[r].is_finite() {
                v.push((r, system.upper()[r]));
            }
            v
        })
        .collect();
    assert!(sides.len() <= 16, "too many rows to enumerate");
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << sides.len()) {
        let chosen: Vec<&(usize, f64)> = sides
            .iter()
            .enumerate()
            .filter(|(k, _)| mask & (1 << k) != 0)
            .map(|(_, s)| s)
            .collect();
        let k = chosen.len();
        if k > d {
            continue;
        }
        // KKT system [Q⁻¹ Cᵀ; C 0] [x; −λ] = [Q⁻¹c; b]
        let mut m = vec![vec![0.0; d + k]; d + k];
        let mut rhs = vec![0.0; d + k];
        for i in 0..d {
            for j in 0..d {
                m[i][j] = qinv[i][j];
                rhs[i] += qinv[i][j] * center[j];
            }
        }
        for (a, (r, b)) in chosen.iter().enumerate() {
            let row = system.dense_row(*r);
            for j in 0..d {
                m[d + a][j] = row[j];
                m[j][d + a] = row[j];
            }
            rhs[d + a] = *b;
        }
        let Some(sol) = solve(&m, &rhs) else { continue };
        let x = &sol[..d];
        if !system.is_member(x, 1e-9).unwrap() {
            continue;
        }
        let f = objective(x);
        if best.as_ref().is_none_or(|(bf, _)| f < *bf - 1e-14) {
            best = Some((f, x.to_vec()));
        }
    }
    best.expect("feasible system").1
}

fn solve(m: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut row = r.clone();
            row.push(*b);
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-12 {
            return None;
        }
        a.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                let pivot = a[c].clone();
                a[r].iter_mut().zip(&pivot).for_each(|(v, pv)| *v -= f * pv);
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

/// Coefficient vectors for the membership/shape comparison: roughly half
/// are built to satisfy the constraint, the rest are nudged off it.
pub fn candidate(
    constraint: &ShapeConstraint,
    grid: &KnotGrid,
    kind: ModelKind,
    rng: &mut RngStream,
) -> Vec<f64> {
    let k = grid.knots_per_dim();
    let d = kind.coefficient_count(grid);
    let mut z = vec![0.0; d];
    match constraint {
        ShapeConstraint::Bounded { lower, upper } => {
            let lo = if lower.is_finite() {
                *lower
            } else {
                upper - 2.0
            };
            let hi = if upper.is_finite() {
                *upper
            } else {
                lower + 2.0
            };
            let pad = 0.15 * (hi - lo) / d as f64;
            for v in z.iter_mut() {
                *v = rng.uniform(lo - pad, hi + pad);
            }
            return z;
        }
        ShapeConstraint::Monotone1D(_) | ShapeConstraint::Convex1D => {
            let off = kind.knot_offset();
            for v in z.iter_mut() {
                *v = rng.next_normal();
            }
            let sign = match constraint {
                ShapeConstraint::Monotone1D(shapegp::Direction::Decreasing) => -1.0,
                _ => 1.0,
            };
            for v in z[off..].iter_mut() {
                *v = sign * v.abs();
            }
        }
        ShapeConstraint::Isotonic2D(_) => {
            // running maxima along both axes of random values
            for v in z.iter_mut() {
                *v = rng.next_normal();
            }
            for i in 0..k {
                for j in 0..k {
                    let mut v = z[i * k + j];
                    if i > 0 {
                        v = v.max(z[(i - 1) * k + j]);
                    }
                    if j > 0 {
                        v = v.max(z[i * k + j - 1]);
                    }
                    z[i * k + j] = v;
                }
            }
        }
        ShapeConstraint::Convex2D => {
            let (c1, c2, b) = (rng.next_f64(), rng.next_f64(), rng.next_normal());
            let (u, w) = (rng.uniform(0.0, k as f64), rng.uniform(0.0, k as f64));
            for i in 0..k {
                for j in 0..k {
                    let (x, y) = (i as f64, j as f64);
                    z[i * k + j] = c1 * (x - u).powi(2) + c2 * (y - w).powi(2) + b * x * y;
                }
            }
        }
        ShapeConstraint::Unconstrained => {
            rng.fill_normal(&mut z);
            return z;
        }
    }
    if rng.next_f64() < 0.5 {
        // push one constrained coefficient just across its constraint
        let size = [1e-3, 1e-2, 0.3][(rng.next_u64() % 3) as usize];
        match constraint {
            ShapeConstraint::Monotone1D(_) | ShapeConstraint::Convex1D => {
                let off = kind.knot_offset();
                let i = off + (rng.next_u64() % (d - off) as u64) as usize;
                z[i] = if z[i] >= 0.0 { -size } else { size };
            }
            ShapeConstraint::Isotonic2D(_) => {
                let i = 1 + (rng.next_u64() % (k - 1) as u64) as usize;
                let j = (rng.next_u64() % k as u64) as usize;
                z[i * k + j] = z[(i - 1) * k + j] - size;
            }
            _ => {
                let i = 1 + (rng.next_u64() % (k - 2) as u64) as usize;
                let j = (rng.next_u64() % k as u64) as usize;
                z[i * k + j] = 0.5 * (z[(i - 1) * k + j] + z[(i + 1) * k + j]) + size;
            }
        }
    }
    z
}

/// The constraint kinds of the equivalence suite with their natural models.
pub fn equivalence_kinds(dim: usize) -> Vec<ShapeConstraint> {
    use shapegp::Direction::*;
    if dim == 1 {
        vec![
            ShapeConstraint::bounded(0.0, 1.0).unwrap(),
            ShapeConstraint::bounded(0.0, f64::INFINITY).unwrap(),
            ShapeConstraint::Monotone1D(Increasing),
            ShapeConstraint::Monotone1D(Decreasing),
            ShapeConstraint::Convex1D,
        ]
    } else {
        vec![
            ShapeConstraint::bounded(-1.0, 1.0).unwrap(),
            ShapeConstraint::Isotonic2D([Some(Increasing), Some(Increasing)]),
            ShapeConstraint::Isotonic2D([Some(Increasing), None]),
            ShapeConstraint::Convex2D,
        ]
    }
}
