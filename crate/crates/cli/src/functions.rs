//! Synthetic monotone test functions.

use serde::{Deserialize, Serialize};
use shapegp::{Direction, DomainMap, ShapeConstraint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestFunction {
    Flat,
    Step,
    Linear,
    Exponential,
    Logistic,
    Sinusoidal,
    Logistic2,
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
}

use TestFunction::*;

impl TestFunction {
    /// 1-D functions on `(0, 10]`, in table order.
    pub const ONE_D: [TestFunction; 6] = [Flat, Step, Linear, Exponential, Logistic, Sinusoidal];
    pub const TWO_D: [TestFunction; 6] = [F1, F2, F3, F4, F5, F6];
    pub const ALL: [TestFunction; 13] = [
        Flat,
        Step,
        Linear,
        Exponential,
        Logistic,
        Sinusoidal,
        Logistic2,
        F1,
        F2,
        F3,
        F4,
        F5,
        F6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Flat => "flat",
            Step => "step",
            Linear => "linear",
            Exponential => "exponential",
            Logistic => "logistic",
            Sinusoidal => "sinusoidal",
            Logistic2 => "logistic2",
            F1 => "f1",
            F2 => "f2",
            F3 => "f3",
            F4 => "f4",
            F5 => "f5",
            F6 => "f6",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim().to_ascii_lowercase();
        Self::ALL.into_iter().find(|f| f.name() == s)
    }

    /// Stable index used to derive per-function seeds.
    pub fn id(self) -> u64 {
        Self::ALL.iter().position(|&f| f == self).unwrap() as u64
    }

    pub fn dim(self) -> usize {
        match self {
            F1 | F2 | F3 | F4 | F5 | F6 => 2,
            _ => 1,
        }
    }

    pub fn domain(self) -> DomainMap {
        match self {
            Flat | Step | Linear | Exponential | Logistic | Sinusoidal => {
                DomainMap::new(vec![0.0], vec![10.0]).unwrap()
            }
            _ => DomainMap::unit(self.dim()),
        }
    }

    /// Every function here is nondecreasing in each input.
    pub fn constraint(self) -> ShapeConstraint {
        match self.dim() {
            1 => ShapeConstraint::Monotone1D(Direction::Increasing),
            _ => ShapeConstraint::Isotonic2D([Some(Direction::Increasing); 2]),
        }
    }

    /// Reference lengthscales in original coordinates.
    pub fn reference_theta(self) -> Vec<f64> {
        match self {
            Flat => vec![100.0],
            Step => vec![0.8],
            Linear => vec![8.6],
            Exponential => vec![1.0],
            Logistic => vec![2.0],
            Sinusoidal => vec![2.5],
            Logistic2 => vec![0.5],
            F1 => vec![0.17, 0.38],
            F2 => vec![0.46, 1.32],
            F3 => vec![0.18, 0.22],
            F4 => vec![0.38, 0.01],
            F5 => vec![0.08, 0.09],
            F6 => vec![0.02, 0.17],
        }
    }

    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            Flat => 3.0,
            Step => {
                if x[0] <= 8.0 {
                    3.0
                } else {
                    8.0
                }
            }
            Linear => 0.3 * x[0],
            Exponential => 0.15 * (0.6 * x[0] - 3.0).exp(),
            Logistic => 3.0 / (1.0 + (-2.0 * x[0] + 10.0).exp()),
            Sinusoidal => 0.32 * (x[0] + x[0].sin()),
            Logistic2 => 2.0 / (1.0 + (-8.0 * x[0] + 4.0).exp()),
            F1 => x[0].sqrt(),
            F2 => 0.5 * x[0] + 0.5 * x[1],
            F3 => x[0].min(x[1]),
            F4 => 0.25 * x[0] + 0.25 * x[1] + if x[0] + x[1] > 1.0 { 0.5 } else { 0.0 },
            F5 => 0.25 * x[0] + 0.25 * x[1] + if x[0].min(x[1]) > 0.5 { 0.5 } else { 0.0 },
            F6 => {
                let r2 = (x[0] - 1.0).powi(2) + (x[1] - 1.0).powi(2);
                if r2 < 1.0 {
                    (1.0 - r2).sqrt()
                } else {
                    0.0
                }
            }
        }
    }
}

impl std::fmt::Display for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for f in TestFunction::ALL {
            assert_eq!(TestFunction::parse(f.name()), Some(f));
        }
        assert_eq!(TestFunction::parse("SINUSOIDAL"), Some(Sinusoidal));
        assert_eq!(TestFunction::parse("nope"), None);
    }

    #[test]
    fn spot_values() {
        assert_eq!(F6.eval(&[1.0, 1.0]), 1.0);
        assert_eq!(F6.eval(&[0.0, 0.0]), 0.0);
        assert_eq!(Step.eval(&[8.0]), 3.0);
        assert_eq!(Step.eval(&[8.0001]), 8.0);
        assert!((Logistic2.eval(&[0.5]) - 1.0).abs() < 1e-15);
        assert!(
            (Sinusoidal.eval(&[std::f64::consts::PI]) - 0.32 * std::f64::consts::PI).abs() < 1e-12
        );
    }

    #[test]
    fn monotone_on_fine_probes() {
        let m = 10_000;
        for f in TestFunction::ALL {
            let dom = f.domain();
            if f.dim() == 1 {
                let mut prev = f64::NEG_INFINITY;
                for k in 1..=m {
                    let x = dom.from_unit(&[k as f64 / m as f64]);
                    let v = f.eval(&x);
                    assert!(v >= prev, "{f}");
                    prev = v;
                }
            } else {
                let p = 100;
                for i in 0..=p {
                    for j in 1..=p {
                        let (a, b) = (i as f64 / p as f64, j as f64 / p as f64);
                        let c = (j - 1) as f64 / p as f64;
                        assert!(f.eval(&[a, b]) >= f.eval(&[a, c]), "{f}");
                        assert!(f.eval(&[b, a]) >= f.eval(&[c, a]), "{f}");
                    }
                }
            }
        }
    }
}
