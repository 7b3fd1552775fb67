//! Stationary covariance functions and their mixed partial derivatives.
//!
//! Multi-dimensional kernels are tensor products of one-dimensional
//! correlations with a shared variance:
//! `K(x, x') = σ² Π_m k(x_m - x'_m; θ_m)`.
//!
//! Derivatives use `∂^p_x ∂^q_x' k(x - x') = (-1)^q k^{(p+q)}(x - x')`, with
//! closed forms for `k^{(m)}` per family. At zero lag the Matérn terms in
//! `|r|` take their one-sided limits, which all the formulas below reach
//! continuously.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

const SQRT3: f64 = 1.732_050_807_568_877_2;
const SQRT5: f64 = 2.236_067_977_499_79;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    SquaredExponential,
    Matern52,
    Matern32,
    Exponential,
}

impl KernelFamily {
    /// Largest derivative order admitted per argument.
    pub fn max_order(self) -> u32 {
        match self {
            KernelFamily::SquaredExponential => u32::MAX,
            KernelFamily::Matern52 => 2,
            KernelFamily::Matern32 => 1,
            KernelFamily::Exponential => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::SquaredExponential => "squared-exponential",
            KernelFamily::Matern52 => "matern52",
            KernelFamily::Matern32 => "matern32",
            KernelFamily::Exponential => "exponential",
        }
    }

    /// Parses the names produced by [`KernelFamily::name`] plus a few
    /// common aliases.
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "squared-exponential" | "se" | "gaussian" | "rbf" => {
                Some(KernelFamily::SquaredExponential)
            }
            "matern52" | "matern-5/2" => Some(KernelFamily::Matern52),
            "matern32" | "matern-3/2" => Some(KernelFamily::Matern32),
            "exponential" | "exp" => Some(KernelFamily::Exponential),
            _ => None,
        }
    }

    /// `d^m/dr^m` of the unit-variance correlation at lag `r`.
    fn correlation_deriv(self, r: f64, theta: f64, m: u32) -> f64 {
        match self {
            KernelFamily::SquaredExponential => {
                let s = r / theta;
                // probabilists' Hermite: d^m/ds^m e^{-s²/2} = (-1)^m He_m(s) e^{-s²/2}
                let (mut he_prev, mut he) = (0.0, 1.0);
                for k in 0..m {
                    let next = s * he - k as f64 * he_prev;
                    he_prev = he;
                    he = next;
                }
                let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * he * libm::exp(-0.5 * s * s) / libm::pow(theta, m as f64)
            }
            KernelFamily::Matern52 => {
                let b = SQRT5 / theta;
                let u = libm::fabs(r);
                let e = libm::exp(-b * u);
                let b2 = b * b;
                match m {
                    0 => (1.0 + b * u + b2 * u * u / 3.0) * e,
                    1 => -(b2 * r / 3.0) * (1.0 + b * u) * e,
                    2 => -(b2 / 3.0) * (1.0 + b * u - b2 * u * u) * e,
                    3 => (b2 * b2 / 3.0) * (3.0 * r - b * r * u) * e,
                    4 => (b2 * b2 / 3.0) * (3.0 - 5.0 * b * u + b2 * u * u) * e,
                    _ => unreachable!("order checked by caller"),
                }
            }
            KernelFamily::Matern32 => {
                let a = SQRT3 / theta;
                let u = libm::fabs(r);
                let e = libm::exp(-a * u);
                match m {
                    0 => (1.0 + a * u) * e,
                    1 => -a * a * r * e,
                    2 => a * a * (a * u - 1.0) * e,
                    _ => unreachable!("order checked by caller"),
                }
            }
            KernelFamily::Exponential => {
                debug_assert_eq!(m, 0);
                libm::exp(-libm::fabs(r) / theta)
            }
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A covariance family with its variance `σ²` and per-dimension
/// lengthscales `θ_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    variance: f64,
    lengthscales: Vec<f64>,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, variance: f64, lengthscales: Vec<f64>) -> Result<Self> {
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(Error::arg("kernel variance must be positive"));
        }
        if lengthscales.is_empty() {
            return Err(Error::arg("kernel needs at least one lengthscale"));
        }
        if lengthscales.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(Error::arg("kernel lengthscales must be positive"));
        }
        Ok(KernelSpec {
            family,
            variance,
            lengthscales,
        })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn lengthscales(&self) -> &[f64] {
        &self.lengthscales
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    pub fn with_variance(&self, variance: f64) -> Result<Self> {
        KernelSpec::new(self.family, variance, self.lengthscales.clone())
    }

    pub fn with_lengthscales(&self, lengthscales: Vec<f64>) -> Result<Self> {
        KernelSpec::new(self.family, self.variance, lengthscales)
    }

    /// The same kernel expressed in coordinates divided by `widths`
    /// (e.g. after mapping `[a, b]` onto `[0, 1]`).
    pub fn rescaled(&self, widths: &[f64]) -> Result<Self> {
        if widths.len() != self.dim() {
            return Err(Error::arg("width count does not match kernel dimension"));
        }
        let ls = self
            .lengthscales
            .iter()
            .zip(widths)
            .map(|(t, w)| t / w)
            .collect();
        KernelSpec::new(self.family, self.variance, ls)
    }

    fn check_points(&self, x: &[f64], xp: &[f64]) -> Result<()> {
        if x.len() != self.dim() || xp.len() != self.dim() {
            return Err(Error::arg(alloc::format!(
                "points of dimension {} and {} for a {}-dimensional kernel",
                x.len(),
                xp.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64], xp: &[f64]) -> Result<f64> {
        self.check_points(x, xp)?;
        Ok(self.eval_unchecked(x, xp))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], xp: &[f64]) -> f64 {
        let mut v = self.variance;
        for m in 0..x.len() {
            v *= self
                .family
                .correlation_deriv(x[m] - xp[m], self.lengthscales[m], 0);
        }
        v
    }

    /// `∂^{|p|+|q|} K / ∂x^p ∂x'^q` with per-dimension orders `p`, `q`.
    pub fn eval_deriv(&self, x: &[f64], xp: &[f64], p: &[u32], q: &[u32]) -> Result<f64> {
        self.check_points(x, xp)?;
        if p.len() != self.dim() || q.len() != self.dim() {
            return Err(Error::arg("derivative order vectors must match dimension"));
        }
        let max = self.family.max_order();
        for &o in p.iter().chain(q) {
            if o > max {
                return Err(Error::UnsupportedDerivative {
                    family: self.family.name(),
                    max,
                    requested: o,
                });
            }
        }
        let mut v = self.variance;
        for m in 0..x.len() {
            v *= self.deriv_factor(x[m] - xp[m], self.lengthscales[m], p[m], q[m]);
        }
        Ok(v)
    }

    /// One-dimensional shortcut for `∂^p_x ∂^q_x' K(x, x')`; the kernel must
    /// be one-dimensional and the orders admissible.
    pub(crate) fn deriv_1d(&self, x: f64, xp: f64, p: u32, q: u32) -> f64 {
        debug_assert_eq!(self.dim(), 1);
        debug_assert!(p <= self.family.max_order() && q <= self.family.max_order());
        self.variance * self.deriv_factor(x - xp, self.lengthscales[0], p, q)
    }

    /// Fails unless orders up to `order` in each argument are available.
    pub fn require_order(&self, order: u32) -> Result<()> {
        let max = self.family.max_order();
        if order > max {
            return Err(Error::UnsupportedDerivative {
                family: self.family.name(),
                max,
                requested: order,
            });
        }
        Ok(())
    }

    fn deriv_factor(&self, r: f64, theta: f64, p: u32, q: u32) -> f64 {
        let sign = if q.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * self.family.correlation_deriv(r, theta, p + q)
    }
}
