//! Uniform knot grids, hat functions and their primitives.
//!
//! On `[0,1]` with `N` subdivisions the knots are `t_j = j/N` and the hat
//! function of knot `j` is `φ_j(x) = φ((x - t_j) N)` with
//! `φ(u) = (1 - |u|)⁺`. The first and second primitives
//! `I_j(x) = ∫₀ˣ φ_j` and `Φ̄_j(x) = ∫₀ˣ I_j` are evaluated in closed form.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::ModelKind;

/// Points this close outside `[0,1]` are treated as rounding noise and
/// clamped; anything farther is rejected.
const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KnotGrid {
    dim: usize,
    subdivisions: usize,
}

impl KnotGrid {
    pub fn new(dim: usize, subdivisions: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::arg("grid dimension must be at least 1"));
        }
        if subdivisions == 0 {
            return Err(Error::arg("grid needs at least one subdivision"));
        }
        Ok(KnotGrid { dim, subdivisions })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `N`.
    #[inline]
    pub fn subdivisions(&self) -> usize {
        self.subdivisions
    }

    /// `N + 1`.
    #[inline]
    pub fn knots_per_dim(&self) -> usize {
        self.subdivisions + 1
    }

    /// `Δ_N = 1/N`.
    #[inline]
    pub fn spacing(&self) -> f64 {
        1.0 / self.subdivisions as f64
    }

    #[inline]
    pub fn knot(&self, j: usize) -> f64 {
        j as f64 / self.subdivisions as f64
    }

    pub fn knots(&self) -> Vec<f64> {
        (0..=self.subdivisions).map(|j| self.knot(j)).collect()
    }

    /// `(N + 1)^d`, the coefficient count of the value basis.
    pub fn value_coefficient_count(&self) -> usize {
        self.knots_per_dim().pow(self.dim as u32)
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j > self.subdivisions {
            return Err(Error::arg(alloc::format!(
                "knot index {j} out of range 0..={}",
                self.subdivisions
            )));
        }
        Ok(())
    }

    pub fn hat(&self, j: usize, x: f64) -> Result<f64> {
        self.check_index(j)?;
        Ok(self.hat_unchecked(j, clamp_unit(x)?))
    }

    pub fn hat_primitive(&self, j: usize, x: f64) -> Result<f64> {
        self.check_index(j)?;
        Ok(self.hat_primitive_unchecked(j, clamp_unit(x)?))
    }

    pub fn hat_second_primitive(&self, j: usize, x: f64) -> Result<f64> {
        self.check_index(j)?;
        Ok(self.hat_second_primitive_unchecked(j, clamp_unit(x)?))
    }

    #[inline]
    pub(crate) fn hat_unchecked(&self, j: usize, x: f64) -> f64 {
        let u = x * self.subdivisions as f64 - j as f64;
        let v = 1.0 - libm::fabs(u);
        if v > 0.0 {
            v
        } else {
            0.0
        }
    }

    pub(crate) fn hat_primitive_unchecked(&self, j: usize, x: f64) -> f64 {
        let h = self.spacing();
        let u = x * self.subdivisions as f64 - j as f64;
        h * (ramp_integral(u) - ramp_integral(-(j as f64)))
    }

    pub(crate) fn hat_second_primitive_unchecked(&self, j: usize, x: f64) -> f64 {
        let h = self.spacing();
        let u = x * self.subdivisions as f64 - j as f64;
        let u0 = -(j as f64);
        h * h * (ramp_second_integral(u) - ramp_second_integral(u0)) - h * ramp_integral(u0) * x
    }

    /// Indices and weights of the (at most two) hats that are nonzero at
    /// `x`, for a point already in `[0,1]`.
    #[inline]
    pub(crate) fn active_hats(&self, x: f64) -> [(usize, f64); 2] {
        let n = self.subdivisions;
        let s = x * n as f64;
        let mut left = libm::floor(s) as usize;
        if left >= n {
            left = n - 1;
        }
        let w = s - left as f64;
        [(left, 1.0 - w), (left + 1, w)]
    }

    /// Design row `Φ(x)` for `kind`; `x` must already be in `[0,1]^d`.
    pub fn design_row(&self, kind: ModelKind, x: &[f64]) -> Result<Vec<f64>> {
        kind.check_grid(self)?;
        if x.len() != kind.input_dim() {
            return Err(Error::arg(alloc::format!(
                "point of dimension {} for a {}-dimensional model",
                x.len(),
                kind.input_dim()
            )));
        }
        let mut xs = Vec::with_capacity(x.len());
        for &v in x {
            xs.push(clamp_unit(v)?);
        }
        Ok(self.design_row_unchecked(kind, &xs))
    }

    pub(crate) fn design_row_unchecked(&self, kind: ModelKind, x: &[f64]) -> Vec<f64> {
        let k = self.knots_per_dim();
        match kind {
            ModelKind::ValueBasis { dim } => {
                // row-major over (i_1, ..., i_d), i_1 slowest
                let mut row = vec![0.0; k.pow(dim as u32)];
                let per_dim: Vec<[(usize, f64); 2]> =
                    x.iter().map(|&v| self.active_hats(v)).collect();
                for corner in 0..(1usize << dim) {
                    let mut idx = 0;
                    let mut w = 1.0;
                    for (m, hats) in per_dim.iter().enumerate() {
                        let (i, wi) = hats[(corner >> (dim - 1 - m)) & 1];
                        idx = idx * k + i;
                        w *= wi;
                    }
                    row[idx] += w;
                }
                row
            }
            ModelKind::MonotoneDerivBasis1D => {
                let mut row = Vec::with_capacity(k + 1);
                row.push(1.0);
                row.extend((0..k).map(|j| self.hat_primitive_unchecked(j, x[0])));
                row
            }
            ModelKind::ConvexSecondDerivBasis1D => {
                let mut row = Vec::with_capacity(k + 2);
                row.push(1.0);
                row.push(x[0]);
                row.extend((0..k).map(|j| self.hat_second_primitive_unchecked(j, x[0])));
                row
            }
        }
    }
}

/// `∫_{-∞}^{u} φ`: 0, (1+u)²/2, 1-(1-u)²/2, 1 on the four pieces.
#[inline]
fn ramp_integral(u: f64) -> f64 {
    if u <= -1.0 {
        0.0
    } else if u <= 0.0 {
        0.5 * (1.0 + u) * (1.0 + u)
    } else if u <= 1.0 {
        1.0 - 0.5 * (1.0 - u) * (1.0 - u)
    } else {
        1.0
    }
}

/// `∫_{-∞}^{u} ramp_integral`.
#[inline]
fn ramp_second_integral(u: f64) -> f64 {
    if u <= -1.0 {
        0.0
    } else if u <= 0.0 {
        let a = 1.0 + u;
        a * a * a / 6.0
    } else if u <= 1.0 {
        let a = 1.0 - u;
        u + a * a * a / 6.0
    } else {
        u
    }
}

pub(crate) fn clamp_unit(x: f64) -> Result<f64> {
    if !x.is_finite() || !(-DOMAIN_SLACK..=1.0 + DOMAIN_SLACK).contains(&x) {
        return Err(Error::arg(alloc::format!("point {x} lies outside [0, 1]")));
    }
    Ok(x.clamp(0.0, 1.0))
}

/// Per-dimension affine map between `[a_m, b_m]` and `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainMap {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl DomainMap {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::arg(
                "domain bounds must be nonempty and of equal length",
            ));
        }
        for (a, b) in lower.iter().zip(&upper) {
            if !a.is_finite() || !b.is_finite() || !(b > a) {
                return Err(Error::arg(alloc::format!(
                    "invalid domain interval [{a}, {b}]"
                )));
            }
        }
        Ok(DomainMap { lower, upper })
    }

    pub fn unit(dim: usize) -> Self {
        DomainMap {
            lower: vec![0.0; dim],
            upper: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn widths(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| b - a)
            .collect()
    }

    /// Maps into `[0,1]^d`, rejecting points outside the domain.
    pub fn to_unit(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::arg("point dimension does not match domain"));
        }
        let mut out = Vec::with_capacity(x.len());
        for m in 0..x.len() {
            let u = (x[m] - self.lower[m]) / (self.upper[m] - self.lower[m]);
            out.push(clamp_unit(u)?);
        }
        Ok(out)
    }

    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .enumerate()
            .map(|(m, v)| self.lower[m] + v * (self.upper[m] - self.lower[m]))
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.to_unit(x).is_ok()
    }
}
