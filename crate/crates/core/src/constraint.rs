//! Shape constraints as linear inequality systems on the coefficients.
//!
//! With a hat basis the process is piecewise linear between knots (or has a
//! piecewise-linear derivative / second derivative in the derivative-basis
//! models), so each functional constraint reduces to finitely many rows:
//!
//! | constraint | model | rows |
//! |---|---|---|
//! | bounds `a ≤ f ≤ b` | value basis, any `d` | `a ≤ ζ_i ≤ b` |
//! | monotone, 1-D | derivative basis | `ζ_j ≥ 0` (or `≤ 0`), `γ` free |
//! | convex, 1-D | second-derivative basis | `ζ_j ≥ 0`, `γ`, `κ` free |
//! | isotonic, 2-D | value basis | `ζ_{i-1,j} ≤ ζ_{i,j}` and/or `ζ_{i,j-1} ≤ ζ_{i,j}` |
//! | convex, 2-D | value basis | axis-wise second differences `≥ 0` |
//!
//! Convex2D only enforces convexity along each axis. A bilinear interpolant
//! can still bend along diagonals.
//!
//! [`check_function_shape`] evaluates the reconstructed function at probe
//! points and never looks at the rows; tests use it to confirm the
//! encodings.

use alloc::vec;
use alloc::vec::Vec;

use crate::basis::KnotGrid;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm_inf};
use crate::model::ModelKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShapeConstraint {
    Unconstrained,
    /// `lower ≤ f ≤ upper`; infinite bounds are absent rows.
    Bounded {
        lower: f64,
        upper: f64,
    },
    Monotone1D(Direction),
    Convex1D,
    /// Per-input monotonicity; `None` leaves that input free.
    Isotonic2D([Option<Direction>; 2]),
    Convex2D,
}

impl ShapeConstraint {
    pub fn bounded(lower: f64, upper: f64) -> Result<Self> {
        let c = ShapeConstraint::Bounded { lower, upper };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if let ShapeConstraint::Bounded { lower, upper } = *self {
            if lower.is_nan() || upper.is_nan() {
                return Err(Error::config("bounds must not be NaN"));
            }
            if lower == f64::NEG_INFINITY && upper == f64::INFINITY {
                return Err(Error::config("at least one bound must be finite"));
            }
            if lower == f64::INFINITY || upper == f64::NEG_INFINITY {
                return Err(Error::config("bounds point the wrong way"));
            }
            if !(lower < upper) {
                return Err(Error::config("lower bound must be below upper bound"));
            }
        }
        if let ShapeConstraint::Isotonic2D(flags) = self {
            if flags.iter().all(Option::is_none) {
                return Err(Error::config(
                    "isotonic constraint needs at least one input",
                ));
            }
        }
        Ok(())
    }

    /// The model kind whose coefficients make this constraint linear.
    pub fn natural_kind(&self, dim: usize) -> ModelKind {
        match self {
            ShapeConstraint::Monotone1D(_) => ModelKind::MonotoneDerivBasis1D,
            ShapeConstraint::Convex1D => ModelKind::ConvexSecondDerivBasis1D,
            ShapeConstraint::Isotonic2D(_) | ShapeConstraint::Convex2D => {
                ModelKind::ValueBasis { dim: 2 }
            }
            ShapeConstraint::Unconstrained | ShapeConstraint::Bounded { .. } => {
                ModelKind::ValueBasis { dim }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ShapeConstraint::Unconstrained => "unconstrained",
            ShapeConstraint::Bounded { .. } => "bounded",
            ShapeConstraint::Monotone1D(_) => "monotone",
            ShapeConstraint::Convex1D => "convex",
            ShapeConstraint::Isotonic2D(_) => "isotonic2d",
            ShapeConstraint::Convex2D => "convex2d",
        }
    }
}

/// One row of `Λ`: at most three nonzeros.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseRow {
    index: [usize; 3],
    coef: [f64; 3],
    len: u8,
}

impl SparseRow {
    fn single(i: usize) -> Self {
        SparseRow {
            index: [i, 0, 0],
            coef: [1.0, 0.0, 0.0],
            len: 1,
        }
    }

    /// `ζ_hi - ζ_lo`.
    fn difference(hi: usize, lo: usize) -> Self {
        SparseRow {
            index: [hi, lo, 0],
            coef: [1.0, -1.0, 0.0],
            len: 2,
        }
    }

    /// `ζ_a - 2 ζ_mid + ζ_b`.
    fn second_difference(a: usize, mid: usize, b: usize) -> Self {
        SparseRow {
            index: [a, mid, b],
            coef: [1.0, -2.0, 1.0],
            len: 3,
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.len as usize).map(move |k| (self.index[k], self.coef[k]))
    }

    #[inline]
    pub fn dot(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for k in 0..self.len as usize {
            s += self.coef[k] * x[self.index[k]];
        }
        s
    }

    pub fn nnz(&self) -> usize {
        self.len as usize
    }
}

/// `{ζ : l ≤ Λζ ≤ u}` with possibly infinite `l`, `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearInequalitySystem {
    dim: usize,
    rows: Vec<SparseRow>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LinearInequalitySystem {
    pub fn empty(dim: usize) -> Self {
        LinearInequalitySystem {
            dim,
            rows: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
        }
    }

    fn push_row(&mut self, row: SparseRow, lower: f64, upper: f64) {
        self.rows.push(row);
        self.lower.push(lower);
        self.upper.push(upper);
    }

    /// Appends `lower ≤ Σ c ζ_i ≤ upper` for up to three `(i, c)` entries.
    pub fn push(&mut self, entries: &[(usize, f64)], lower: f64, upper: f64) -> Result<()> {
        if entries.is_empty() || entries.len() > 3 {
            return Err(Error::arg("a row needs one to three entries"));
        }
        if entries
            .iter()
            .any(|&(i, c)| i >= self.dim || !c.is_finite())
        {
            return Err(Error::arg("row entry out of range"));
        }
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(Error::arg("row bounds are inconsistent"));
        }
        let mut row = SparseRow {
            index: [0; 3],
            coef: [0.0; 3],
            len: entries.len() as u8,
        };
        for (k, &(i, c)) in entries.iter().enumerate() {
            row.index[k] = i;
            row.coef[k] = c;
        }
        self.push_row(row, lower, upper);
        Ok(())
    }

    /// Appends the rows of `other`.
    pub fn extend(&mut self, other: &LinearInequalitySystem) -> Result<()> {
        if other.dim != self.dim {
            return Err(Error::arg("systems have different dimensions"));
        }
        self.rows.extend_from_slice(&other.rows);
        self.lower.extend_from_slice(&other.lower);
        self.upper.extend_from_slice(&other.upper);
        Ok(())
    }

    /// Coefficient count.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// `Λ` as dense rows.
    pub fn dense_row(&self, r: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, c) in self.rows[r].entries() {
            out[i] += c;
        }
        out
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.dot(x)).collect()
    }

    /// Default tolerance `1e-9 (1 + ‖ζ‖_∞)`.
    pub fn default_tolerance(zeta: &[f64]) -> f64 {
        1e-9 * (1.0 + crate::linalg::norm_inf(zeta))
    }

    /// Index of the first row violated by more than `tol`.
    pub fn first_violation(&self, zeta: &[f64], tol: f64) -> Result<Option<usize>> {
        if zeta.len() != self.dim {
            return Err(Error::arg(alloc::format!(
                "coefficient vector of length {} for a system over {}",
                zeta.len(),
                self.dim
            )));
        }
        Ok(self.first_violation_unchecked(zeta, tol))
    }

    #[inline]
    pub(crate) fn first_violation_unchecked(&self, zeta: &[f64], tol: f64) -> Option<usize> {
        for (r, row) in self.rows.iter().enumerate() {
            let v = row.dot(zeta);
            if v < self.lower[r] - tol || v > self.upper[r] + tol {
                return Some(r);
            }
        }
        None
    }

    pub fn is_member(&self, zeta: &[f64], tol: f64) -> Result<bool> {
        Ok(self.first_violation(zeta, tol)?.is_none())
    }

    /// True when every row bounds a single coefficient.
    pub fn is_box(&self) -> bool {
        self.rows.iter().all(|r| r.len == 1)
    }

    /// Clamps `x` coordinate-wise into a box system. Returns `None` unless
    /// [`is_box`](Self::is_box) holds and the per-coordinate intervals are
    /// nonempty.
    pub fn clamp_box(&self, x: &[f64]) -> Option<Vec<f64>> {
        if !self.is_box() {
            return None;
        }
        let mut lo = vec![f64::NEG_INFINITY; self.dim];
        let mut hi = vec![f64::INFINITY; self.dim];
        for (r, row) in self.rows.iter().enumerate() {
            let (i, c) = (row.index[0], row.coef[0]);
            let (l, u) = if c > 0.0 {
                (self.lower[r] / c, self.upper[r] / c)
            } else {
                (self.upper[r] / c, self.lower[r] / c)
            };
            lo[i] = lo[i].max(l);
            hi[i] = hi[i].min(u);
        }
        let mut out = x.to_vec();
        for i in 0..self.dim {
            if lo[i] > hi[i] {
                return None;
            }
            out[i] = out[i].clamp(lo[i], hi[i]);
        }
        Some(out)
    }

    /// A feasible point close to `x` when one is cheap to find: the box
    /// clamp of `x` for box systems, otherwise the origin if it is feasible.
    pub fn start_point(&self, x: &[f64]) -> Option<Vec<f64>> {
        if let Some(p) = self.clamp_box(x) {
            return Some(p);
        }
        let zero = vec![0.0; self.dim];
        self.first_violation_unchecked(&zero, 0.0)
            .is_none()
            .then_some(zero)
    }
}

/// Builds the inequality system of `constraint` for `kind` on `grid`.
pub fn encode(
    constraint: &ShapeConstraint,
    grid: &KnotGrid,
    kind: ModelKind,
) -> Result<LinearInequalitySystem> {
    constraint.validate()?;
    kind.check_grid(grid)?;
    let dim = kind.coefficient_count(grid);
    let mut sys = LinearInequalitySystem::empty(dim);
    let n = grid.subdivisions();
    let k = grid.knots_per_dim();
    let incompatible = || {
        Error::config(alloc::format!(
            "{} constraint cannot be encoded on the {} model",
            constraint.name(),
            kind.name()
        ))
    };
    match (*constraint, kind) {
        (ShapeConstraint::Unconstrained, _) => {}
        (ShapeConstraint::Bounded { lower, upper }, ModelKind::ValueBasis { .. }) => {
            for i in 0..dim {
                sys.push_row(SparseRow::single(i), lower, upper);
            }
        }
        (ShapeConstraint::Monotone1D(dir), ModelKind::MonotoneDerivBasis1D) => {
            let (lo, hi) = bounds_for(dir);
            for j in 0..k {
                sys.push_row(SparseRow::single(1 + j), lo, hi);
            }
        }
        (ShapeConstraint::Convex1D, ModelKind::ConvexSecondDerivBasis1D) => {
            for j in 0..k {
                sys.push_row(SparseRow::single(2 + j), 0.0, f64::INFINITY);
            }
        }
        (ShapeConstraint::Isotonic2D(flags), ModelKind::ValueBasis { dim: 2 }) => {
            let idx = |i: usize, j: usize| i * k + j;
            if let Some(dir) = flags[0] {
                let (lo, hi) = bounds_for(dir);
                for i in 1..=n {
                    for j in 0..=n {
                        sys.push_row(SparseRow::difference(idx(i, j), idx(i - 1, j)), lo, hi);
                    }
                }
            }
            if let Some(dir) = flags[1] {
                let (lo, hi) = bounds_for(dir);
                for i in 0..=n {
                    for j in 1..=n {
                        sys.push_row(SparseRow::difference(idx(i, j), idx(i, j - 1)), lo, hi);
                    }
                }
            }
        }
        (ShapeConstraint::Convex2D, ModelKind::ValueBasis { dim: 2 }) => {
            let idx = |i: usize, j: usize| i * k + j;
            for i in 1..n {
                for j in 0..=n {
                    sys.push_row(
                        SparseRow::second_difference(idx(i - 1, j), idx(i, j), idx(i + 1, j)),
                        0.0,
                        f64::INFINITY,
                    );
                }
            }
            for i in 0..=n {
                for j in 1..n {
                    sys.push_row(
                        SparseRow::second_difference(idx(i, j - 1), idx(i, j), idx(i, j + 1)),
                        0.0,
                        f64::INFINITY,
                    );
                }
            }
        }
        _ => return Err(incompatible()),
    }
    Ok(sys)
}

fn bounds_for(dir: Direction) -> (f64, f64) {
    match dir {
        Direction::Increasing => (0.0, f64::INFINITY),
        Direction::Decreasing => (f64::NEG_INFINITY, 0.0),
    }
}

/// A point of the encoded polyhedron: the zero vector, or a constant
/// value-basis field when the bounds exclude zero.
pub fn feasible_witness(
    constraint: &ShapeConstraint,
    grid: &KnotGrid,
    kind: ModelKind,
) -> Vec<f64> {
    let dim = kind.coefficient_count(grid);
    match *constraint {
        ShapeConstraint::Bounded { lower, upper } if !(lower <= 0.0 && 0.0 <= upper) => {
            let c = if lower.is_finite() && upper.is_finite() {
                0.5 * (lower + upper)
            } else if lower.is_finite() {
                lower
            } else {
                upper
            };
            vec![c; dim]
        }
        _ => vec![0.0; dim],
    }
}

/// Checks the functional shape property of `Φ(x)ᵀ ζ` at probe points,
/// independently of the encoded rows.
///
/// `probes` is the number of equispaced probes per input (`≥ 2`); a probe
/// count of the form `m N + 1` puts every knot on a probe. Monotonicity is
/// checked on consecutive probe pairs and convexity by midpoint second
/// differences; in 1-D the derivative at each probe is also estimated from
/// each side by difference quotients at steps `δ` and `2δ`, extrapolated so
/// that the estimate is exact on a cell. `tol` is the admitted violation of
/// each checked inequality.
pub fn check_function_shape(
    kind: ModelKind,
    grid: &KnotGrid,
    constraint: &ShapeConstraint,
    zeta: &[f64],
    probes: usize,
    tol: f64,
) -> Result<bool> {
    kind.check_grid(grid)?;
    if zeta.len() != kind.coefficient_count(grid) {
        return Err(Error::arg("coefficient vector has the wrong length"));
    }
    if probes < 2 {
        return Err(Error::arg("need at least two probes per dimension"));
    }
    let f = |x: &[f64]| dot(&grid.design_row_unchecked(kind, x), zeta);
    let pts: Vec<f64> = (0..probes)
        .map(|k| k as f64 / (probes - 1) as f64)
        .collect();
    let need_dim = |d: usize| -> Result<()> {
        if kind.input_dim() != d {
            return Err(Error::config(alloc::format!(
                "{} check needs a {d}-dimensional model",
                constraint.name()
            )));
        }
        Ok(())
    };
    // a step small enough to isolate the derivative at a knot
    let delta = 1e-3 * grid.spacing();
    let eps = f64::EPSILON;
    // round-off of a convex combination of coefficients
    let tol = tol + 16.0 * eps * (1.0 + norm_inf(zeta));

    match *constraint {
        ShapeConstraint::Unconstrained => Ok(true),
        ShapeConstraint::Bounded { lower, upper } => {
            let d = kind.input_dim();
            let mut x = vec![0.0; d];
            let total = probes.pow(d as u32);
            for flat in 0..total {
                let mut r = flat;
                for slot in x.iter_mut().rev() {
                    *slot = pts[r % probes];
                    r /= probes;
                }
                let v = f(&x);
                if v < lower - tol || v > upper + tol {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        ShapeConstraint::Monotone1D(dir) => {
            need_dim(1)?;
            let s = sign(dir);
            let vals: Vec<f64> = pts.iter().map(|&x| f(&[x])).collect();
            let scale = 1.0 + vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let slope_tol = tol + 64.0 * eps * scale / delta;
            for w in vals.windows(2) {
                if s * (w[1] - w[0]) < -tol {
                    return Ok(false);
                }
            }
            for &x in &pts {
                for side in one_sided(x, delta) {
                    let y0 = f(&[x]);
                    let d1 = (f(&[x + side]) - y0) / side;
                    let d2 = (f(&[x + 2.0 * side]) - y0) / (2.0 * side);
                    if s * (2.0 * d1 - d2) < -slope_tol {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
        ShapeConstraint::Convex1D => {
            need_dim(1)?;
            let vals: Vec<f64> = pts.iter().map(|&x| f(&[x])).collect();
            let scale = 1.0 + vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for w in vals.windows(3) {
                if w[0] - 2.0 * w[1] + w[2] < -tol {
                    return Ok(false);
                }
            }
            let curv_tol = tol + 64.0 * eps * scale / (delta * delta);
            for &x in &pts {
                for side in one_sided(x, delta) {
                    let y0 = f(&[x]);
                    let (y1, y2, y4) = (f(&[x + side]), f(&[x + 2.0 * side]), f(&[x + 4.0 * side]));
                    let h2 = side * side;
                    let near = (y0 - 2.0 * y1 + y2) / h2;
                    let far = (y0 - 2.0 * y2 + y4) / (4.0 * h2);
                    if 2.0 * near - far < -curv_tol {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
        ShapeConstraint::Isotonic2D(flags) => {
            need_dim(2)?;
            for (axis, flag) in flags.iter().enumerate() {
                let Some(dir) = flag else { continue };
                let s = sign(*dir);
                for &other in &pts {
                    let line: Vec<f64> = pts.iter().map(|&t| f(&on_axis(axis, t, other))).collect();
                    if line.windows(2).any(|w| s * (w[1] - w[0]) < -tol) {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
        ShapeConstraint::Convex2D => {
            need_dim(2)?;
            for axis in 0..2 {
                for &other in &pts {
                    let line: Vec<f64> = pts.iter().map(|&t| f(&on_axis(axis, t, other))).collect();
                    if line.windows(3).any(|w| w[0] - 2.0 * w[1] + w[2] < -tol) {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
    }
}

/// Signed steps `±delta` whose four-step stencil stays inside `[0, 1]`.
fn one_sided(x: f64, delta: f64) -> impl Iterator<Item = f64> {
    [delta, -delta]
        .into_iter()
        .filter(move |h| (0.0..=1.0).contains(&(x + 4.0 * h)))
}

fn sign(dir: Direction) -> f64 {
    match dir {
        Direction::Increasing => 1.0,
        Direction::Decreasing => -1.0,
    }
}

fn on_axis(axis: usize, t: f64, other: f64) -> [f64; 2] {
    if axis == 0 {
        [t, other]
    } else {
        [other, t]
    }
}
