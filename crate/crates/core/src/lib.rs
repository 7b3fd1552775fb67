//! Finite-dimensional Gaussian process approximation with linear inequality
//! constraints.
//!
//! A process on `[0,1]^d` is replaced by `Y^N(x) = Σ ζ_j φ_j(x)` where the
//! `φ_j` are hat functions on a uniform knot grid (or their first and second
//! primitives in the derivative-basis models). Because the basis is
//! piecewise linear, shape constraints on the whole domain (bounds,
//! monotonicity, convexity) are equivalent to a finite set of linear
//! inequalities on the coefficient vector ζ. Conditioning on noisy data
//! gives a Gaussian coefficient posterior; the constrained posterior is that
//! Gaussian truncated to a polyhedron, whose mode is found by a convex QP
//! and which is sampled exactly by rejection from the mode.
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`linalg`] | dense matrices, Cholesky with jitter, pivoted Cholesky |
//! | [`kernel`] | stationary covariance families and their derivatives |
//! | [`basis`] | knot grids, hat functions and primitives, design rows |
//! | [`constraint`] | shape constraints as coefficient inequality systems |
//! | [`model`] | coefficient prior, conditioning, kriging reference |
//! | [`qp`] | dual and primal active-set solvers for the posterior mode |
//! | [`sampler`] | rejection sampling from the mode, posterior summaries |
//! | [`tuning`] | leave-one-out lengthscale selection |
//!
//! The crate is `no_std` and only needs `alloc`. All transcendental
//! functions go through `libm`, so results are reproducible bit-for-bit
//! across platforms for a fixed seed.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod basis;
pub mod constraint;
mod error;
pub mod kernel;
pub mod linalg;
pub mod model;
pub mod qp;
pub mod sampler;
pub mod tuning;

pub use basis::{DomainMap, KnotGrid};
pub use constraint::{Direction, LinearInequalitySystem, ShapeConstraint};
pub use error::{Error, Result};
pub use kernel::{KernelFamily, KernelSpec};
pub use linalg::{Cholesky, JitterPolicy, Matrix};
pub use model::{CoefficientPosterior, CoefficientPrior, FiniteGp, ModelKind, ObservationSet};
pub use qp::QpSolution;
pub use sampler::{PosteriorSummary, RngStream, SampleBatch, SamplerOptions};
