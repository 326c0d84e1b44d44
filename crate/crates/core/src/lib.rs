//! Sparse optimization over discrete fractional Sobolev spaces.
//!
//! Solves problems of the form
//!
//! ```text
//! min_u  F(u) + (alpha/2) ||u||_V^2 + beta * int |u|^p dx,      0 < p < 1,
//! ```
//!
//! where `V` is a discrete realization of `H^s(Omega)` (spectral or integral
//! fractional Laplacian) and `F` is a smooth data term. The nonsmooth, nonconvex
//! `L^p` term is handled by the smoothing `psi_eps` and a monotone
//! majorize-minimize iteration with a backtracking choice of the proximal
//! constant. Each iteration records the quantities needed to check descent and
//! the limit stationarity system.
//!
//! Layout:
//! - [`grid`]: uniform interior grids, lumped quadrature, `L^p` pseudonorm.
//! - [`smoothing`]: `psi_eps`, `G_eps`, its gradient and the pairing bounds.
//! - [`frac_ops`]: spectral and integral fractional operators, shifted solves.
//! - [`objective`]: the smooth term (tracking, heat-equation source identification).
//! - [`solver`]: the outer iteration and stationarity diagnostics.
//! - [`config`] / [`experiment`]: experiment files, runs, sweeps and CSV output.

// `!(x > 0.0)` style tests are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
mod error;
pub mod experiment;
pub mod frac_ops;
pub mod grid;
pub mod linalg;
pub mod objective;
pub mod smoothing;
pub mod solver;

pub use error::{Error, Result};
pub use frac_ops::{FracOperator, OperatorKind};
pub use grid::{Grid, GridFunction};
pub use objective::{Objective, ObjectiveProblem};
pub use smoothing::PsiParams;
pub use solver::{IterationRecord, RunOutcome, SolverConfig, StationarityReport};
