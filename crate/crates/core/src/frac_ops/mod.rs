//! Discrete fractional Sobolev inner products.
//!
//! Every operator is represented by a symmetric positive definite Gram matrix
//! `A` with `u . A u = ||u||_V^2`. Grid functions are paired through the
//! lumped mass `M = w I`, so the Riesz map of `V` with respect to the lumped
//! L² product is `M^{-1} A` ([`FracOperator::apply`]).
//!
//! - Spectral kind: `A = w S diag(mu_k^s) S` with `S` the orthonormal sine
//!   transform and `mu_k` the eigenvalues of the 3-point Dirichlet Laplacian.
//!   No separate L² term is added; `mu_1^s > 0` already bounds it.
//! - Integral kind: `A = K + M`, `K` the P1 Galerkin matrix of the Gagliardo
//!   form on the whole line with zero extension. 1-D only.

mod integral;
mod spectral;

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::grid::{dot, fmt_f64, Grid, GridFunction};
use crate::linalg::{pcg, CgStats};
use crate::{Error, Result};

use spectral::SpectralData;

/// Default cap on the node count for dense integral assembly.
pub const DEFAULT_INTEGRAL_MAX_N: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Spectral,
    Integral,
}

impl std::fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OperatorKind::Spectral => "spectral",
            OperatorKind::Integral => "integral",
        })
    }
}

/// Tolerances for the shifted solves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOptions {
    /// Relative residual target `||b - A x|| <= tol ||b||`.
    pub tol: f64,
    /// Iteration cap; `None` means `10 n`.
    pub max_iter: Option<usize>,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions {
            tol: 1e-10,
            max_iter: None,
        }
    }
}

#[derive(Clone, Debug)]
enum Repr {
    Spectral(SpectralData),
    Integral { gram: DMatrix<f64> },
}

/// A discrete realization of the `V` inner product.
#[derive(Clone, Debug)]
pub struct FracOperator {
    grid: Grid,
    s: f64,
    repr: Repr,
    diag: Vec<f64>,
}

fn check_order(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("fractional order s must lie in (0,1), got {s}")))
    }
}

/// `(-Delta_h)^s` through the discrete sine basis.
pub fn spectral_operator(grid: &Grid, s: f64) -> Result<FracOperator> {
    check_order(s)?;
    Ok(FracOperator::spectral_any_order(grid, s))
}

/// Gagliardo stiffness plus lumped mass, with the default size cap.
pub fn integral_stiffness(grid: &Grid, s: f64) -> Result<FracOperator> {
    integral_stiffness_capped(grid, s, DEFAULT_INTEGRAL_MAX_N)
}

pub fn integral_stiffness_capped(grid: &Grid, s: f64, max_n: usize) -> Result<FracOperator> {
    check_order(s)?;
    if grid.dim() != 1 {
        return Err(Error::InvalidArgument(
            "the integral operator is only available on 1-D grids".into(),
        ));
    }
    if grid.n() > max_n {
        return Err(Error::InvalidArgument(format!(
            "integral assembly is dense; n = {} exceeds the cap {max_n}",
            grid.n()
        )));
    }
    let mut gram = integral::assemble_gagliardo(grid, s);
    let w = grid.weight();
    for i in 0..grid.n() {
        gram[(i, i)] += w;
    }
    let diag = (0..grid.n()).map(|i| gram[(i, i)]).collect();
    Ok(FracOperator {
        grid: grid.clone(),
        s,
        repr: Repr::Integral { gram },
        diag,
    })
}

/// The Gagliardo seminorm matrix alone (no L² term).
pub fn gagliardo_matrix(grid: &Grid, s: f64) -> Result<DMatrix<f64>> {
    check_order(s)?;
    if grid.dim() != 1 {
        return Err(Error::InvalidArgument(
            "the integral operator is only available on 1-D grids".into(),
        ));
    }
    Ok(integral::assemble_gagliardo(grid, s))
}

impl FracOperator {
    /// Builds a spectral operator for any positive order; `s = 1` reproduces
    /// the 3-point Laplacian.
    pub(crate) fn spectral_any_order(grid: &Grid, s: f64) -> Self {
        let data = SpectralData::new(grid, s);
        let w = grid.weight();
        let diag = data.diagonal().into_iter().map(|d| w * d).collect();
        FracOperator {
            grid: grid.clone(),
            s,
            repr: Repr::Spectral(data),
            diag,
        }
    }

    pub fn kind(&self) -> OperatorKind {
        match self.repr {
            Repr::Spectral(_) => OperatorKind::Spectral,
            Repr::Integral { .. } => OperatorKind::Integral,
        }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Diagonal of the Gram matrix.
    pub fn gram_diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// `out = A x`.
    pub fn gram_apply(&self, x: &[f64], out: &mut [f64]) {
        match &self.repr {
            Repr::Spectral(data) => {
                let w = self.grid.weight();
                let y = data.apply_function(x, |m| w * m);
                out.copy_from_slice(&y);
            }
            Repr::Integral { gram } => {
                let n = x.len();
                for i in 0..n {
                    let row = gram.row(i);
                    let mut acc = 0.0;
                    for j in 0..n {
                        acc += row[j] * x[j];
                    }
                    out[i] = acc;
                }
            }
        }
    }

    pub(crate) fn gram_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.gram_apply(x, &mut out);
        out
    }

    /// The V-Riesz image `M^{-1} A u`, so that
    /// `<apply(u), v>_{L2} = <u, v>_V`.
    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        self.grid.check(u.len())?;
        let w = self.grid.weight();
        let y = self.gram_vec(u.as_slice());
        Ok(GridFunction::from_vec_unchecked(
            y.into_iter().map(|v| v / w).collect(),
        ))
    }

    /// `<u, v>_V = v . A u`.
    pub fn inner(&self, u: &GridFunction, v: &GridFunction) -> Result<f64> {
        self.grid.check(u.len())?;
        self.grid.check(v.len())?;
        Ok(self.inner_slice(u.as_slice(), v.as_slice()))
    }

    pub(crate) fn inner_slice(&self, u: &[f64], v: &[f64]) -> f64 {
        match &self.repr {
            Repr::Spectral(data) => {
                let cu = data.transform(u);
                let cv = if std::ptr::eq(u, v) { cu.clone() } else { data.transform(v) };
                self.grid.weight()
                    * cu.iter()
                        .zip(&cv)
                        .zip(&data.powered)
                        .map(|((a, b), m)| a * b * m)
                        .sum::<f64>()
            }
            Repr::Integral { .. } => dot(v, &self.gram_vec(u)),
        }
    }

    pub(crate) fn norm_sq_slice(&self, u: &[f64]) -> f64 {
        self.inner_slice(u, u)
    }

    /// Solves `(c A + M diag(w)) u = rhs`.
    pub fn solve_shifted(
        &self,
        c: f64,
        w: &[f64],
        rhs: &GridFunction,
        opts: CgOptions,
    ) -> Result<GridFunction> {
        self.solve_shifted_slice(c, w, rhs.as_slice(), opts)
            .map(|(u, _)| GridFunction::from_vec_unchecked(u))
    }

    pub(crate) fn solve_shifted_slice(
        &self,
        c: f64,
        w: &[f64],
        rhs: &[f64],
        opts: CgOptions,
    ) -> Result<(Vec<f64>, CgStats)> {
        self.grid.check(rhs.len())?;
        self.grid.check(w.len())?;
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!("shift c must be positive, got {c}")));
        }
        if let Some(bad) = w.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "weights must be finite and nonnegative, found {bad}"
            )));
        }
        let mass = self.grid.weight();
        if let Repr::Spectral(data) = &self.repr {
            if w.iter().all(|v| *v == 0.0) {
                let u = data.apply_function(rhs, |m| 1.0 / (c * mass * m));
                return Ok((
                    u,
                    CgStats {
                        iterations: 0,
                        relative_residual: 0.0,
                    },
                ));
            }
        }
        let diag: Vec<f64> = self
            .diag
            .iter()
            .zip(w)
            .map(|(d, wi)| c * d + mass * wi)
            .collect();
        let max_iter = opts.max_iter.unwrap_or(10 * rhs.len());
        pcg(
            |x, out| {
                self.gram_apply(x, out);
                for i in 0..x.len() {
                    out[i] = c * out[i] + mass * w[i] * x[i];
                }
            },
            &diag,
            rhs,
            opts.tol,
            max_iter,
        )
    }

    /// `A^{-1} r`.
    pub(crate) fn solve_gram(&self, r: &[f64], opts: CgOptions) -> Result<Vec<f64>> {
        let zeros = vec![0.0; r.len()];
        self.solve_shifted_slice(1.0, &zeros, r, opts).map(|(u, _)| u)
    }

    /// Dual norm `sqrt(r . A^{-1} r)` of a functional given by its
    /// coefficient vector.
    pub fn dual_norm(&self, r: &[f64], opts: CgOptions) -> Result<f64> {
        let z = self.solve_gram(r, opts)?;
        Ok(dot(r, &z).max(0.0).sqrt())
    }

    /// Largest `mu` with `<u,u>_V >= mu ||u||^2_{L2}` for all `u`.
    ///
    /// Exact for the spectral kind; for the integral kind this is the
    /// smallest eigenvalue of `M^{-1} A` from a dense eigen-solve.
    pub fn coercivity_constant(&self) -> f64 {
        match &self.repr {
            Repr::Spectral(data) => data.powered.iter().copied().fold(f64::INFINITY, f64::min),
            Repr::Integral { gram } => {
                let eig = gram.clone().symmetric_eigenvalues();
                eig.min() / self.grid.weight()
            }
        }
    }

    /// Discrete 1-D sine eigenvector `k` (1-based) and its eigenvalue
    /// `mu_k^s` under [`apply`](Self::apply). Spectral kind only.
    pub fn spectral_mode(&self, k: usize) -> Option<(GridFunction, f64)> {
        match &self.repr {
            Repr::Spectral(data) if self.grid.dim() == 1 && (1..=self.grid.n()).contains(&k) => {
                Some((
                    GridFunction::from_vec_unchecked(data.mode_1d(k)),
                    data.powered[k - 1],
                ))
            }
            _ => None,
        }
    }

    /// The Gram matrix `A` as a dense matrix.
    pub fn dense_matrix(&self) -> DMatrix<f64> {
        match &self.repr {
            Repr::Integral { gram } => gram.clone(),
            Repr::Spectral(_) => {
                let n = self.grid.len();
                let mut m = DMatrix::zeros(n, n);
                let mut e = vec![0.0; n];
                let mut col = vec![0.0; n];
                for j in 0..n {
                    e[j] = 1.0;
                    self.gram_apply(&e, &mut col);
                    e[j] = 0.0;
                    for i in 0..n {
                        m[(i, j)] = col[i];
                    }
                }
                // symmetrize away transform round-off
                let mt = m.transpose();
                (m + mt) * 0.5
            }
        }
    }

    /// Writes the Gram matrix as plain CSV rows (debug aid, `n <= 64`).
    pub fn write_matrix_csv(&self, path: &Path) -> Result<()> {
        let n = self.grid.len();
        if n > 64 {
            return Err(Error::InvalidArgument(format!(
                "matrix dump is limited to 64 unknowns, operator has {n}"
            )));
        }
        let m = self.dense_matrix();
        let mut buf = Vec::new();
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| fmt_f64(m[(i, j)])).collect();
            writeln!(buf, "{}", row.join(",")).map_err(|e| Error::io(path, e))?;
        }
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}
