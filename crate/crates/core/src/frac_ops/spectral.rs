//! Spectral fractional Laplacian as a matrix function of the discrete
//! Dirichlet Laplacian, diagonalized by the orthonormal sine transform.

use std::f64::consts::PI;

use crate::grid::{Axis, Grid};

/// Orthonormal DST-I matrix for one axis together with the eigenvalues of the
/// 3-point Dirichlet Laplacian on that axis.
#[derive(Clone, Debug)]
pub(crate) struct SineBasis {
    n: usize,
    // row-major n x n; symmetric and involutory
    matrix: Vec<f64>,
    eigenvalues: Vec<f64>,
}

impl SineBasis {
    pub(crate) fn new(axis: &Axis) -> Self {
        let n = axis.n();
        let h = axis.h();
        let scale = (2.0 / (n + 1) as f64).sqrt();
        let mut matrix = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                // reduce the argument mod 2(n+1) so large products stay exact
                let m = ((i + 1) * (k + 1)) % (2 * (n + 1));
                matrix[i * n + k] = scale * (PI * m as f64 / (n + 1) as f64).sin();
            }
        }
        let eigenvalues = (1..=n)
            .map(|k| {
                let sn = (k as f64 * PI / (2 * (n + 1)) as f64).sin();
                4.0 / (h * h) * sn * sn
            })
            .collect();
        SineBasis {
            n,
            matrix,
            eigenvalues,
        }
    }

    pub(crate) fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Entry `S[i][k]`.
    pub(crate) fn entry(&self, i: usize, k: usize) -> f64 {
        self.matrix[i * self.n + k]
    }

    /// `out[offset + stride*i] = sum_k S[i][k] x[offset + stride*k]`.
    fn transform_strided(&self, x: &[f64], out: &mut [f64], offset: usize, stride: usize) {
        let n = self.n;
        for i in 0..n {
            let row = &self.matrix[i * n..(i + 1) * n];
            let mut acc = 0.0;
            for (k, s) in row.iter().enumerate() {
                acc += s * x[offset + stride * k];
            }
            out[offset + stride * i] = acc;
        }
    }
}

/// Spectral realization on a 1-D or tensor 2-D grid.
#[derive(Clone, Debug)]
pub(crate) struct SpectralData {
    bx: SineBasis,
    by: Option<SineBasis>,
    /// `mu^s` for every mode in storage order, `mu` the discrete eigenvalue.
    pub(crate) powered: Vec<f64>,
}

impl SpectralData {
    pub(crate) fn new(grid: &Grid, s: f64) -> Self {
        let bx = SineBasis::new(grid.x_axis());
        let by = grid.y_axis().map(SineBasis::new);
        let powered = match &by {
            None => bx.eigenvalues().iter().map(|l| l.powf(s)).collect(),
            Some(by) => {
                let mut out = Vec::with_capacity(bx.n * by.n);
                for ly in by.eigenvalues() {
                    for lx in bx.eigenvalues() {
                        out.push((lx + ly).powf(s));
                    }
                }
                out
            }
        };
        SpectralData { bx, by, powered }
    }

    /// Orthonormal sine transform (its own inverse).
    pub(crate) fn transform(&self, x: &[f64]) -> Vec<f64> {
        let nx = self.bx.n;
        let mut tmp = vec![0.0; x.len()];
        match &self.by {
            None => {
                self.bx.transform_strided(x, &mut tmp, 0, 1);
                tmp
            }
            Some(by) => {
                for j in 0..by.n {
                    self.bx.transform_strided(x, &mut tmp, j * nx, 1);
                }
                let mut out = vec![0.0; x.len()];
                for i in 0..nx {
                    by.transform_strided(&tmp, &mut out, i, nx);
                }
                out
            }
        }
    }

    /// `S diag(f(mu^s)) S x`.
    pub(crate) fn apply_function(&self, x: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut c = self.transform(x);
        for (ci, m) in c.iter_mut().zip(&self.powered) {
            *ci *= f(*m);
        }
        self.transform(&c)
    }

    /// Diagonal of `S diag(mu^s) S`.
    pub(crate) fn diagonal(&self) -> Vec<f64> {
        let nx = self.bx.n;
        match &self.by {
            None => (0..nx)
                .map(|i| {
                    (0..nx)
                        .map(|k| self.bx.entry(i, k).powi(2) * self.powered[k])
                        .sum()
                })
                .collect(),
            Some(by) => {
                let ny = by.n;
                let mut out = vec![0.0; nx * ny];
                for j in 0..ny {
                    for i in 0..nx {
                        let mut acc = 0.0;
                        for l in 0..ny {
                            let sy = by.entry(j, l).powi(2);
                            for k in 0..nx {
                                acc += self.bx.entry(i, k).powi(2) * sy * self.powered[l * nx + k];
                            }
                        }
                        out[j * nx + i] = acc;
                    }
                }
                out
            }
        }
    }

    /// Discrete eigenvector for 1-D mode `k` (1-based).
    pub(crate) fn mode_1d(&self, k: usize) -> Vec<f64> {
        (0..self.bx.n).map(|i| self.bx.entry(i, k - 1)).collect()
    }
}
