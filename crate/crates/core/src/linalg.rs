//! Small dense/tridiagonal kernels: Jacobi-preconditioned CG, a factored
//! tridiagonal solver and Gauss-Legendre rules.

use crate::grid::dot;
use crate::{Error, Result};

/// Outcome of a converged CG solve.
#[derive(Clone, Copy, Debug)]
pub struct CgStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves `A x = b` for symmetric positive definite `A` given as a
/// matrix-vector product, using Jacobi preconditioning with `diag`.
///
/// Stops once `||b - A x||_2 <= tol * ||b||_2`. The true residual is
/// recomputed periodically so the stopping test does not rely on the
/// recursively updated one.
pub fn pcg(
    apply: impl Fn(&[f64], &mut [f64]),
    diag: &[f64],
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, CgStats)> {
    let n = b.len();
    let bnorm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((
            x,
            CgStats {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let inv_diag: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
    let mut d = z.clone();
    let mut ad = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut rel = 1.0;

    for it in 1..=max_iter {
        apply(&d, &mut ad);
        let dad = dot(&d, &ad);
        if !(dad > 0.0) {
            // breakdown: either converged exactly or the operator is not SPD
            break;
        }
        let step = rz / dad;
        for i in 0..n {
            x[i] += step * d[i];
            r[i] -= step * ad[i];
        }
        if it % 50 == 0 {
            apply(&x, &mut ad);
            for i in 0..n {
                r[i] = b[i] - ad[i];
            }
        }
        rel = dot(&r, &r).sqrt() / bnorm;
        if rel <= tol {
            // confirm against the true residual
            apply(&x, &mut ad);
            for i in 0..n {
                r[i] = b[i] - ad[i];
            }
            rel = dot(&r, &r).sqrt() / bnorm;
            if rel <= tol {
                return Ok((
                    x,
                    CgStats {
                        iterations: it,
                        relative_residual: rel,
                    },
                ));
            }
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let gamma = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            d[i] = z[i] + gamma * d[i];
        }
    }
    Err(Error::CgNotConverged {
        iterations: max_iter,
        residual: rel,
    })
}

/// LU factors of a tridiagonal matrix (no pivoting; intended for diagonally
/// dominant systems).
#[derive(Clone, Debug)]
pub struct Tridiagonal {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl Tridiagonal {
    /// `lower[i]` couples row `i+1` to column `i`; `upper[i]` couples row `i`
    /// to column `i+1`.
    pub fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Result<Self> {
        let n = diag.len();
        if lower.len() + 1 != n || upper.len() + 1 != n {
            return Err(Error::DimensionMismatch {
                expected: n.saturating_sub(1),
                got: lower.len().max(upper.len()),
            });
        }
        let mut d = diag.to_vec();
        let mut l = lower.to_vec();
        for i in 1..n {
            if d[i - 1] == 0.0 {
                return Err(Error::Domain("zero pivot in tridiagonal factorization".into()));
            }
            l[i - 1] /= d[i - 1];
            d[i] -= l[i - 1] * upper[i - 1];
        }
        if d[n - 1] == 0.0 {
            return Err(Error::Domain("zero pivot in tridiagonal factorization".into()));
        }
        Ok(Tridiagonal {
            lower: l,
            diag: d,
            upper: upper.to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Solves `T x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.diag.len();
        for i in 1..n {
            x[i] -= self.lower[i - 1] * x[i - 1];
        }
        x[n - 1] /= self.diag[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (x[i] - self.upper[i] * x[i + 1]) / self.diag[i];
        }
    }

    /// Solves `T^T x = b` in place.
    pub fn solve_transpose_in_place(&self, x: &mut [f64]) {
        // T = L U with unit-lower L; T^T = U^T L^T
        let n = self.diag.len();
        x[0] /= self.diag[0];
        for i in 1..n {
            x[i] = (x[i] - self.upper[i - 1] * x[i - 1]) / self.diag[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.lower[i] * x[i + 1];
        }
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let m = order.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..order {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = order as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = 0.5 * (1.0 - z);
        nodes[order - 1 - i] = 0.5 * (1.0 + z);
        weights[i] = 0.5 * w;
        weights[order - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_integrates_polynomials() {
        for order in [1, 2, 5, 8, 13] {
            let (x, w) = gauss_legendre_unit(order);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            let deg = 2 * order - 1;
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((q - 1.0 / (deg + 1) as f64).abs() < 1e-14, "order {order}");
        }
    }

    #[test]
    fn tridiagonal_solves_and_transposes() {
        let lower = [-1.0, -0.5, -2.0];
        let diag = [4.0, 5.0, 6.0, 7.0];
        let upper = [-2.0, -1.0, -0.25];
        let t = Tridiagonal::factor(&lower, &diag, &upper).unwrap();
        let dense = |x: &[f64], transpose: bool| -> Vec<f64> {
            (0..4)
                .map(|i| {
                    let mut s = diag[i] * x[i];
                    let (lo, up) = if transpose { (&upper, &lower) } else { (&lower, &upper) };
                    if i > 0 {
                        s += lo[i - 1] * x[i - 1];
                    }
                    if i < 3 {
                        s += up[i] * x[i + 1];
                    }
                    s
                })
                .collect()
        };
        let b = [1.0, -2.0, 0.5, 3.0];
        let mut x = b;
        t.solve_in_place(&mut x);
        for (a, e) in dense(&x, false).iter().zip(b) {
            assert!((a - e).abs() < 1e-14);
        }
        let mut y = b;
        t.solve_transpose_in_place(&mut y);
        for (a, e) in dense(&y, true).iter().zip(b) {
            assert!((a - e).abs() < 1e-14);
        }
    }

    #[test]
    fn pcg_zero_rhs_and_failure() {
        let apply = |x: &[f64], y: &mut [f64]| {
            y[0] = 2.0 * x[0];
            y[1] = 3.0 * x[1];
        };
        let (x, st) = pcg(apply, &[2.0, 3.0], &[0.0, 0.0], 1e-12, 10).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
        assert_eq!(st.iterations, 0);

        let (x, _) = pcg(apply, &[1.0, 1.0], &[2.0, 3.0], 1e-14, 10).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);

        let err = pcg(apply, &[1.0, 1.0], &[2.0, 3.0], 1e-14, 1).unwrap_err();
        assert!(matches!(err, Error::CgNotConverged { iterations: 1, .. }));
    }
}
