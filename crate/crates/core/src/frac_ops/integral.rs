//! P1 Galerkin assembly of the whole-line Gagliardo form
//!
//! ```text
//! <u, v> = int_R int_R (u(x) - u(y)) (v(x) - v(y)) / |x - y|^{1+2s} dy dx
//! ```
//!
//! for hat functions on a uniform mesh of `(0, L)`, extended by zero.
//!
//! The double integral splits into `Omega x Omega` and twice
//! `Omega x (R \ Omega)`. The first part is a sum over element pairs; on a
//! uniform mesh the local 4x4 contribution depends only on the element
//! offset, so it is computed once per offset. Coincident and touching elements
//! are integrated in closed form; separated elements use tensor Gauss rules.
//! The exterior part reduces to the weighted mass matrix
//! `2 int phi_i phi_j w(x) dx` with `w(x) = (x^{-2s} + (L-x)^{-2s}) / (2s)`,
//! which is tridiagonal.

use nalgebra::DMatrix;

use crate::grid::Grid;
use crate::linalg::gauss_legendre_unit;

const GAUSS_ORDER: usize = 16;

/// `int_1^2 w^a dw`, stable as `a -> -1`.
fn power_integral(a: f64) -> f64 {
    let b = a + 1.0;
    if b == 0.0 {
        std::f64::consts::LN_2
    } else {
        (b * std::f64::consts::LN_2).exp_m1() / b
    }
}

/// `J_n = int_0^1 v^n (1+v)^{-1-2s} dv` for `n = 0, 1, 2`.
fn touching_moments(s: f64) -> [f64; 3] {
    let e = -1.0 - 2.0 * s;
    let p0 = power_integral(e);
    let p1 = power_integral(e + 1.0);
    let p2 = power_integral(e + 2.0);
    // (w-1)^n expanded in powers of w
    [p0, p1 - p0, p2 - 2.0 * p1 + p0]
}

/// Local matrix (on the unit reference, without the `h^{1-2s}` factor) of an
/// element pair at offset `m >= 2`, local node order `[a, a+1, b, b+1]`.
fn separated_pair(s: f64, m: usize, nodes: &[f64], weights: &[f64]) -> [[f64; 4]; 4] {
    let mut e = [[0.0; 4]; 4];
    let expo = -1.0 - 2.0 * s;
    for (xi, wx) in nodes.iter().zip(weights) {
        for (eta, wy) in nodes.iter().zip(weights) {
            let r = m as f64 + eta - xi;
            let k = 2.0 * wx * wy * r.powf(expo);
            let d = [1.0 - xi, *xi, -(1.0 - eta), -eta];
            for q in 0..4 {
                for t in 0..4 {
                    e[q][t] += k * d[q] * d[t];
                }
            }
        }
    }
    e
}

/// Gagliardo stiffness matrix over `Omega x Omega` plus the exterior
/// correction. Does not include any L² term.
pub(crate) fn assemble_gagliardo(grid: &Grid, s: f64) -> DMatrix<f64> {
    let n = grid.n();
    let h = grid.h();
    let len = grid.length();
    let scale = h.powf(1.0 - 2.0 * s);
    let mut k = DMatrix::<f64>::zeros(n, n);

    // global node g in 0..=n+1; unknown index g-1 for interior nodes
    let unknown = |g: usize| -> Option<usize> { (1..=n).contains(&g).then(|| g - 1) };
    let add = |k: &mut DMatrix<f64>, ga: usize, gb: usize, v: f64| {
        if let (Some(i), Some(j)) = (unknown(ga), unknown(gb)) {
            k[(i, j)] += v;
        }
    };

    // coincident elements: d = +-(x - y)/h
    let c_self = scale * 2.0 / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s));
    for e in 0..=n {
        add(&mut k, e, e, c_self);
        add(&mut k, e + 1, e + 1, c_self);
        add(&mut k, e, e + 1, -c_self);
        add(&mut k, e + 1, e, -c_self);
    }

    // touching elements [a, a+1] x [a+1, a+2], both orderings.
    // With xi = x_{a+1} - x and eta = y - x_{a+1}, each difference is
    // (c xi + d eta)/h and the moments are int xi^i eta^j (xi+eta)^{-1-2s}.
    let j = touching_moments(s);
    let base = scale / (3.0 - 2.0 * s);
    let i20 = base * (j[0] + j[2]);
    let i11 = base * 2.0 * j[1];
    let coef = [(1.0, 0.0), (-1.0, 1.0), (0.0, -1.0)];
    let mut touch = [[0.0; 3]; 3];
    for q in 0..3 {
        for t in 0..3 {
            let (cq, dq) = coef[q];
            let (ct, dt) = coef[t];
            touch[q][t] = 2.0 * (cq * ct * i20 + (cq * dt + dq * ct) * i11 + dq * dt * i20);
        }
    }
    for a in 0..n {
        for q in 0..3 {
            for t in 0..3 {
                add(&mut k, a + q, a + t, touch[q][t]);
            }
        }
    }

    // separated elements
    let (gx, gw) = gauss_legendre_unit(GAUSS_ORDER);
    for m in 2..=n {
        let local = separated_pair(s, m, &gx, &gw);
        for a in 0..=(n - m) {
            let g = [a, a + 1, a + m, a + m + 1];
            for q in 0..4 {
                for t in 0..4 {
                    add(&mut k, g[q], g[t], scale * local[q][t]);
                }
            }
        }
    }

    // exterior weight 2 w(x) = (x^{-2s} + (L - x)^{-2s}) / s against phi_i phi_j
    let expo = -2.0 * s;
    let singular_end = h.powf(1.0 - 2.0 * s) / ((3.0 - 2.0 * s) * s);
    for e in 0..=n {
        let mut local = [[0.0; 2]; 2];
        for (t, w) in gx.iter().zip(&gw) {
            let x = h * (e as f64 + t);
            let mut weight = 0.0;
            if e != 0 {
                weight += x.powf(expo);
            }
            if e != n {
                weight += (len - x).powf(expo);
            }
            let weight = weight / s;
            let phi = [1.0 - t, *t];
            for q in 0..2 {
                for r in 0..2 {
                    local[q][r] += h * w * weight * phi[q] * phi[r];
                }
            }
        }
        // the singular end of a boundary element only meets its interior hat
        if e == 0 {
            local[1][1] += singular_end;
        }
        if e == n {
            local[0][0] += singular_end;
        }
        for q in 0..2 {
            for r in 0..2 {
                add(&mut k, e + q, e + r, local[q][r]);
            }
        }
    }

    // exact symmetry
    let kt = k.transpose();
    (k + kt) * 0.5
}
