//! The smoothing family `psi_eps` of `t -> t^{p/2}` and the functionals built
//! from it.
//!
//! For `t >= eps^2`, `psi_eps(t) = t^{p/2}`; below the knot it is the tangent
//! line `(p/2) t / eps^{2-p} + (1 - p/2) eps^p`. Hence `psi_eps(u^2)` is a
//! concave, C¹ majorant of `|u|^p` that is exact away from zero, and
//! `G_eps(u) = int psi_eps(u^2)` approximates `int |u|^p`.

use serde::{Deserialize, Serialize};

use crate::grid::{abs_pow, check_exponent, Grid, GridFunction};
use crate::{Error, Result};

/// Exponent `p` and smoothing radius `eps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiParams {
    p: f64,
    eps: f64,
}

impl PsiParams {
    pub fn new(p: f64, eps: f64) -> Result<Self> {
        check_exponent(p)?;
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::Domain(format!("eps must be finite and >= 0, got {eps}")));
        }
        Ok(PsiParams { p, eps })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn with_eps(self, eps: f64) -> Result<Self> {
        PsiParams::new(self.p, eps)
    }

    /// Unchecked evaluation of `psi_eps(t)` for `t >= 0`.
    #[inline]
    pub(crate) fn value(&self, t: f64) -> f64 {
        let (p, eps) = (self.p, self.eps);
        if t < eps * eps {
            0.5 * p * t * eps.powf(p - 2.0) + (1.0 - 0.5 * p) * eps.powf(p)
        } else if t == 0.0 {
            0.0
        } else {
            (0.5 * p * t.ln()).exp()
        }
    }

    /// Unchecked `psi'_eps(t)`; infinite at `t = 0` when `eps = 0`.
    #[inline]
    pub(crate) fn derivative(&self, t: f64) -> f64 {
        let (p, eps) = (self.p, self.eps);
        if t < eps * eps {
            0.5 * p * eps.powf(p - 2.0)
        } else if t == 0.0 {
            f64::INFINITY
        } else {
            0.5 * p * (0.5 * (p - 2.0) * t.ln()).exp()
        }
    }

    /// Upper bound `(p/2) eps^{p-2}` on `psi'_eps`.
    pub fn derivative_bound(&self) -> f64 {
        0.5 * self.p * self.eps.powf(self.p - 2.0)
    }

    /// Maximal gap `(1 - p/2) eps^p` between `psi_eps(t^2)` and `|t|^p`.
    pub fn sandwich_gap(&self) -> f64 {
        (1.0 - 0.5 * self.p) * self.eps.powf(self.p)
    }
}

fn check_t(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("psi is defined for finite t >= 0, got {t}")))
    }
}

/// `psi_eps(t)`.
pub fn psi(params: PsiParams, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(params.value(t))
}

/// `psi'_eps(t) = (p/2) min(eps^{p-2}, t^{(p-2)/2})`.
pub fn psi_prime(params: PsiParams, t: f64) -> Result<f64> {
    check_t(t)?;
    if t == 0.0 && params.eps == 0.0 {
        return Err(Error::Domain(
            "psi' is unbounded at t = 0 when eps = 0".to_string(),
        ));
    }
    Ok(params.derivative(t))
}

/// `G_eps(u) = int psi_eps(u^2)`.
pub fn g_eps(grid: &Grid, u: &GridFunction, params: PsiParams) -> Result<f64> {
    grid.check(u.len())?;
    Ok(g_eps_slice(grid, u.as_slice(), params))
}

pub(crate) fn g_eps_slice(grid: &Grid, u: &[f64], params: PsiParams) -> f64 {
    grid.weight() * u.iter().map(|v| params.value(v * v)).sum::<f64>()
}

/// L²-Riesz representative of `G'_eps(u)`: nodal values `2 u_i psi'_eps(u_i^2)`.
pub fn g_eps_grad(grid: &Grid, u: &GridFunction, params: PsiParams) -> Result<GridFunction> {
    grid.check(u.len())?;
    require_positive_eps(params)?;
    Ok(GridFunction::from_vec_unchecked(
        u.as_slice()
            .iter()
            .map(|v| 2.0 * v * params.derivative(v * v))
            .collect(),
    ))
}

/// Nodal weights `psi'_eps(u_i^2)`.
pub(crate) fn psi_prime_weights(u: &[f64], params: PsiParams) -> Vec<f64> {
    u.iter().map(|v| params.derivative(v * v)).collect()
}

/// Both sides of `p int min(eps^{p-2}, |u|^{p-2}) u^2 <= p int |u|^p`.
pub fn pairing_bound(grid: &Grid, u: &GridFunction, params: PsiParams) -> Result<(f64, f64)> {
    grid.check(u.len())?;
    require_positive_eps(params)?;
    Ok(pairing_bound_slice(grid, u.as_slice(), params))
}

pub(crate) fn pairing_bound_slice(grid: &Grid, u: &[f64], params: PsiParams) -> (f64, f64) {
    let p = params.p;
    let (mut lower, mut upper) = (0.0, 0.0);
    for &v in u {
        let t = v * v;
        let up = abs_pow(v, p);
        // min(eps^{p-2}, |v|^{p-2}) v^2 is |v|^p above the knot
        lower += if t < params.eps * params.eps {
            params.eps.powf(p - 2.0) * t
        } else {
            up
        };
        upper += up;
    }
    let w = grid.weight();
    (p * w * lower, p * w * upper)
}

fn require_positive_eps(params: PsiParams) -> Result<()> {
    if params.eps > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(
            "eps must be positive: G_0 has no single-valued derivative at u = 0".to_string(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{lp_pseudonorm, make_interval_grid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pp(p: f64, eps: f64) -> PsiParams {
        PsiParams::new(p, eps).unwrap()
    }

    #[test]
    fn psi_branches() {
        let a = psi(pp(0.5, 0.1), 0.04).unwrap();
        assert!((a - 0.04f64.powf(0.25)).abs() < 1e-15);
        assert!((a - 0.447_213_595_499_958).abs() < 1e-14);

        let b = psi(pp(0.5, 0.1), 0.0).unwrap();
        assert!((b - 0.75 * 0.1f64.sqrt()).abs() < 1e-15);
        assert!((b - 0.237_170_824_512_628).abs() < 1e-14);

        for p in [0.1, 0.5, 0.9] {
            assert_eq!(psi(pp(p, 0.0), 1.0).unwrap(), 1.0);
            assert_eq!(psi(pp(p, 0.0), 0.0).unwrap(), 0.0);
        }
        assert!(psi(pp(0.5, 0.1), -1e-3).is_err());
    }

    #[test]
    fn psi_prime_values() {
        for eps in [1e-3, 0.1, 0.5, 1.0] {
            assert!((psi_prime(pp(0.5, eps), 1.0).unwrap() - 0.25).abs() < 1e-15);
        }
        let d = psi_prime(pp(0.5, 0.1), 0.0).unwrap();
        assert!((d - 0.25 * 0.1f64.powf(-1.5)).abs() < 1e-12);
        assert!((d - 7.905_694_150_420_949).abs() < 1e-12);
        assert!(psi_prime(pp(0.5, 0.0), 0.0).is_err());
        assert!(psi_prime(pp(0.5, 0.0), 0.25).is_ok());
    }

    #[test]
    fn params_validation() {
        assert!(PsiParams::new(0.0, 0.1).is_err());
        assert!(PsiParams::new(1.0, 0.1).is_err());
        assert!(PsiParams::new(0.5, -0.1).is_err());
        assert!(PsiParams::new(0.5, f64::NAN).is_err());
    }

    #[test]
    fn knot_is_c1() {
        for p in [0.2, 0.5, 0.8] {
            for eps in [1e-4, 0.1, 2.0] {
                let prm = pp(p, eps);
                let k = eps * eps;
                let below = 0.5 * p * k * eps.powf(p - 2.0) + (1.0 - 0.5 * p) * eps.powf(p);
                let above = k.powf(0.5 * p);
                assert!((below - above).abs() <= 1e-14 * above);
                let d_below = 0.5 * p * eps.powf(p - 2.0);
                let d_above = 0.5 * p * k.powf(0.5 * (p - 2.0));
                assert!((d_below - d_above).abs() <= 1e-13 * d_above);
                assert!((prm.value(k) - above).abs() <= 1e-14 * above);
            }
        }
    }

    #[test]
    fn g_eps_limits() {
        let g = make_interval_grid(50, 1.0).unwrap();
        let u = GridFunction::from_fn(&g, |x, _| (7.0 * x).sin() * 0.3);
        let exact = lp_pseudonorm(&g, &u, 0.4).unwrap();
        assert!((g_eps(&g, &u, pp(0.4, 0.0)).unwrap() - exact).abs() < 1e-14);

        let z = GridFunction::zeros(&g);
        let v = g_eps(&g, &z, pp(0.5, 0.1)).unwrap();
        assert!((v - 0.75 * 0.1f64.sqrt() * g.quadrature_measure()).abs() < 1e-14);
    }

    #[test]
    fn g_eps_sandwich_on_random_vectors() {
        let g = make_interval_grid(40, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let p = rng.random_range(0.05..0.95);
            let eps = rng.random_range(1e-3..1.0);
            let u = GridFunction::from_fn(&g, |_, _| rng.random_range(-2.0..2.0) * rng.random::<f64>().powi(3));
            let prm = pp(p, eps);
            let ge = g_eps(&g, &u, prm).unwrap();
            let lp = lp_pseudonorm(&g, &u, p).unwrap();
            assert!(ge >= lp - 1e-14);
            assert!(ge - lp <= prm.sandwich_gap() * g.quadrature_measure() + 1e-14);
        }
    }

    #[test]
    fn g_eps_grad_basics() {
        let g = make_interval_grid(6, 1.0).unwrap();
        let zero = g_eps_grad(&g, &GridFunction::zeros(&g), pp(0.5, 0.1)).unwrap();
        assert!(zero.as_slice().iter().all(|v| *v == 0.0));
        let one = GridFunction::from_fn(&g, |_, _| 1.0);
        let gr = g_eps_grad(&g, &one, pp(0.5, 0.1)).unwrap();
        assert!(gr.as_slice().iter().all(|v| (v - 0.5).abs() < 1e-15));
        assert!(g_eps_grad(&g, &one, pp(0.5, 0.0)).is_err());
    }

    #[test]
    fn pairing_bound_cases() {
        let g = make_interval_grid(10, 1.0).unwrap();
        let prm = pp(0.5, 0.1);
        let c = GridFunction::from_fn(&g, |_, _| -0.3);
        let (lo, up) = pairing_bound(&g, &c, prm).unwrap();
        assert!((lo - up).abs() <= 1e-15 * up);
        assert!((up - 0.5 * lp_pseudonorm(&g, &c, 0.5).unwrap()).abs() < 1e-15);

        assert_eq!(pairing_bound(&g, &GridFunction::zeros(&g), prm).unwrap(), (0.0, 0.0));

        let mixed = GridFunction::from_fn(&g, |x, _| if x < 0.5 { 0.02 } else { 1.0 });
        let (lo, up) = pairing_bound(&g, &mixed, prm).unwrap();
        assert!(lo < up);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn concave_and_tangent_majorized(
                p in 0.05f64..0.95,
                eps in 1e-3f64..2.0,
                a in 0.0f64..5.0,
                b in 0.0f64..5.0,
                theta in 0.0f64..1.0,
            ) {
                let prm = pp(p, eps);
                let mid = prm.value(theta * a + (1.0 - theta) * b);
                let chord = theta * prm.value(a) + (1.0 - theta) * prm.value(b);
                prop_assert!(mid >= chord - 1e-13 * chord.abs().max(1.0));
                let tangent = prm.value(a) + prm.derivative(a) * (b - a);
                prop_assert!(prm.value(b) <= tangent + 1e-13 * tangent.abs().max(1.0));
            }

            #[test]
            fn derivative_bounded_and_monotone(
                p in 0.05f64..0.95,
                eps in 1e-3f64..2.0,
                t1 in 0.0f64..5.0,
                dt in 0.0f64..5.0,
            ) {
                let prm = pp(p, eps);
                let d1 = prm.derivative(t1);
                let d2 = prm.derivative(t1 + dt);
                prop_assert!(d1 > 0.0 && d1 <= prm.derivative_bound() * (1.0 + 1e-14));
                prop_assert!(d2 <= d1 * (1.0 + 1e-14));
            }
        }
    }
}
