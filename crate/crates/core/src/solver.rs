//! Monotone majorize-minimize iteration for
//! `Phi_eps(u) = F(u) + (alpha/2) ||u||_V^2 + beta G_eps(u)`.
//!
//! At `u_k` the concave term is replaced by its tangent in `u^2` and `F` by
//! its linearization plus `(L/2) ||u - u_k||_V^2`. The surrogate is strongly
//! convex with first-order system
//!
//! ```text
//! ((alpha + L) A + M diag(2 beta psi'_{eps_k}(u_k^2))) u = L A u_k - M grad F(u_k).
//! ```
//!
//! `L` is the first value of `0, L~, L~ eta, L~ eta^2, ...` for which
//! `F(u_{k+1}) <= F(u_k) + F'(u_k)(u_{k+1} - u_k) + L ||u_{k+1} - u_k||_V^2`.
//! With a non-increasing `eps_k` this gives
//!
//! ```text
//! Phi_{eps_{k+1}}(u_{k+1}) + (alpha/2) ||du||_V^2 + beta int psi'(u_k^2) du^2 <= Phi_{eps_k}(u_k),
//! ```
//!
//! which every [`IterationRecord`] carries enough data to check.

use serde::{Deserialize, Serialize};

use crate::frac_ops::{CgOptions, FracOperator};
use crate::grid::{check_exponent, dot, lp_pseudonorm_slice, Grid, GridFunction};
use crate::objective::Objective;
use crate::smoothing::{g_eps_slice, pairing_bound_slice, psi_prime_weights, PsiParams};
use crate::{Error, Result};

/// Relative slack in the backtracking test, absorbing round-off in `F`.
const DESCENT_ROUNDOFF: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Weight of `(alpha/2) ||u||_V^2`.
    pub alpha: f64,
    /// Weight of the `L^p` term.
    pub beta_reg: f64,
    pub p: f64,
    pub eps0: f64,
    /// `eps_{k+1} = max(eps_min, eps_decay * eps_k)`.
    pub eps_decay: f64,
    pub eps_min: f64,
    /// First nonzero rung of the backtracking ladder.
    pub l_tilde: f64,
    /// Ladder growth factor (> 1).
    pub bt_growth: f64,
    pub max_outer: usize,
    /// Stop once `||u_{k+1} - u_k||_V <= tol_step`.
    pub tol_step: f64,
    pub tol_cg: f64,
    /// Cap on backtracking trials per outer iteration.
    pub max_bt_trials: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            alpha: 1e-2,
            beta_reg: 1e-2,
            p: 0.5,
            eps0: 1e-1,
            eps_decay: 0.5,
            eps_min: 1e-6,
            l_tilde: 1e-2,
            bt_growth: 2.0,
            max_outer: 500,
            tol_step: 1e-8,
            tol_cg: 1e-10,
            max_bt_trials: 60,
        }
    }
}

impl SolverConfig {
    /// Every violated constraint, one message each.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let mut need = |ok: bool, msg: &str| {
            if !ok {
                v.push(msg.to_string());
            }
        };
        need(self.alpha > 0.0 && self.alpha.is_finite(), "alpha must be > 0");
        need(
            self.beta_reg >= 0.0 && self.beta_reg.is_finite(),
            "beta_reg must be >= 0",
        );
        need(self.p > 0.0 && self.p < 1.0, "p must lie in (0,1)");
        need(self.eps0 > 0.0 && self.eps0.is_finite(), "eps0 must be > 0");
        need(
            self.eps_decay > 0.0 && self.eps_decay <= 1.0,
            "eps_decay must lie in (0,1]",
        );
        need(
            self.eps_min >= 0.0 && self.eps_min <= self.eps0,
            "eps_min must lie in [0, eps0]",
        );
        need(self.l_tilde > 0.0 && self.l_tilde.is_finite(), "l_tilde must be > 0");
        need(self.bt_growth > 1.0 && self.bt_growth.is_finite(), "bt_growth must be > 1");
        need(self.max_outer >= 1, "max_outer must be >= 1");
        need(self.tol_step > 0.0, "tol_step must be > 0");
        need(self.tol_cg > 0.0 && self.tol_cg < 1.0, "tol_cg must lie in (0,1)");
        need(self.max_bt_trials >= 1, "max_bt_trials must be >= 1");
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }

    fn psi(&self, eps: f64) -> PsiParams {
        PsiParams::new(self.p, eps).expect("validated config")
    }

    fn cg(&self) -> CgOptions {
        CgOptions {
            tol: self.tol_cg,
            max_iter: None,
        }
    }

    fn next_eps(&self, eps: f64) -> f64 {
        (self.eps_decay * eps).max(self.eps_min)
    }
}

/// Diagnostics of one outer iteration `u_k -> u_{k+1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub eps_k: f64,
    pub l_k: f64,
    pub bt_trials: usize,
    /// `Phi_{eps_k}(u_k)`.
    pub phi: f64,
    /// `Phi_{eps_{k+1}}(u_{k+1})`.
    pub phi_next: f64,
    /// `||u_{k+1} - u_k||_V`.
    pub step_v: f64,
    /// `(alpha/2) ||du||_V^2 + beta int psi'_{eps_k}(u_k^2) du^2`.
    pub descent_penalty: f64,
    /// Fraction of nodes with `|u_{k+1}| > eps_k`.
    pub support_fraction: f64,
    /// Pairing bounds of `u_{k+1}` at `eps_k`.
    pub pairing_lower: f64,
    pub pairing_upper: f64,
    /// `<lambda_k, u_{k+1}> - p int |u_{k+1}|^p`.
    pub pairing_gap: f64,
    /// Dual norm of the stationarity residual at `u_{k+1}`.
    pub stationarity_residual: f64,
}

impl IterationRecord {
    pub const CSV_HEADER: &'static str = "k,eps_k,L_k,bt_trials,phi,phi_next,step_V,descent_penalty,support_fraction,pairing_lower,pairing_upper,pairing_gap,stationarity_residual";

    pub fn csv_row(&self) -> String {
        use crate::grid::fmt_f64 as f;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.k,
            f(self.eps_k),
            f(self.l_k),
            self.bt_trials,
            f(self.phi),
            f(self.phi_next),
            f(self.step_v),
            f(self.descent_penalty),
            f(self.support_fraction),
            f(self.pairing_lower),
            f(self.pairing_upper),
            f(self.pairing_gap),
            f(self.stationarity_residual),
        )
    }

    /// Violation of the three-term descent inequality, relative to `phi`
    /// (`<= 0` when it holds).
    pub fn descent_excess(&self) -> f64 {
        (self.phi_next + self.descent_penalty - self.phi) / self.phi.abs().max(f64::MIN_POSITIVE)
    }
}

/// Discrete multiplier and residuals of the limit system
/// `alpha A u + beta M lambda = -M grad F(u)`, `<lambda, u> >= p int |u|^p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    /// `lambda_i = 2 psi'_{eps_k}(u_{k,i}^2) u_{k+1,i}` (beta factored out).
    pub lambda: GridFunction,
    /// `sqrt(r . A^{-1} r)` with `r = alpha A u + beta M lambda + M grad F(u)`.
    pub residual_norm: f64,
    /// `<lambda, u>_{L2} - p int |u|^p`.
    pub pairing_gap: f64,
    /// `1 + ||M grad F(u)||_{V*} + alpha ||u||_V`, the size of the balanced terms.
    pub scale: f64,
    pub eps: f64,
}

/// Result of [`backtrack`].
#[derive(Clone, Debug)]
pub struct BacktrackStep {
    pub l: f64,
    pub u_next: GridFunction,
    pub trials: usize,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub u: GridFunction,
    pub records: Vec<IterationRecord>,
    pub report: StationarityReport,
    pub converged: bool,
    /// `Phi_{eps_0}(u_0)`.
    pub phi_initial: f64,
    pub eps_final: f64,
}

/// A run that stopped on an error; the records up to the failure are kept.
#[derive(Debug, thiserror::Error)]
#[error("solver failed after {} iterations: {error}", records.len())]
pub struct RunFailure {
    #[source]
    pub error: Error,
    pub records: Vec<IterationRecord>,
    pub last_iterate: GridFunction,
}

impl From<RunFailure> for Error {
    fn from(f: RunFailure) -> Self {
        f.error
    }
}

fn check_setup<P: Objective + ?Sized>(
    cfg: &SolverConfig,
    op: &FracOperator,
    prob: &P,
    u: &GridFunction,
) -> Result<()> {
    cfg.validate()?;
    if op.grid() != prob.grid() {
        return Err(Error::InvalidArgument(
            "operator and objective live on different grids".into(),
        ));
    }
    op.grid().check(u.len())
}

/// `Phi_eps(u)`.
pub fn phi<P: Objective + ?Sized>(
    u: &GridFunction,
    eps: f64,
    cfg: &SolverConfig,
    op: &FracOperator,
    prob: &P,
) -> Result<f64> {
    check_exponent(cfg.p)?;
    let params = PsiParams::new(cfg.p, eps)?;
    op.grid().check(u.len())?;
    let f = prob.eval(u)?;
    Ok(phi_with(f, u.as_slice(), params, cfg, op))
}

fn phi_with(f: f64, u: &[f64], params: PsiParams, cfg: &SolverConfig, op: &FracOperator) -> f64 {
    f + 0.5 * cfg.alpha * op.norm_sq_slice(u) + cfg.beta_reg * g_eps_slice(op.grid(), u, params)
}

fn surrogate_weights(u_k: &[f64], eps_k: f64, cfg: &SolverConfig) -> Vec<f64> {
    let params = cfg.psi(eps_k);
    psi_prime_weights(u_k, params)
        .into_iter()
        .map(|d| 2.0 * cfg.beta_reg * d)
        .collect()
}

/// Minimizer of the surrogate with `grad F(u_k)` supplied by the caller.
fn solve_surrogate(
    u_k: &[f64],
    grad_k: &[f64],
    weights: &[f64],
    l: f64,
    cfg: &SolverConfig,
    op: &FracOperator,
) -> Result<Vec<f64>> {
    let mass = op.grid().weight();
    let mut rhs = if l > 0.0 {
        op.gram_vec(u_k).into_iter().map(|v| l * v).collect()
    } else {
        vec![0.0; u_k.len()]
    };
    for (r, g) in rhs.iter_mut().zip(grad_k) {
        *r -= mass * g;
    }
    let (u, _) = op.solve_shifted_slice(cfg.alpha + l, weights, &rhs, cfg.cg())?;
    Ok(u)
}

/// Unique minimizer of the surrogate at `u_k` with proximal constant `l`.
pub fn subproblem_solve<P: Objective + ?Sized>(
    u_k: &GridFunction,
    eps_k: f64,
    l: f64,
    cfg: &SolverConfig,
    op: &FracOperator,
    prob: &P,
) -> Result<GridFunction> {
    check_setup(cfg, op, prob, u_k)?;
    if !(l >= 0.0 && l.is_finite()) {
        return Err(Error::InvalidArgument(format!("L must be >= 0, got {l}")));
    }
    if !(eps_k > 0.0) {
        return Err(Error::Domain(format!("eps_k must be > 0, got {eps_k}")));
    }
    let grad = prob.grad(u_k)?;
    let w = surrogate_weights(u_k.as_slice(), eps_k, cfg);
    solve_surrogate(u_k.as_slice(), grad.as_slice(), &w, l, cfg, op)
        .map(GridFunction::from_vec_unchecked)
}

/// Surrogate objective value at `u` (up to the constant `F(u_k)`), used by
/// tests and diagnostics.
pub fn surrogate_value<P: Objective + ?Sized>(
    u: &GridFunction,
    u_k: &GridFunction,
    eps_k: f64,
    l: f64,
    cfg: &SolverConfig,
    op: &FracOperator,
    prob: &P,
) -> Result<f64> {
    check_setup(cfg, op, prob, u_k)?;
    op.grid().check(u.len())?;
    let params = PsiParams::new(cfg.p, eps_k)?;
    let grid = op.grid();
    let g = prob.grad(u_k)?;
    let (uk, uu) = (u_k.as_slice(), u.as_slice());
    let du: Vec<f64> = uu.iter().zip(uk).map(|(a, b)| a - b).collect();
    let lin = grid.weight() * dot(g.as_slice(), &du);
    let tangent: f64 = uk
        .iter()
        .zip(uu)
        .map(|(a, b)| params.value(a * a) + params.derivative(a * a) * (b * b - a * a))
        .sum::<f64>()
        * grid.weight();
    Ok(prob.eval(u_k)?
        + lin
        + 0.5 * l * op.norm_sq_slice(&du)
        + 0.5 * cfg.alpha * op.norm_sq_slice(uu)
        + cfg.beta_reg * tangent)
}

struct Ladder {
    next: f64,
    started: bool,
    growth: f64,
}

impl Iterator for Ladder {
    type Item = f64;
    fn next(&mut self) -> Option<f64> {
        if !self.started {
            self.started = true;
            return Some(0.0);
        }
        let v = self.next;
        self.next *= self.growth;
        Some(v)
    }
}

/// The trial values `0, L~, L~ eta, L~ eta^2, ...`.
pub fn backtracking_ladder(cfg: &SolverConfig) -> impl Iterator<Item = f64> {
    Ladder {
        next: cfg.l_tilde,
        started: false,
        growth: cfg.bt_growth,
    }
}

/// Excess of the backtracking descent test (`<= 0` means accepted).
fn descent_test(f_next: f64, f_k: f64, lin: f64, l: f64, step_sq: f64) -> f64 {
    let bound = f_k + lin + l * step_sq;
    f_next - bound - DESCENT_ROUNDOFF * (f_k.abs() + f_next.abs())
}

struct Accepted {
    l: f64,
    u_next: Vec<f64>,
    trials: usize,
    f_next: f64,
    grad_next: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
fn backtrack_inner<P: Objective + ?Sized>(
    k: usize,
    u_k: &[f64],
    f_k: f64,
    grad_k: &[f64],
    eps_k: f64,
    cfg: &SolverConfig,
    op: &FracOperator,
    prob: &P,
) -> Result<Accepted> {
    let grid = op.grid();
    let w = surrogate_weights(u_k, eps_k, cfg);
    let mut last = (0.0, f64::INFINITY);
    for (trial, l) in backtracking_ladder(cfg).take(cfg.max_bt_trials).enumerate() {
        let u = solve_surrogate(u_k, grad_k, &w, l, cfg, op)?;
        let du: Vec<f64> = u.iter().zip(u_k).map(|(a, b)| a - b).collect();
        let step_sq = op.norm_sq_slice(&du);
        let lin = grid.weight() * dot(grad_k, &du);
        let trial_fn = GridFunction::from_vec_unchecked(u);
        let (f_next, grad_next) = prob.eval_grad(&trial_fn)?;
        let excess = descent_test(f_next, f_k, lin, l, step_sq);
        if excess <= 0.0 {
            return Ok(Accepted {
                l,
                u_next: trial_fn.into_vec(),
                trials: trial + 1,
                f_next,
                grad_next: grad_next.into_vec(),
            });
        }
        last = (l, excess);
    }
    Err(Error::BacktrackExhausted {
        iteration: k,
        trials: cfg.max_bt_trials,
        last_l: last.0,
        excess: last.1,
    })
}

/// Smallest ladder value passing the descent test, with the corresponding
/// surrogate minimizer.
pub fn backtrack<P: Objective + ?Sized>(
    u_k: &GridFunction,
    eps_k: f64,
    cfg: &SolverConfig,
    op: &FracOperator,
    prob: &P,
) -> Result<BacktrackStep> {
    check_setup(cfg, op, prob, u_k)?;
    if !(eps_k > 0.0) {
        return Err(Error::Domain(format!("eps_k must be > 0, got {eps_k}")));
    }
    let (f_k, g_k) = prob.eval_grad(u_k)?;
    let acc = backtrack_inner(0, u_k.as_slice(), f_k, g_k.as_slice(), eps_k, cfg, op, prob)?;
    Ok(BacktrackStep {
        l: acc.l,
        u_next: GridFunction::from_vec_unchecked(acc.u_next),
        trials: acc.trials,
    })
}

fn report_from(
    u_k: &[f64],
    u_next: &[f64],
    grad_next: &[f64],
    eps_k: f64,
    cfg: &SolverConfig,
    op: &FracOperator,
) -> Result<StationarityReport> {
    let grid = op.grid();
    let mass = grid.weight();
    let params = cfg.psi(eps_k);
    let lambda: Vec<f64> = u_k
        .iter()
        .zip(u_next)
        .map(|(a, b)| 2.0 * params.derivative(a * a) * b)
        .collect();
    let au = op.gram_vec(u_next);
    let r: Vec<f64> = (0..u_next.len())
        .map(|i| cfg.alpha * au[i] + mass * (cfg.beta_reg * lambda[i] + grad_next[i]))
        .collect();
    let residual_norm = op.dual_norm(&r, cfg.cg())?;
    let mg: Vec<f64> = grad_next.iter().map(|g| mass * g).collect();
    let scale = 1.0 + op.dual_norm(&mg, cfg.cg())? + cfg.alpha * dot(u_next, &au).max(0.0).sqrt();
    let pairing_gap = mass * dot(&lambda, u_next) - cfg.p * lp_pseudonorm_slice(grid, u_next, cfg.p);
    Ok(StationarityReport {
        lambda: GridFunction::from_vec_unchecked(lambda),
        residual_norm,
        pairing_gap,
        scale,
        eps: eps_k,
    })
}

/// Multiplier, residual norm and pairing gap for consecutive iterates.
pub fn stationarity_report<P: Objective + ?Sized>(
    u_k: &GridFunction,
    u_next: &GridFunction,
    eps_k: f64,
    cfg: &SolverConfig,
    op: &FracOperator,
    prob: &P,
) -> Result<StationarityReport> {
    check_setup(cfg, op, prob, u_k)?;
    op.grid().check(u_next.len())?;
    if !(eps_k > 0.0) {
        return Err(Error::Domain(format!("eps_k must be > 0, got {eps_k}")));
    }
    let g = prob.grad(u_next)?;
    report_from(u_k.as_slice(), u_next.as_slice(), g.as_slice(), eps_k, cfg, op)
}

fn support_fraction(u: &[f64], eps: f64) -> f64 {
    u.iter().filter(|v| v.abs() > eps).count() as f64 / u.len() as f64
}

/// Runs the iteration from `u0` until the V-norm step drops below
/// `tol_step` or `max_outer` iterations have been taken.
pub fn run<P: Objective + ?Sized>(
    cfg: &SolverConfig,
    op: &FracOperator,
    prob: &P,
    u0: &GridFunction,
) -> std::result::Result<RunOutcome, RunFailure> {
    let fail = |error: Error, records: Vec<IterationRecord>, u: &[f64]| RunFailure {
        error,
        records,
        last_iterate: GridFunction::from_vec_unchecked(u.to_vec()),
    };
    if let Err(e) = check_setup(cfg, op, prob, u0) {
        return Err(fail(e, Vec::new(), u0.as_slice()));
    }
    let grid: &Grid = op.grid();
    let mut u = u0.as_slice().to_vec();
    let mut eps = cfg.eps0;
    let (mut f, mut grad) = match prob.eval_grad(u0) {
        Ok((f, g)) => (f, g.into_vec()),
        Err(e) => return Err(fail(e, Vec::new(), &u)),
    };
    let mut phi_k = phi_with(f, &u, cfg.psi(eps), cfg, op);
    let phi_initial = phi_k;
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut converged = false;
    let mut report = None;

    for k in 0..cfg.max_outer {
        let acc = match backtrack_inner(k, &u, f, &grad, eps, cfg, op, prob) {
            Ok(a) => a,
            Err(e) => return Err(fail(e, records, &u)),
        };
        let params = cfg.psi(eps);
        let du: Vec<f64> = acc.u_next.iter().zip(&u).map(|(a, b)| a - b).collect();
        let step_sq = op.norm_sq_slice(&du);
        let weighted: f64 = grid.weight()
            * u.iter()
                .zip(&du)
                .map(|(a, d)| params.derivative(a * a) * d * d)
                .sum::<f64>();
        let eps_next = cfg.next_eps(eps);
        let phi_next = phi_with(acc.f_next, &acc.u_next, cfg.psi(eps_next), cfg, op);
        let rep = match report_from(&u, &acc.u_next, &acc.grad_next, eps, cfg, op) {
            Ok(r) => r,
            Err(e) => return Err(fail(e, records, &u)),
        };
        let (pairing_lower, pairing_upper) = pairing_bound_slice(grid, &acc.u_next, params);
        records.push(IterationRecord {
            k,
            eps_k: eps,
            l_k: acc.l,
            bt_trials: acc.trials,
            phi: phi_k,
            phi_next,
            step_v: step_sq.max(0.0).sqrt(),
            descent_penalty: 0.5 * cfg.alpha * step_sq + cfg.beta_reg * weighted,
            support_fraction: support_fraction(&acc.u_next, eps),
            pairing_lower,
            pairing_upper,
            pairing_gap: rep.pairing_gap,
            stationarity_residual: rep.residual_norm,
        });
        report = Some(rep);
        u = acc.u_next;
        f = acc.f_next;
        grad = acc.grad_next;
        phi_k = phi_next;
        let done = step_sq.max(0.0).sqrt() <= cfg.tol_step;
        eps = eps_next;
        if done {
            converged = true;
            break;
        }
    }

    let report = report.expect("max_outer >= 1 yields at least one record");
    Ok(RunOutcome {
        u: GridFunction::from_vec_unchecked(u),
        records,
        report,
        converged,
        phi_initial,
        eps_final: eps,
    })
}

/// Minimizer of `F + (alpha/2)||u||_V^2` (the `beta = 0` problem), computed
/// by the same iteration started at zero. Used as the default initial guess
/// because `u = 0` is always stationary for the `L^p` problem.
pub fn tikhonov_start<P: Objective + ?Sized>(
    cfg: &SolverConfig,
    op: &FracOperator,
    prob: &P,
) -> Result<GridFunction> {
    let cfg = SolverConfig {
        beta_reg: 0.0,
        ..cfg.clone()
    };
    let out = run(&cfg, op, prob, &GridFunction::zeros(op.grid()))?;
    Ok(out.u)
}
