//! C ABI for `fraclp-core`.
//!
//! Objects cross the boundary as opaque handles created by the constructor
//! functions and released with the matching `*_free`. Every fallible call
//! returns a [`FraclpStatus`]; on failure the message is available from
//! [`fraclp_last_error`] on the same thread. Panics never unwind into C: they
//! are caught and reported as `FRACLP_STATUS_PANIC`.
//!
//! Arrays are passed as a pointer plus length; the length must equal the
//! number of grid nodes of the handle involved.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use fraclp_core::config::parse_config;
use fraclp_core::experiment::{run_single, run_sweep};
use fraclp_core::frac_ops::{integral_stiffness, spectral_operator, CgOptions};
use fraclp_core::grid::{make_interval_grid, make_rect_grid};
use fraclp_core::objective::{
    Diffusivity, ForwardMap, HeatSourceProblem, Objective, Reaction, TrackingProblem,
};
use fraclp_core::solver::{run, tikhonov_start};
use fraclp_core::{
    Error, FracOperator, Grid, GridFunction, ObjectiveProblem, RunOutcome, SolverConfig,
};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FraclpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Domain = 4,
    NotConverged = 5,
    Config = 6,
    Io = 7,
    Numerical = 8,
    Panic = 9,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> FraclpStatus {
    match err {
        Error::InvalidArgument(_) => FraclpStatus::InvalidArgument,
        Error::DimensionMismatch { .. } => FraclpStatus::DimensionMismatch,
        Error::Domain(_) => FraclpStatus::Domain,
        Error::CgNotConverged { .. } | Error::BacktrackExhausted { .. } => FraclpStatus::NotConverged,
        Error::NonFinite(_) => FraclpStatus::Numerical,
        Error::Config(_) | Error::Parse { .. } => FraclpStatus::Config,
        Error::Io { .. } => FraclpStatus::Io,
        Error::Stage { source, .. } => status_of(source),
    }
}

struct Fail(FraclpStatus);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let s = status_of(&e);
        set_error(e.to_string());
        Fail(s)
    }
}

fn fail(status: FraclpStatus, msg: impl Into<String>) -> Fail {
    set_error(msg);
    Fail(status)
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> FraclpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FraclpStatus::Ok,
        Ok(Err(Fail(s))) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            FraclpStatus::Panic
        }
    }
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    // SAFETY: caller passes a handle from this library or null.
    unsafe { p.as_ref() }.ok_or_else(|| fail(FraclpStatus::NullPointer, format!("{what} is null")))
}

unsafe fn slice<'a>(p: *const f64, len: usize, expected: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len != expected {
        return Err(fail(
            FraclpStatus::DimensionMismatch,
            format!("{what}: expected {expected} values, got {len}"),
        ));
    }
    if p.is_null() {
        return Err(fail(FraclpStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: caller guarantees `len` readable values.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, expected: usize, what: &str) -> Result<&'a mut [f64], Fail> {
    if len != expected {
        return Err(fail(
            FraclpStatus::DimensionMismatch,
            format!("{what}: expected {expected} values, got {len}"),
        ));
    }
    if p.is_null() {
        return Err(fail(FraclpStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: caller guarantees `len` writable values.
    Ok(unsafe { std::slice::from_raw_parts_mut(p, len) })
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    // SAFETY: caller passes a writable location or null.
    unsafe { p.as_mut() }.ok_or_else(|| fail(FraclpStatus::NullPointer, format!("{what} is null")))
}

fn grid_fn(grid: &Grid, v: &[f64]) -> Result<GridFunction, Fail> {
    Ok(GridFunction::new(grid, v.to_vec())?)
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        // SAFETY: `p` came from `boxed` and is released once.
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fraclp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fraclp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---------------------------------------------------------------- grid

pub struct FraclpGrid {
    inner: Grid,
}

/// # Safety
/// `out` must be a valid location for a handle pointer.
#[no_mangle]
pub unsafe extern "C" fn fraclp_grid_interval(n: usize, length: f64, out: *mut *mut FraclpGrid) -> FraclpStatus {
    guard(|| {
        let out = unsafe { out_ptr(out, "out") }?;
        *out = boxed(FraclpGrid {
            inner: make_interval_grid(n, length)?,
        });
        Ok(())
    })
}

/// # Safety
/// `out` must be a valid location for a handle pointer.
#[no_mangle]
pub unsafe extern "C" fn fraclp_grid_rect(
    nx: usize,
    lx: f64,
    ny: usize,
    ly: f64,
    out: *mut *mut FraclpGrid,
) -> FraclpStatus {
    guard(|| {
        let out = unsafe { out_ptr(out, "out") }?;
        *out = boxed(FraclpGrid {
            inner: make_rect_grid(nx, lx, ny, ly)?,
        });
        Ok(())
    })
}

/// Number of nodes, or 0 for a null handle.
///
/// # Safety
/// `grid` must be null or a live grid handle.
#[no_mangle]
pub unsafe extern "C" fn fraclp_grid_len(grid: *const FraclpGrid) -> usize {
    unsafe { grid.as_ref() }.map_or(0, |g| g.inner.len())
}

/// Writes node coordinates; `y` may be null for 1-D grids.
///
/// # Safety
/// `x` (and `y` when non-null) must hold `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn fraclp_grid_coords(
    grid: *const FraclpGrid,
    x: *mut f64,
    y: *mut f64,
    len: usize,
) -> FraclpStatus {
    guard(|| {
        let g = &unsafe { handle(grid, "grid") }?.inner;
        let xs = unsafe { slice_mut(x, len, g.len(), "x") }?;
        for (i, v) in xs.iter_mut().enumerate() {
            *v = g.coords(i).0;
        }
        if !y.is_null() {
            let ys = unsafe { slice_mut(y, len, g.len(), "y") }?;
            for (i, v) in ys.iter_mut().enumerate() {
                *v = g.coords(i).1;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `grid` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fraclp_grid_free(grid: *mut FraclpGrid) {
    unsafe { free(grid) }
}

// ---------------------------------------------------------------- operator

pub struct FraclpOperator {
    inner: FracOperator,
}

/// # Safety
/// `grid` must be a live grid handle and `out` a valid location.
#[no_mangle]
pub unsafe extern "C" fn fraclp_operator_spectral(
    grid: *const FraclpGrid,
    s: f64,
    out: *mut *mut FraclpOperator,
) -> FraclpStatus {
    guard(|| {
        let g = &unsafe { handle(grid, "grid") }?.inner;
        let out = unsafe { out_ptr(out, "out") }?;
        *out = boxed(FraclpOperator {
            inner: spectral_operator(g, s)?,
        });
        Ok(())
    })
}

/// Dense integral (Gagliardo) operator; 1-D grids only.
///
/// # Safety
/// `grid` must be a live grid handle and `out` a valid location.
#[no_mangle]
pub unsafe extern "C" fn fraclp_operator_integral(
    grid: *const FraclpGrid,
    s: f64,
    out: *mut *mut FraclpOperator,
) -> FraclpStatus {
    guard(|| {
        let g = &unsafe { handle(grid, "grid") }?.inner;
        let out = unsafe { out_ptr(out, "out") }?;
        *out = boxed(FraclpOperator {
            inner: integral_stiffness(g, s)?,
        });
        Ok(())
    })
}

/// `out = M^{-1} A u`.
///
/// # Safety
/// `u` and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn fraclp_operator_apply(
    op: *const FraclpOperator,
    u: *const f64,
    out: *mut f64,
    len: usize,
) -> FraclpStatus {
    guard(|| {
        let op = &unsafe { handle(op, "operator") }?.inner;
        let n = op.grid().len();
        let u = grid_fn(op.grid(), unsafe { slice(u, len, n, "u") }?)?;
        let dst = unsafe { slice_mut(out, len, n, "out") }?;
        dst.copy_from_slice(op.apply(&u)?.as_slice());
        Ok(())
    })
}

/// `<u, v>_V`.
///
/// # Safety
/// `u` and `v` must hold `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fraclp_operator_inner(
    op: *const FraclpOperator,
    u: *const f64,
    v: *const f64,
    len: usize,
    out: *mut f64,
) -> FraclpStatus {
    guard(|| {
        let op = &unsafe { handle(op, "operator") }?.inner;
        let n = op.grid().len();
        let u = grid_fn(op.grid(), unsafe { slice(u, len, n, "u") }?)?;
        let v = grid_fn(op.grid(), unsafe { slice(v, len, n, "v") }?)?;
        *unsafe { out_ptr(out, "out") }? = op.inner(&u, &v)?;
        Ok(())
    })
}

/// Solves `(c A + M diag(w)) u = rhs`; `tol <= 0` selects the default.
///
/// # Safety
/// `w`, `rhs` and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn fraclp_operator_solve_shifted(
    op: *const FraclpOperator,
    c: f64,
    w: *const f64,
    rhs: *const f64,
    out: *mut f64,
    len: usize,
    tol: f64,
) -> FraclpStatus {
    guard(|| {
        let op = &unsafe { handle(op, "operator") }?.inner;
        let n = op.grid().len();
        let w = unsafe { slice(w, len, n, "w") }?;
        let rhs = grid_fn(op.grid(), unsafe { slice(rhs, len, n, "rhs") }?)?;
        let mut opts = CgOptions::default();
        if tol > 0.0 {
            opts.tol = tol;
        }
        let u = op.solve_shifted(c, w, &rhs, opts)?;
        unsafe { slice_mut(out, len, n, "out") }?.copy_from_slice(u.as_slice());
        Ok(())
    })
}

/// # Safety
/// `op` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fraclp_operator_free(op: *mut FraclpOperator) {
    unsafe { free(op) }
}

// ---------------------------------------------------------------- problems

pub struct FraclpProblem {
    inner: ObjectiveProblem,
}

/// `F(u) = 1/2 ||K u - z||^2` with `K = I` when `blur_width <= 0`, otherwise
/// a Gaussian blur of that width.
///
/// # Safety
/// `z` must hold `len` values and `out` be a valid location.
#[no_mangle]
pub unsafe extern "C" fn fraclp_problem_tracking(
    grid: *const FraclpGrid,
    z: *const f64,
    len: usize,
    blur_width: f64,
    out: *mut *mut FraclpProblem,
) -> FraclpStatus {
    guard(|| {
        let g = &unsafe { handle(grid, "grid") }?.inner;
        let z = grid_fn(g, unsafe { slice(z, len, g.len(), "z") }?)?;
        let map = if blur_width > 0.0 {
            ForwardMap::gaussian_blur(g, blur_width)?
        } else {
            ForwardMap::Identity
        };
        let out = unsafe { out_ptr(out, "out") }?;
        *out = boxed(FraclpProblem {
            inner: TrackingProblem::new(g, z, map)?.into(),
        });
        Ok(())
    })
}

/// Reaction term of the heat problem.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FraclpReaction {
    Zero = 0,
    /// `f(y) = y^3 - y`.
    Cubic = 1,
}

/// Terminal tracking for `y_t - a y_xx + f(y) = 0`, `y(0) = y0 + u`, on a
/// 1-D grid with constant diffusivity.
///
/// # Safety
/// `y0` and `z` must hold `len` values and `out` be a valid location.
#[no_mangle]
pub unsafe extern "C" fn fraclp_problem_heat_source(
    grid: *const FraclpGrid,
    diffusivity: f64,
    reaction: FraclpReaction,
    y0: *const f64,
    z: *const f64,
    len: usize,
    horizon: f64,
    steps: usize,
    out: *mut *mut FraclpProblem,
) -> FraclpStatus {
    guard(|| {
        let g = &unsafe { handle(grid, "grid") }?.inner;
        let y0 = grid_fn(g, unsafe { slice(y0, len, g.len(), "y0") }?)?;
        let z = grid_fn(g, unsafe { slice(z, len, g.len(), "z") }?)?;
        let reaction = match reaction {
            FraclpReaction::Zero => Reaction::Zero,
            FraclpReaction::Cubic => Reaction::Cubic,
        };
        let prob = HeatSourceProblem::new(
            g,
            Diffusivity::Constant(diffusivity),
            reaction,
            y0,
            z,
            horizon,
            steps,
        )?;
        let out = unsafe { out_ptr(out, "out") }?;
        *out = boxed(FraclpProblem { inner: prob.into() });
        Ok(())
    })
}

/// # Safety
/// `u` must hold `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fraclp_problem_eval(
    prob: *const FraclpProblem,
    u: *const f64,
    len: usize,
    out: *mut f64,
) -> FraclpStatus {
    guard(|| {
        let p = &unsafe { handle(prob, "problem") }?.inner;
        let g = p.grid();
        let u = grid_fn(g, unsafe { slice(u, len, g.len(), "u") }?)?;
        *unsafe { out_ptr(out, "out") }? = p.eval(&u)?;
        Ok(())
    })
}

/// L²-Riesz gradient of `F` at `u`.
///
/// # Safety
/// `u` and `grad` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn fraclp_problem_grad(
    prob: *const FraclpProblem,
    u: *const f64,
    grad: *mut f64,
    len: usize,
) -> FraclpStatus {
    guard(|| {
        let p = &unsafe { handle(prob, "problem") }?.inner;
        let g = p.grid();
        let u = grid_fn(g, unsafe { slice(u, len, g.len(), "u") }?)?;
        let dst = unsafe { slice_mut(grad, len, g.len(), "grad") }?;
        dst.copy_from_slice(p.grad(&u)?.as_slice());
        Ok(())
    })
}

/// # Safety
/// `prob` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fraclp_problem_free(prob: *mut FraclpProblem) {
    unsafe { free(prob) }
}

// ---------------------------------------------------------------- solver

/// Mirror of the solver parameters; start from
/// [`fraclp_solver_config_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct FraclpSolverConfig {
    pub alpha: f64,
    pub beta_reg: f64,
    pub p: f64,
    pub eps0: f64,
    pub eps_decay: f64,
    pub eps_min: f64,
    pub l_tilde: f64,
    pub bt_growth: f64,
    pub max_outer: usize,
    pub tol_step: f64,
    pub tol_cg: f64,
    pub max_bt_trials: usize,
}

impl From<SolverConfig> for FraclpSolverConfig {
    fn from(c: SolverConfig) -> Self {
        FraclpSolverConfig {
            alpha: c.alpha,
            beta_reg: c.beta_reg,
            p: c.p,
            eps0: c.eps0,
            eps_decay: c.eps_decay,
            eps_min: c.eps_min,
            l_tilde: c.l_tilde,
            bt_growth: c.bt_growth,
            max_outer: c.max_outer,
            tol_step: c.tol_step,
            tol_cg: c.tol_cg,
            max_bt_trials: c.max_bt_trials,
        }
    }
}

impl From<FraclpSolverConfig> for SolverConfig {
    fn from(c: FraclpSolverConfig) -> Self {
        SolverConfig {
            alpha: c.alpha,
            beta_reg: c.beta_reg,
            p: c.p,
            eps0: c.eps0,
            eps_decay: c.eps_decay,
            eps_min: c.eps_min,
            l_tilde: c.l_tilde,
            bt_growth: c.bt_growth,
            max_outer: c.max_outer,
            tol_step: c.tol_step,
            tol_cg: c.tol_cg,
            max_bt_trials: c.max_bt_trials,
        }
    }
}

#[no_mangle]
pub extern "C" fn fraclp_solver_config_default() -> FraclpSolverConfig {
    SolverConfig::default().into()
}

/// One outer iteration, as recorded by the solver.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct FraclpIterationRecord {
    pub k: usize,
    pub eps_k: f64,
    pub l_k: f64,
    pub bt_trials: usize,
    pub phi: f64,
    pub phi_next: f64,
    pub step_v: f64,
    pub descent_penalty: f64,
    pub support_fraction: f64,
    pub pairing_lower: f64,
    pub pairing_upper: f64,
    pub pairing_gap: f64,
    pub stationarity_residual: f64,
}

/// Final diagnostics of a run.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct FraclpReport {
    pub converged: bool,
    pub iterations: usize,
    pub phi_initial: f64,
    pub phi_final: f64,
    pub support_fraction: f64,
    pub residual_norm: f64,
    pub residual_scale: f64,
    pub pairing_gap: f64,
}

pub struct FraclpResult {
    inner: RunOutcome,
}

/// Runs the solver. A null `u0` starts from the minimizer without the `L^p`
/// term.
///
/// # Safety
/// Handles must be live and built on the same grid; `u0` is null or holds
/// `len` values; `out` must be a valid location.
#[no_mangle]
pub unsafe extern "C" fn fraclp_solve(
    config: *const FraclpSolverConfig,
    op: *const FraclpOperator,
    prob: *const FraclpProblem,
    u0: *const f64,
    len: usize,
    out: *mut *mut FraclpResult,
) -> FraclpStatus {
    guard(|| {
        let cfg: SolverConfig = (*unsafe { handle(config, "config") }?).into();
        let op = &unsafe { handle(op, "operator") }?.inner;
        let prob = &unsafe { handle(prob, "problem") }?.inner;
        if op.grid() != prob.grid() {
            return Err(fail(
                FraclpStatus::DimensionMismatch,
                "operator and problem are built on different grids",
            ));
        }
        cfg.validate()?;
        let u0 = if u0.is_null() {
            tikhonov_start(&cfg, op, prob)?
        } else {
            grid_fn(op.grid(), unsafe { slice(u0, len, op.grid().len(), "u0") }?)?
        };
        let outcome = run(&cfg, op, prob, &u0).map_err(Error::from)?;
        let out = unsafe { out_ptr(out, "out") }?;
        *out = boxed(FraclpResult { inner: outcome });
        Ok(())
    })
}

/// # Safety
/// `res` must be a live result; `u` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn fraclp_result_solution(res: *const FraclpResult, u: *mut f64, len: usize) -> FraclpStatus {
    guard(|| {
        let r = &unsafe { handle(res, "result") }?.inner;
        let dst = unsafe { slice_mut(u, len, r.u.len(), "u") }?;
        dst.copy_from_slice(r.u.as_slice());
        Ok(())
    })
}

/// Number of iteration records, or 0 for a null handle.
///
/// # Safety
/// `res` must be null or a live result.
#[no_mangle]
pub unsafe extern "C" fn fraclp_result_iterations(res: *const FraclpResult) -> usize {
    unsafe { res.as_ref() }.map_or(0, |r| r.inner.records.len())
}

/// # Safety
/// `res` must be a live result; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fraclp_result_record(
    res: *const FraclpResult,
    k: usize,
    out: *mut FraclpIterationRecord,
) -> FraclpStatus {
    guard(|| {
        let r = &unsafe { handle(res, "result") }?.inner;
        let rec = r.records.get(k).ok_or_else(|| {
            fail(
                FraclpStatus::InvalidArgument,
                format!("record {k} out of range ({} records)", r.records.len()),
            )
        })?;
        *unsafe { out_ptr(out, "out") }? = FraclpIterationRecord {
            k: rec.k,
            eps_k: rec.eps_k,
            l_k: rec.l_k,
            bt_trials: rec.bt_trials,
            phi: rec.phi,
            phi_next: rec.phi_next,
            step_v: rec.step_v,
            descent_penalty: rec.descent_penalty,
            support_fraction: rec.support_fraction,
            pairing_lower: rec.pairing_lower,
            pairing_upper: rec.pairing_upper,
            pairing_gap: rec.pairing_gap,
            stationarity_residual: rec.stationarity_residual,
        };
        Ok(())
    })
}

/// # Safety
/// `res` must be a live result; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fraclp_result_report(res: *const FraclpResult, out: *mut FraclpReport) -> FraclpStatus {
    guard(|| {
        let r = &unsafe { handle(res, "result") }?.inner;
        let last = r.records.last().expect("runs record at least one iteration");
        *unsafe { out_ptr(out, "out") }? = FraclpReport {
            converged: r.converged,
            iterations: r.records.len(),
            phi_initial: r.phi_initial,
            phi_final: last.phi_next,
            support_fraction: last.support_fraction,
            residual_norm: r.report.residual_norm,
            residual_scale: r.report.scale,
            pairing_gap: r.report.pairing_gap,
        };
        Ok(())
    })
}

/// Discrete multiplier of the final stationarity report.
///
/// # Safety
/// `res` must be a live result; `lambda` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn fraclp_result_multiplier(
    res: *const FraclpResult,
    lambda: *mut f64,
    len: usize,
) -> FraclpStatus {
    guard(|| {
        let r = &unsafe { handle(res, "result") }?.inner;
        let src = r.report.lambda.as_slice();
        unsafe { slice_mut(lambda, len, src.len(), "lambda") }?.copy_from_slice(src);
        Ok(())
    })
}

/// # Safety
/// `res` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fraclp_result_free(res: *mut FraclpResult) {
    unsafe { free(res) }
}

// ---------------------------------------------------------------- experiments

/// Runs an experiment file (single run or sweep). `output_dir` may be null
/// to use the directory named in the file.
///
/// # Safety
/// `config_path` must be a NUL-terminated path; `output_dir` null or one.
#[no_mangle]
pub unsafe extern "C" fn fraclp_run_experiment(config_path: *const c_char, output_dir: *const c_char) -> FraclpStatus {
    guard(|| {
        if config_path.is_null() {
            return Err(fail(FraclpStatus::NullPointer, "config_path is null"));
        }
        let to_str = |p: *const c_char, what: &str| {
            // SAFETY: checked non-null; caller guarantees NUL termination.
            unsafe { CStr::from_ptr(p) }
                .to_str()
                .map_err(|_| fail(FraclpStatus::InvalidArgument, format!("{what} is not UTF-8")))
        };
        let cfg = parse_config(Path::new(to_str(config_path, "config_path")?))?;
        let dir = if output_dir.is_null() {
            cfg.output.dir.clone()
        } else {
            to_str(output_dir, "output_dir")?.into()
        };
        if cfg.sweep.is_some() {
            run_sweep(&cfg, &dir)?;
        } else {
            run_single(&cfg, &dir)?;
        }
        Ok(())
    })
}
