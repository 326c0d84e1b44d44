//! Denoise a piecewise-constant signal with the spectral H^{1/2} norm.

use fraclp_core::frac_ops::spectral_operator;
use fraclp_core::grid::make_interval_grid;
use fraclp_core::objective::{ForwardMap, TrackingProblem};
use fraclp_core::solver::{run, tikhonov_start};
use fraclp_core::{GridFunction, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = make_interval_grid(128, 1.0)?;
    let z = GridFunction::from_fn(&grid, |x, _| if (0.3..0.5).contains(&x) { 1.0 } else { 0.0 });

    let op = spectral_operator(&grid, 0.5)?;
    let prob = TrackingProblem::new(&grid, z, ForwardMap::Identity)?;
    let cfg = SolverConfig {
        alpha: 1e-3,
        beta_reg: 0.1,
        tol_step: 1e-6,
        ..SolverConfig::default()
    };
    cfg.validate()?;

    let u0 = tikhonov_start(&cfg, &op, &prob)?;
    let out = run(&cfg, &op, &prob, &u0).map_err(fraclp_core::Error::from)?;
    let last = out.records.last().expect("at least one iteration");
    println!(
        "converged={} iterations={} phi={:.6e} support={:.3}",
        out.converged,
        out.records.len(),
        last.phi_next,
        last.support_fraction
    );
    Ok(())
}
