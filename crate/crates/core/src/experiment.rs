//! Experiment orchestration: building problems from a config, single runs,
//! sweeps and plot-ready CSV export.
//!
//! A run directory holds `iterations.csv`, `solution.csv`, `report.json` and
//! `manifest.json` (and `operator.csv` when requested). Nothing written
//! depends on wall-clock time or thread scheduling, so a fixed config and seed
//! give byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, InitialGuess, InitialState, ObjectiveKind, Truth};
use crate::frac_ops::{integral_stiffness_capped, spectral_operator, FracOperator, OperatorKind};
use crate::grid::{fmt_f64, lp_pseudonorm, make_interval_grid, make_rect_grid, Grid, GridFunction};
use crate::objective::{
    Diffusivity, ForwardMap, HeatSourceProblem, ObjectiveProblem, TrackingProblem,
};
use crate::solver::{run, tikhonov_start, IterationRecord, RunOutcome};
use crate::{Error, Result};

pub const ITERATIONS_FILE: &str = "iterations.csv";
pub const SOLUTION_FILE: &str = "solution.csv";
pub const REPORT_FILE: &str = "report.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SUMMARY_FILE: &str = "summary.csv";

/// Everything a run needs, built from a config.
#[derive(Clone, Debug)]
pub struct Setup {
    pub grid: Grid,
    pub op: FracOperator,
    pub problem: ObjectiveProblem,
    /// Synthetic ground truth, when the measurement was generated.
    pub truth: Option<GridFunction>,
    pub measurement: GridFunction,
}

pub fn build_grid(cfg: &ExperimentConfig) -> Result<Grid> {
    let g = &cfg.grid;
    if g.dim == 2 {
        make_rect_grid(g.n, g.length, g.n_y, g.length_y)
    } else {
        make_interval_grid(g.n, g.length)
    }
}

pub fn truth_function(grid: &Grid, truth: Truth) -> GridFunction {
    let lx = grid.length();
    let ly = grid.y_axis().map_or(1.0, |a| a.length());
    let two_d = grid.dim() == 2;
    GridFunction::from_fn(grid, |x, y| {
        let (t, r) = (x / lx, y / ly);
        match truth {
            Truth::Blocks => {
                let v = if (0.15..0.3).contains(&t) {
                    1.0
                } else if (0.45..0.55).contains(&t) {
                    -0.7
                } else if (0.7..0.78).contains(&t) {
                    0.5
                } else {
                    0.0
                };
                if two_d && !(0.25..0.75).contains(&r) {
                    0.0
                } else {
                    v
                }
            }
            Truth::Spikes => {
                let bump = |c: f64| (-((t - c) / 0.02).powi(2)).exp();
                let v = bump(0.25) - 0.8 * bump(0.5) + 0.6 * bump(0.8);
                if two_d {
                    v * (-((r - 0.5) / 0.05).powi(2)).exp()
                } else {
                    v
                }
            }
            Truth::Sine => {
                let v = (std::f64::consts::PI * t).sin();
                if two_d {
                    v * (std::f64::consts::PI * r).sin()
                } else {
                    v
                }
            }
            Truth::Zero => 0.0,
        }
    })
}

/// Adds `N(0, sigma^2)` noise, one draw per node in index order.
pub fn add_noise(u: &mut GridFunction, sigma: f64, seed: u64) -> Result<()> {
    if sigma == 0.0 {
        return Ok(());
    }
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| Error::InvalidArgument(format!("noise level {sigma}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in u.as_mut_slice() {
        *v += normal.sample(&mut rng);
    }
    Ok(())
}

pub fn build_operator(cfg: &ExperimentConfig, grid: &Grid) -> Result<FracOperator> {
    match cfg.operator.kind {
        OperatorKind::Spectral => spectral_operator(grid, cfg.operator.s),
        OperatorKind::Integral => integral_stiffness_capped(grid, cfg.operator.s, cfg.operator.max_n),
    }
}

/// Builds grid, operator and data term; synthesizes the measurement from the
/// configured truth unless `data.z_path` is set.
pub fn build_setup(cfg: &ExperimentConfig) -> Result<Setup> {
    let grid = build_grid(cfg).map_err(|e| e.in_stage("grid"))?;
    let op = build_operator(cfg, &grid).map_err(|e| e.in_stage("operator"))?;
    let data = |e: Error| e.in_stage("data");
    let ob = &cfg.objective;
    let (truth, measurement, problem) = match ob.kind {
        ObjectiveKind::Tracking => {
            let map = match ob.blur_width {
                Some(w) => ForwardMap::gaussian_blur(&grid, w).map_err(data)?,
                None => ForwardMap::Identity,
            };
            let (truth, z) = match &cfg.data.z_path {
                Some(p) => (None, GridFunction::read_csv(&grid, p).map_err(data)?),
                None => {
                    let t = truth_function(&grid, cfg.data.truth);
                    let mut z = GridFunction::new(&grid, map.apply(t.as_slice())).map_err(data)?;
                    add_noise(&mut z, cfg.data.noise, cfg.data.seed).map_err(data)?;
                    (Some(t), z)
                }
            };
            let prob = TrackingProblem::new(&grid, z.clone(), map).map_err(data)?;
            (truth, z, ObjectiveProblem::from(prob))
        }
        ObjectiveKind::HeatSource => {
            let diffusivity = match &ob.diffusivity_path {
                Some(p) => Diffusivity::Nodal(GridFunction::read_csv(&grid, p).map_err(data)?),
                None => Diffusivity::Constant(ob.diffusivity),
            };
            let y0 = match (&ob.y0_path, ob.y0) {
                (Some(p), _) => GridFunction::read_csv(&grid, p).map_err(data)?,
                (None, InitialState::Zero) => GridFunction::zeros(&grid),
                (None, InitialState::Sine) => truth_function(&grid, Truth::Sine),
            };
            let base = HeatSourceProblem::new(
                &grid,
                diffusivity,
                ob.reaction,
                y0,
                GridFunction::zeros(&grid),
                ob.horizon,
                ob.time_steps,
            )
            .map_err(data)?;
            let (truth, z) = match &cfg.data.z_path {
                Some(p) => (None, GridFunction::read_csv(&grid, p).map_err(data)?),
                None => {
                    let t = truth_function(&grid, cfg.data.truth);
                    let traj = base.heat_forward(&t).map_err(data)?;
                    let mut z = traj.terminal().clone();
                    add_noise(&mut z, cfg.data.noise, cfg.data.seed).map_err(data)?;
                    (Some(t), z)
                }
            };
            let prob = base.with_target(z.clone()).map_err(data)?;
            (truth, z, ObjectiveProblem::from(prob))
        }
    };
    Ok(Setup {
        grid,
        op,
        problem,
        truth,
        measurement,
    })
}

/// Initial guess selected by `data.init`.
pub fn initial_guess(cfg: &ExperimentConfig, setup: &Setup) -> Result<GridFunction> {
    match cfg.data.init {
        InitialGuess::Zero => Ok(GridFunction::zeros(&setup.grid)),
        InitialGuess::Tikhonov => tikhonov_start(&cfg.solver, &setup.op, &setup.problem),
    }
}

/// Final state of one run, as written to `report.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub objective: String,
    pub operator: OperatorKind,
    pub converged: bool,
    pub iterations: usize,
    pub phi_initial: f64,
    pub phi_final: f64,
    pub eps_final_iteration: f64,
    pub support_fraction: f64,
    pub lp_pseudonorm: f64,
    pub residual_norm: f64,
    pub residual_scale: f64,
    pub pairing_gap: f64,
    pub lambda: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub package: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub files: Vec<String>,
}

/// Hash of the config with the output directory cleared, so the same
/// experiment hashes identically wherever it is written.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let mut c = cfg.clone();
    c.output.dir = PathBuf::new();
    let digest = Sha256::digest(c.to_toml_string().as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn records_csv(records: &[IterationRecord]) -> String {
    let mut s = String::from(IterationRecord::CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Result of a completed run, with the data shown in sweep summaries.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub outcome: RunOutcome,
    pub report: RunReport,
}

/// Runs one (non-sweep) config and writes its files into `dir`.
pub fn run_single(cfg: &ExperimentConfig, dir: &Path) -> Result<RunSummary> {
    if cfg.sweep.is_some() {
        return Err(Error::Config(vec![
            "config has a [sweep] section; run it with the sweep command".into(),
        ]));
    }
    cfg.validate()?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e).in_stage("output"))?;
    let setup = build_setup(cfg)?;
    let out = |e: Error| e.in_stage("output");
    let mut files = vec![ITERATIONS_FILE, SOLUTION_FILE, REPORT_FILE];
    if cfg.operator.dump_matrix {
        setup
            .op
            .write_matrix_csv(&dir.join("operator.csv"))
            .map_err(out)?;
        files.push("operator.csv");
    }
    let u0 = initial_guess(cfg, &setup).map_err(|e| e.in_stage("initial guess"))?;
    let outcome = match run(&cfg.solver, &setup.op, &setup.problem, &u0) {
        Ok(o) => o,
        Err(fail) => {
            // keep the partial history for inspection
            write_file(&dir.join(ITERATIONS_FILE), records_csv(&fail.records)).map_err(out)?;
            return Err(fail.error.in_stage("solve"));
        }
    };
    let last = outcome.records.last().expect("at least one record");
    let report = RunReport {
        objective: setup.problem.name().to_string(),
        operator: cfg.operator.kind,
        converged: outcome.converged,
        iterations: outcome.records.len(),
        phi_initial: outcome.phi_initial,
        phi_final: last.phi_next,
        eps_final_iteration: last.eps_k,
        support_fraction: last.support_fraction,
        lp_pseudonorm: lp_pseudonorm(&setup.grid, &outcome.u, cfg.solver.p)?,
        residual_norm: outcome.report.residual_norm,
        residual_scale: outcome.report.scale,
        pairing_gap: outcome.report.pairing_gap,
        lambda: outcome.report.lambda.as_slice().to_vec(),
    };
    write_file(&dir.join(ITERATIONS_FILE), records_csv(&outcome.records)).map_err(out)?;
    outcome
        .u
        .write_csv(&setup.grid, &dir.join(SOLUTION_FILE))
        .map_err(out)?;
    write_file(&dir.join(REPORT_FILE), to_json(&report)).map_err(out)?;
    files.push(MANIFEST_FILE);
    let manifest = Manifest {
        package: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: config_hash(cfg),
        seed: cfg.data.seed,
        files: files.iter().map(|s| s.to_string()).collect(),
    };
    write_file(&dir.join(MANIFEST_FILE), to_json(&manifest)).map_err(out)?;
    Ok(RunSummary {
        dir: dir.to_path_buf(),
        outcome,
        report,
    })
}

/// Worker count for sweeps: `FRACLP_THREADS` if set to a positive integer.
pub fn sweep_threads() -> Option<usize> {
    std::env::var("FRACLP_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs every sweep member in `dir/<label>` and writes `dir/summary.csv`.
///
/// Members run in parallel. If any member fails, the summary is still
/// written (failed rows carry the error) and the first error is returned.
pub fn run_sweep(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<RunSummary>> {
    cfg.validate()?;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config(vec!["config has no [sweep] section".into()]))?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e).in_stage("output"))?;
    let specs = cfg.expand();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = sweep_threads() {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let results: Vec<Result<RunSummary>> = pool.install(|| {
        specs
            .par_iter()
            .map(|spec| run_single(&spec.config, &dir.join(&spec.label)))
            .collect()
    });

    let mut csv = String::from(
        "label,value,phi_final,support_fraction,pairing_gap,converged,iterations,status\n",
    );
    for ((spec, res), value) in specs.iter().zip(&results).zip(&sweep.values) {
        match res {
            Ok(s) => {
                let r = &s.report;
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{},ok",
                    spec.label,
                    fmt_f64(*value),
                    fmt_f64(r.phi_final),
                    fmt_f64(r.support_fraction),
                    fmt_f64(r.pairing_gap),
                    r.converged,
                    r.iterations
                );
            }
            Err(e) => {
                let msg = e.to_string().replace(['\n', ','], " ");
                let _ = writeln!(csv, "{},{},,,,,,failed: {msg}", spec.label, fmt_f64(*value));
            }
        }
    }
    write_file(&dir.join(SUMMARY_FILE), csv).map_err(|e| e.in_stage("output"))?;
    results.into_iter().collect()
}

/// Runs a config as a sweep or a single run, into `cfg.output.dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunSummary>> {
    if cfg.sweep.is_some() {
        run_sweep(cfg, &cfg.output.dir)
    } else {
        run_single(cfg, &cfg.output.dir).map(|s| vec![s])
    }
}

fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::parse(path, format!("{other:?}")),
    })?;
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::parse(path, e))?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| Error::parse(path, format!("{f:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((headers, rows))
}

fn column(headers: &[String], name: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::parse(path, format!("missing column {name}")))
}

/// Writes `plot_phi.csv`, `plot_step.csv`, `plot_u.csv` and
/// `plot_support.csv` into a finished run directory.
///
/// The Φ history lists `phi` for every record followed by the final
/// `phi_next`; the support mask uses the threshold of the last iteration.
pub fn emit_plotdata(run_dir: &Path) -> Result<Vec<PathBuf>> {
    let it_path = run_dir.join(ITERATIONS_FILE);
    let sol_path = run_dir.join(SOLUTION_FILE);
    for p in [&it_path, &sol_path] {
        if !p.is_file() {
            return Err(Error::InvalidArgument(format!(
                "{} is not a completed run directory: {} is missing",
                run_dir.display(),
                p.file_name().unwrap_or_default().to_string_lossy()
            )));
        }
    }
    let (h, rows) = read_table(&it_path)?;
    if rows.is_empty() {
        return Err(Error::parse(&it_path, "no iteration records"));
    }
    let (ck, cphi, cnext, cstep, ceps) = (
        column(&h, "k", &it_path)?,
        column(&h, "phi", &it_path)?,
        column(&h, "phi_next", &it_path)?,
        column(&h, "step_V", &it_path)?,
        column(&h, "eps_k", &it_path)?,
    );
    let mut phi = String::from("k,phi\n");
    let mut step = String::from("k,step_V\n");
    for r in &rows {
        let _ = writeln!(phi, "{},{}", r[ck], fmt_f64(r[cphi]));
        let _ = writeln!(step, "{},{}", r[ck], fmt_f64(r[cstep]));
    }
    let last = rows.last().expect("non-empty");
    let _ = writeln!(phi, "{},{}", last[ck] + 1.0, fmt_f64(last[cnext]));
    let eps = last[ceps];

    let (sh, srows) = read_table(&sol_path)?;
    let ncoord = sh.len().saturating_sub(1);
    if ncoord == 0 || srows.is_empty() {
        return Err(Error::parse(&sol_path, "no solution values"));
    }
    let coords = sh[..ncoord].join(",");
    let mut u = format!("{coords},u\n");
    let mut support = format!("{coords},support\n");
    for r in &srows {
        let xs: Vec<String> = r[..ncoord].iter().map(|v| fmt_f64(*v)).collect();
        let xs = xs.join(",");
        let v = r[ncoord];
        let _ = writeln!(u, "{xs},{}", fmt_f64(v));
        let _ = writeln!(support, "{xs},{}", u8::from(v.abs() > eps));
    }

    let mut written = Vec::new();
    for (name, body) in [
        ("plot_phi.csv", phi),
        ("plot_step.csv", step),
        ("plot_u.csv", u),
        ("plot_support.csv", support),
    ] {
        let p = run_dir.join(name);
        write_file(&p, body)?;
        written.push(p);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_is_seeded() {
        let g = make_interval_grid(20, 1.0).unwrap();
        let mut a = GridFunction::zeros(&g);
        let mut b = GridFunction::zeros(&g);
        add_noise(&mut a, 0.1, 7).unwrap();
        add_noise(&mut b, 0.1, 7).unwrap();
        assert_eq!(a, b);
        let mut c = GridFunction::zeros(&g);
        add_noise(&mut c, 0.1, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn blocks_truth_is_sparse() {
        let g = make_interval_grid(100, 1.0).unwrap();
        let t = truth_function(&g, Truth::Blocks);
        let nz = t.as_slice().iter().filter(|v| **v != 0.0).count();
        assert!(nz > 10 && nz < 50, "{nz}");
    }

    #[test]
    fn hash_ignores_output_dir() {
        let mut a = ExperimentConfig::default();
        let h = config_hash(&a);
        a.output.dir = "elsewhere".into();
        assert_eq!(config_hash(&a), h);
        a.data.seed = 3;
        assert_ne!(config_hash(&a), h);
    }
}
