//! Experiment files.
//!
//! An experiment is one TOML document with the sections `[grid]`,
//! `[operator]`, `[objective]`, `[data]`, `[solver]`, `[output]` and an
//! optional `[sweep]`. Every key has a default, so an empty file is a valid
//! experiment; unknown keys are rejected. Relative data paths are resolved
//! against the directory of the config file when it is parsed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::frac_ops::{OperatorKind, DEFAULT_INTEGRAL_MAX_N};
use crate::objective::Reaction;
use crate::solver::SolverConfig;
use crate::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridSection,
    pub operator: OperatorSection,
    pub objective: ObjectiveSection,
    pub data: DataSection,
    pub solver: SolverConfig,
    pub output: OutputSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub length: f64,
    pub dim: usize,
    /// Second direction, used when `dim = 2`.
    pub n_y: usize,
    pub length_y: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            n: 128,
            length: 1.0,
            dim: 1,
            n_y: 32,
            length_y: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorSection {
    pub kind: OperatorKind,
    pub s: f64,
    /// Largest `n` accepted by the dense integral assembly.
    pub max_n: usize,
    /// Also write the Gram matrix as `operator.csv` (small grids only).
    pub dump_matrix: bool,
}

impl Default for OperatorSection {
    fn default() -> Self {
        OperatorSection {
            kind: OperatorKind::Spectral,
            s: 0.5,
            max_n: DEFAULT_INTEGRAL_MAX_N,
            dump_matrix: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    Tracking,
    HeatSource,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Zero,
    /// `sin(pi x / L)`.
    Sine,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObjectiveSection {
    pub kind: ObjectiveKind,
    /// Tracking only: Gaussian blur width of `K`; absent means `K = I`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blur_width: Option<f64>,
    /// Heat only: constant diffusivity, unless `diffusivity_path` is given.
    pub diffusivity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diffusivity_path: Option<PathBuf>,
    pub reaction: Reaction,
    pub horizon: f64,
    pub time_steps: usize,
    pub y0: InitialState,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y0_path: Option<PathBuf>,
}

impl Default for ObjectiveSection {
    fn default() -> Self {
        ObjectiveSection {
            kind: ObjectiveKind::Tracking,
            blur_width: None,
            diffusivity: 1.0,
            diffusivity_path: None,
            reaction: Reaction::Zero,
            horizon: 0.05,
            time_steps: 50,
            y0: InitialState::Zero,
            y0_path: None,
        }
    }
}

/// Ground truth used to synthesize the measurement when no `z_path` is given.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truth {
    /// Piecewise constant with three plateaus.
    Blocks,
    /// Three narrow bumps.
    Spikes,
    Sine,
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialGuess {
    /// Minimizer of the problem without the `L^p` term.
    Tikhonov,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    /// Measurement CSV; overrides `truth`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_path: Option<PathBuf>,
    pub truth: Truth,
    /// Standard deviation of the additive Gaussian noise.
    pub noise: f64,
    pub seed: u64,
    pub init: InitialGuess,
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            z_path: None,
            truth: Truth::Blocks,
            noise: 0.05,
            seed: 0,
            init: InitialGuess::Tikhonov,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("fraclp_out"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: String,
    pub values: Vec<f64>,
}

/// Parameters a sweep may vary.
pub const SWEEP_PARAMETERS: &[&str] = &[
    "alpha",
    "beta_reg",
    "p",
    "eps0",
    "eps_decay",
    "eps_min",
    "l_tilde",
    "bt_growth",
    "tol_step",
    "tol_cg",
    "s",
    "noise",
    "blur_width",
    "n",
    "seed",
];

/// One member of an expanded experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    /// Subdirectory name, e.g. `beta_reg_0.1`.
    pub label: String,
    pub config: ExperimentConfig,
}

fn integral_value(name: &str, v: f64) -> std::result::Result<u64, String> {
    if v >= 0.0 && v.fract() == 0.0 && v < 2f64.powi(53) {
        Ok(v as u64)
    } else {
        Err(format!("sweep: {name} needs non-negative integer values, got {v}"))
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(vec![e.message().to_string()]))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Sets one sweepable parameter.
    pub fn set_parameter(&mut self, name: &str, v: f64) -> std::result::Result<(), String> {
        let s = &mut self.solver;
        match name {
            "alpha" => s.alpha = v,
            "beta_reg" => s.beta_reg = v,
            "p" => s.p = v,
            "eps0" => s.eps0 = v,
            "eps_decay" => s.eps_decay = v,
            "eps_min" => s.eps_min = v,
            "l_tilde" => s.l_tilde = v,
            "bt_growth" => s.bt_growth = v,
            "tol_step" => s.tol_step = v,
            "tol_cg" => s.tol_cg = v,
            "s" => self.operator.s = v,
            "noise" => self.data.noise = v,
            "blur_width" => self.objective.blur_width = Some(v),
            "n" => self.grid.n = integral_value(name, v)? as usize,
            "seed" => self.data.seed = integral_value(name, v)?,
            _ => {
                return Err(format!(
                    "sweep.parameter '{name}' is not sweepable (one of {})",
                    SWEEP_PARAMETERS.join(", ")
                ))
            }
        }
        Ok(())
    }

    /// Every violated constraint, each naming its key.
    pub fn violations(&self) -> Vec<String> {
        let mut v: Vec<String> = self
            .solver
            .violations()
            .into_iter()
            .map(|m| format!("solver: {m}"))
            .collect();
        let mut need = |ok: bool, msg: &str| {
            if !ok {
                v.push(msg.to_string());
            }
        };
        let g = &self.grid;
        need(g.n >= 2, "grid.n must be >= 2");
        need(g.length > 0.0 && g.length.is_finite(), "grid.length must be > 0");
        need(g.dim == 1 || g.dim == 2, "grid.dim must be 1 or 2");
        if g.dim == 2 {
            need(g.n_y >= 2, "grid.n_y must be >= 2");
            need(g.length_y > 0.0 && g.length_y.is_finite(), "grid.length_y must be > 0");
        }

        let op = &self.operator;
        need(op.s > 0.0 && op.s < 1.0, "operator.s must lie in (0,1)");
        if op.kind == OperatorKind::Integral {
            need(g.dim == 1, "operator.kind = integral requires grid.dim = 1");
            need(g.n <= op.max_n, "grid.n exceeds operator.max_n for the integral operator");
        }
        if op.dump_matrix {
            let len = if g.dim == 2 { g.n * g.n_y } else { g.n };
            need(len <= 64, "operator.dump_matrix needs at most 64 grid nodes");
        }

        let ob = &self.objective;
        if let Some(w) = ob.blur_width {
            need(w > 0.0 && w.is_finite(), "objective.blur_width must be > 0");
        }
        if ob.kind == ObjectiveKind::HeatSource {
            need(g.dim == 1, "objective.kind = heat_source requires grid.dim = 1");
            need(ob.blur_width.is_none(), "objective.blur_width applies to tracking only");
            need(ob.horizon > 0.0 && ob.horizon.is_finite(), "objective.horizon must be > 0");
            need(ob.time_steps >= 1, "objective.time_steps must be >= 1");
            need(
                ob.diffusivity > 0.0 && ob.diffusivity.is_finite(),
                "objective.diffusivity must be > 0",
            );
        }
        for (key, path) in [
            ("objective.diffusivity_path", &ob.diffusivity_path),
            ("objective.y0_path", &ob.y0_path),
            ("data.z_path", &self.data.z_path),
        ] {
            if let Some(p) = path {
                if !p.is_file() {
                    v.push(format!("{key}: file {} does not exist", p.display()));
                }
            }
        }
        let d = &self.data;
        if !(d.noise >= 0.0 && d.noise.is_finite()) {
            v.push("data.noise must be >= 0".into());
        }

        if let Some(sw) = &self.sweep {
            if sw.values.is_empty() {
                v.push("sweep.values must not be empty".into());
            }
            if !SWEEP_PARAMETERS.contains(&sw.parameter.as_str()) {
                v.push(format!(
                    "sweep.parameter '{}' is not sweepable (one of {})",
                    sw.parameter,
                    SWEEP_PARAMETERS.join(", ")
                ));
            } else {
                for &val in &sw.values {
                    let mut member = self.clone();
                    member.sweep = None;
                    match member.set_parameter(&sw.parameter, val) {
                        Err(m) => v.push(m),
                        Ok(()) => v.extend(
                            member
                                .violations()
                                .into_iter()
                                .map(|m| format!("sweep {} = {val}: {m}", sw.parameter)),
                        ),
                    }
                }
            }
        }
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

    /// Single run specs: one per sweep value, or just this config.
    pub fn expand(&self) -> Vec<RunSpec> {
        match &self.sweep {
            None => vec![RunSpec {
                label: String::new(),
                config: self.clone(),
            }],
            Some(sw) => sw
                .values
                .iter()
                .map(|&val| {
                    let mut config = self.clone();
                    config.sweep = None;
                    // values were checked by validate
                    let _ = config.set_parameter(&sw.parameter, val);
                    RunSpec {
                        label: format!("{}_{}", sw.parameter, val),
                        config,
                    }
                })
                .collect(),
        }
    }

    fn resolve_paths(&mut self, base: &Path) {
        for p in [
            &mut self.objective.diffusivity_path,
            &mut self.objective.y0_path,
            &mut self.data.z_path,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

/// Reads, resolves and validates an experiment file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg = ExperimentConfig::from_toml_str(&text).map_err(|e| match e {
        Error::Config(msgs) => Error::Config(
            msgs.into_iter()
                .map(|m| format!("{}: {m}", path.display()))
                .collect(),
        ),
        other => other,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    cfg.resolve_paths(base);
    cfg.validate()?;
    Ok(cfg)
}

/// The default experiment as TOML, for help output.
pub fn documented_defaults() -> String {
    ExperimentConfig::default().to_toml_string()
}
