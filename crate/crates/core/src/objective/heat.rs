//! Identification of a perturbation `u` of the initial state of
//!
//! ```text
//! y_t - div(a grad y) + f(y) = 0 in (0,T) x Omega,   y = 0 on the boundary,
//! y(0) = y0 + u,
//! ```
//!
//! from a terminal observation `z`, with `F(u) = 1/2 ||y(T) - z||^2_{L2}`.
//!
//! Time stepping is IMEX Euler: implicit diffusion, explicit reaction,
//! `(I + dt L_a) y^{m+1} = y^m - dt f(y^m)`. The gradient is the exact
//! transpose of this scheme.

use serde::{Deserialize, Serialize};

use super::Objective;
use crate::grid::{dot, Grid, GridFunction};
use crate::linalg::Tridiagonal;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Diffusivity {
    Constant(f64),
    /// Nodal values; face coefficients are arithmetic means of neighbours,
    /// with the boundary faces taking the adjacent interior value.
    Nodal(GridFunction),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reaction {
    Zero,
    /// `f(y) = y^3 - y`.
    Cubic,
}

impl Reaction {
    #[inline]
    fn value(self, y: f64) -> f64 {
        match self {
            Reaction::Zero => 0.0,
            Reaction::Cubic => y * y * y - y,
        }
    }

    #[inline]
    fn derivative(self, y: f64) -> f64 {
        match self {
            Reaction::Zero => 0.0,
            Reaction::Cubic => 3.0 * y * y - 1.0,
        }
    }
}

/// All time levels `y^0, ..., y^{nt}` of one forward solve.
#[derive(Clone, Debug)]
pub struct HeatTrajectory {
    pub states: Vec<GridFunction>,
    pub dt: f64,
}

impl HeatTrajectory {
    pub fn terminal(&self) -> &GridFunction {
        self.states.last().expect("trajectory has at least one state")
    }
}

#[derive(Clone, Debug)]
pub struct HeatSourceProblem {
    grid: Grid,
    reaction: Reaction,
    y0: GridFunction,
    target: GridFunction,
    horizon: f64,
    steps: usize,
    // I + dt L_a
    step_matrix: Tridiagonal,
    stiffness: (Vec<f64>, Vec<f64>),
}

impl HeatSourceProblem {
    pub fn new(
        grid: &Grid,
        diffusivity: Diffusivity,
        reaction: Reaction,
        y0: GridFunction,
        target: GridFunction,
        horizon: f64,
        steps: usize,
    ) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(Error::InvalidArgument(
                "the heat source problem is implemented on 1-D grids".into(),
            ));
        }
        grid.check(y0.len())?;
        grid.check(target.len())?;
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidArgument(format!("horizon T must be positive, got {horizon}")));
        }
        if steps == 0 {
            return Err(Error::InvalidArgument("need at least one time step".into()));
        }
        let n = grid.n();
        let nodal: Vec<f64> = match &diffusivity {
            Diffusivity::Constant(a) => vec![*a; n],
            Diffusivity::Nodal(a) => {
                grid.check(a.len())?;
                a.as_slice().to_vec()
            }
        };
        if nodal.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::InvalidArgument("diffusivity must be positive".into()));
        }
        // faces 0..=n between global nodes (i, i+1)
        let faces: Vec<f64> = (0..=n)
            .map(|f| {
                let left = nodal[f.saturating_sub(1)];
                let right = nodal[f.min(n - 1)];
                0.5 * (left + right)
            })
            .collect();
        let h2 = grid.h() * grid.h();
        let diag: Vec<f64> = (0..n).map(|i| (faces[i] + faces[i + 1]) / h2).collect();
        let off: Vec<f64> = (1..n).map(|i| -faces[i] / h2).collect();
        let dt = horizon / steps as f64;
        let bdiag: Vec<f64> = diag.iter().map(|d| 1.0 + dt * d).collect();
        let boff: Vec<f64> = off.iter().map(|o| dt * o).collect();
        let step_matrix = Tridiagonal::factor(&boff, &bdiag, &boff)?;
        Ok(HeatSourceProblem {
            grid: grid.clone(),
            reaction,
            y0,
            target,
            horizon,
            steps,
            step_matrix,
            stiffness: (diag, off),
        })
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn reaction(&self) -> Reaction {
        self.reaction
    }

    pub fn target(&self) -> &GridFunction {
        &self.target
    }

    pub fn initial_state(&self) -> &GridFunction {
        &self.y0
    }

    /// Same problem with a different observation.
    pub fn with_target(&self, target: GridFunction) -> Result<Self> {
        self.grid.check(target.len())?;
        Ok(HeatSourceProblem {
            target,
            ..self.clone()
        })
    }

    /// `L_a y` for the 3-point diffusion stencil.
    pub fn diffusion_apply(&self, y: &[f64]) -> Vec<f64> {
        let (diag, off) = &self.stiffness;
        let n = y.len();
        (0..n)
            .map(|i| {
                let mut v = diag[i] * y[i];
                if i > 0 {
                    v += off[i - 1] * y[i - 1];
                }
                if i + 1 < n {
                    v += off[i] * y[i + 1];
                }
                v
            })
            .collect()
    }

    /// IMEX Euler from `y0 + u`.
    pub fn heat_forward(&self, u: &GridFunction) -> Result<HeatTrajectory> {
        self.grid.check(u.len())?;
        let dt = self.dt();
        let mut y: Vec<f64> = self
            .y0
            .as_slice()
            .iter()
            .zip(u.as_slice())
            .map(|(a, b)| a + b)
            .collect();
        let mut states = Vec::with_capacity(self.steps + 1);
        states.push(GridFunction::from_vec_unchecked(y.clone()));
        for _ in 0..self.steps {
            for v in y.iter_mut() {
                *v -= dt * self.reaction.value(*v);
            }
            self.step_matrix.solve_in_place(&mut y);
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("heat forward solve"));
            }
            states.push(GridFunction::from_vec_unchecked(y.clone()));
        }
        Ok(HeatTrajectory { states, dt })
    }

    fn check_trajectory(&self, traj: &HeatTrajectory) -> Result<()> {
        if traj.states.len() != self.steps + 1 || (traj.dt - self.dt()).abs() > 0.0 {
            return Err(Error::InvalidArgument(format!(
                "trajectory has {} states with dt = {}, problem expects {} with dt = {}",
                traj.states.len(),
                traj.dt,
                self.steps + 1,
                self.dt()
            )));
        }
        self.grid.check(traj.states[0].len())
    }

    /// Linearized forward map: the perturbation of `y^{nt}` caused by a
    /// perturbation `dir` of the initial state.
    pub fn heat_tangent(&self, traj: &HeatTrajectory, dir: &GridFunction) -> Result<GridFunction> {
        self.check_trajectory(traj)?;
        self.grid.check(dir.len())?;
        let dt = traj.dt;
        let mut d = dir.as_slice().to_vec();
        for m in 0..self.steps {
            let ym = traj.states[m].as_slice();
            for (di, yi) in d.iter_mut().zip(ym) {
                *di *= 1.0 - dt * self.reaction.derivative(*yi);
            }
            self.step_matrix.solve_in_place(&mut d);
        }
        Ok(GridFunction::from_vec_unchecked(d))
    }

    /// Transpose of [`heat_tangent`](Self::heat_tangent) applied to `seed`.
    pub fn heat_adjoint_seeded(&self, traj: &HeatTrajectory, seed: &GridFunction) -> Result<GridFunction> {
        self.check_trajectory(traj)?;
        self.grid.check(seed.len())?;
        let dt = traj.dt;
        let mut q = seed.as_slice().to_vec();
        for m in (0..self.steps).rev() {
            self.step_matrix.solve_transpose_in_place(&mut q);
            let ym = traj.states[m].as_slice();
            for (qi, yi) in q.iter_mut().zip(ym) {
                *qi *= 1.0 - dt * self.reaction.derivative(*yi);
            }
        }
        Ok(GridFunction::from_vec_unchecked(q))
    }

    /// Adjoint state `q^0` seeded with `q^{nt} = y^{nt} - z`; this is the
    /// L²-Riesz gradient of `F` at the trajectory's control.
    pub fn heat_adjoint(&self, traj: &HeatTrajectory) -> Result<GridFunction> {
        self.check_trajectory(traj)?;
        let seed = self.terminal_residual(traj);
        self.heat_adjoint_seeded(traj, &seed)
    }

    fn terminal_residual(&self, traj: &HeatTrajectory) -> GridFunction {
        GridFunction::from_vec_unchecked(
            traj.terminal()
                .as_slice()
                .iter()
                .zip(self.target.as_slice())
                .map(|(y, z)| y - z)
                .collect(),
        )
    }
}

impl Objective for HeatSourceProblem {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn eval(&self, u: &GridFunction) -> Result<f64> {
        let traj = self.heat_forward(u)?;
        let r = self.terminal_residual(&traj);
        Ok(0.5 * self.grid.weight() * dot(r.as_slice(), r.as_slice()))
    }

    fn grad(&self, u: &GridFunction) -> Result<GridFunction> {
        Ok(self.eval_grad(u)?.1)
    }

    fn eval_grad(&self, u: &GridFunction) -> Result<(f64, GridFunction)> {
        let traj = self.heat_forward(u)?;
        let r = self.terminal_residual(&traj);
        let f = 0.5 * self.grid.weight() * dot(r.as_slice(), r.as_slice());
        let g = self.heat_adjoint_seeded(&traj, &r)?;
        Ok((f, g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_interval_grid;
    use std::f64::consts::PI;

    fn problem(n: usize, steps: usize, reaction: Reaction, y0: GridFunction) -> HeatSourceProblem {
        let g = make_interval_grid(n, 1.0).unwrap();
        HeatSourceProblem::new(
            &g,
            Diffusivity::Constant(1.0),
            reaction,
            y0,
            GridFunction::zeros(&g),
            0.1,
            steps,
        )
        .unwrap()
    }

    #[test]
    fn eigenvector_decays_geometrically() {
        let g = make_interval_grid(20, 1.0).unwrap();
        let mode = FracOpHelper::mode(&g, 2);
        let p = problem(20, 8, Reaction::Zero, mode.0.clone());
        let traj = p.heat_forward(&GridFunction::zeros(&g)).unwrap();
        let factor = 1.0 / (1.0 + p.dt() * mode.1);
        for (m, st) in traj.states.iter().enumerate() {
            let c = factor.powi(m as i32);
            for (a, b) in st.as_slice().iter().zip(mode.0.as_slice()) {
                assert!((a - c * b).abs() < 1e-13);
            }
        }
    }

    struct FracOpHelper;
    impl FracOpHelper {
        /// Discrete sine mode k and its Laplacian eigenvalue.
        fn mode(g: &Grid, k: usize) -> (GridFunction, f64) {
            let op = crate::frac_ops::FracOperator::spectral_any_order(g, 1.0);
            op.spectral_mode(k).unwrap()
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = make_interval_grid(10, 1.0).unwrap();
        let p = problem(10, 5, Reaction::Cubic, GridFunction::zeros(&g));
        let traj = p.heat_forward(&GridFunction::zeros(&g)).unwrap();
        assert!(traj.states.iter().all(|s| s.as_slice().iter().all(|v| *v == 0.0)));
        assert_eq!(p.eval(&GridFunction::zeros(&g)).unwrap(), 0.0);
    }

    #[test]
    fn separation_of_variables_limit() {
        // y0 = sin(pi x), a = 1: y(T) = exp(-pi^2 T) sin(pi x)
        let mut errs = Vec::new();
        for (n, steps) in [(31, 50), (63, 200), (127, 800)] {
            let g = make_interval_grid(n, 1.0).unwrap();
            let y0 = GridFunction::from_fn(&g, |x, _| (PI * x).sin());
            let p = problem(n, steps, Reaction::Zero, y0);
            let traj = p.heat_forward(&GridFunction::zeros(&g)).unwrap();
            let decay = (-PI * PI * 0.1).exp();
            let err = traj
                .terminal()
                .as_slice()
                .iter()
                .enumerate()
                .map(|(i, v)| (v - decay * (PI * g.coords(i).0).sin()).abs())
                .fold(0.0, f64::max);
            errs.push(err);
        }
        assert!(errs[0] > errs[1] && errs[1] > errs[2]);
        assert!(errs[2] < 2e-3);
    }

    #[test]
    fn adjoint_uses_the_symmetric_factorization() {
        let g = make_interval_grid(15, 1.0).unwrap();
        let p = problem(15, 3, Reaction::Zero, GridFunction::zeros(&g));
        let b = GridFunction::from_fn(&g, |x, _| x * (1.0 - x) + 0.3 * (9.0 * x).cos());
        let mut a = b.as_slice().to_vec();
        let mut t = b.as_slice().to_vec();
        p.step_matrix.solve_in_place(&mut a);
        p.step_matrix.solve_transpose_in_place(&mut t);
        for (x, y) in a.iter().zip(&t) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn matching_observation_gives_zero_gradient() {
        let g = make_interval_grid(25, 1.0).unwrap();
        let y0 = GridFunction::from_fn(&g, |x, _| (PI * x).sin());
        let p = problem(25, 10, Reaction::Cubic, y0);
        let u = GridFunction::from_fn(&g, |x, _| if (0.3..0.4).contains(&x) { 1.0 } else { 0.0 });
        let traj = p.heat_forward(&u).unwrap();
        let p = p.with_target(traj.terminal().clone()).unwrap();
        let gr = p.grad(&u).unwrap();
        assert!(gr.as_slice().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn nodal_diffusivity_is_symmetric() {
        let g = make_interval_grid(12, 1.0).unwrap();
        let a = GridFunction::from_fn(&g, |x, _| 1.0 + x * x);
        let p = HeatSourceProblem::new(
            &g,
            Diffusivity::Nodal(a),
            Reaction::Zero,
            GridFunction::zeros(&g),
            GridFunction::zeros(&g),
            0.05,
            4,
        )
        .unwrap();
        let u = GridFunction::from_fn(&g, |x, _| x.sin());
        let v = GridFunction::from_fn(&g, |x, _| (3.0 * x).cos());
        let lu = p.diffusion_apply(u.as_slice());
        let lv = p.diffusion_apply(v.as_slice());
        let a = dot(&lu, v.as_slice());
        let b = dot(&lv, u.as_slice());
        assert!((a - b).abs() < 1e-12 * a.abs());
        let bad = HeatSourceProblem::new(
            &g,
            Diffusivity::Constant(-1.0),
            Reaction::Zero,
            GridFunction::zeros(&g),
            GridFunction::zeros(&g),
            0.05,
            4,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn constant_diffusion_matches_laplacian() {
        let g = make_interval_grid(9, 1.0).unwrap();
        let p = problem(9, 2, Reaction::Zero, GridFunction::zeros(&g));
        let (e, lam) = FracOpHelper::mode(&g, 4);
        let le = p.diffusion_apply(e.as_slice());
        for (a, b) in le.iter().zip(e.as_slice()) {
            assert!((a - lam * b).abs() < 1e-10 * lam);
        }
    }

    #[test]
    fn mismatched_trajectory_rejected() {
        let g = make_interval_grid(10, 1.0).unwrap();
        let p = problem(10, 5, Reaction::Zero, GridFunction::zeros(&g));
        let q = problem(10, 6, Reaction::Zero, GridFunction::zeros(&g));
        let traj = q.heat_forward(&GridFunction::zeros(&g)).unwrap();
        assert!(p.heat_adjoint(&traj).is_err());
    }
}
