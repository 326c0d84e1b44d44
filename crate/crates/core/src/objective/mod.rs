//! The smooth data term `F`.
//!
//! Gradients are L²-Riesz vectors with respect to the lumped product: the
//! directional derivative of `F` at `u` in direction `h` is
//! `<grad(u), h>_{L2} = w * grad(u) . h`.

mod heat;
mod tracking;

pub use heat::{Diffusivity, HeatSourceProblem, HeatTrajectory, Reaction};
pub use tracking::{ForwardMap, TrackingProblem};

use crate::grid::{Grid, GridFunction};
use crate::Result;

/// A continuously differentiable data term bounded below.
pub trait Objective {
    fn grid(&self) -> &Grid;

    fn eval(&self, u: &GridFunction) -> Result<f64>;

    /// L²-Riesz gradient.
    fn grad(&self, u: &GridFunction) -> Result<GridFunction>;

    /// Value and gradient together; implementations may share work.
    fn eval_grad(&self, u: &GridFunction) -> Result<(f64, GridFunction)> {
        Ok((self.eval(u)?, self.grad(u)?))
    }
}

/// The data terms shipped with the crate.
#[derive(Clone, Debug)]
pub enum ObjectiveProblem {
    Tracking(TrackingProblem),
    HeatSource(HeatSourceProblem),
}

impl ObjectiveProblem {
    pub fn name(&self) -> &'static str {
        match self {
            ObjectiveProblem::Tracking(_) => "tracking",
            ObjectiveProblem::HeatSource(_) => "heat_source",
        }
    }
}

impl Objective for ObjectiveProblem {
    fn grid(&self) -> &Grid {
        match self {
            ObjectiveProblem::Tracking(p) => p.grid(),
            ObjectiveProblem::HeatSource(p) => p.grid(),
        }
    }

    fn eval(&self, u: &GridFunction) -> Result<f64> {
        match self {
            ObjectiveProblem::Tracking(p) => p.eval(u),
            ObjectiveProblem::HeatSource(p) => p.eval(u),
        }
    }

    fn grad(&self, u: &GridFunction) -> Result<GridFunction> {
        match self {
            ObjectiveProblem::Tracking(p) => p.grad(u),
            ObjectiveProblem::HeatSource(p) => p.grad(u),
        }
    }

    fn eval_grad(&self, u: &GridFunction) -> Result<(f64, GridFunction)> {
        match self {
            ObjectiveProblem::Tracking(p) => p.eval_grad(u),
            ObjectiveProblem::HeatSource(p) => p.eval_grad(u),
        }
    }
}

impl From<TrackingProblem> for ObjectiveProblem {
    fn from(p: TrackingProblem) -> Self {
        ObjectiveProblem::Tracking(p)
    }
}

impl From<HeatSourceProblem> for ObjectiveProblem {
    fn from(p: HeatSourceProblem) -> Self {
        ObjectiveProblem::HeatSource(p)
    }
}
