use nalgebra::DMatrix;

use super::Objective;
use crate::grid::{dot, Grid, GridFunction};
use crate::{Error, Result};

/// The linear map `K` in `F(u) = 1/2 ||K u - z||^2`.
#[derive(Clone, Debug)]
pub enum ForwardMap {
    Identity,
    Dense(DMatrix<f64>),
}

impl ForwardMap {
    /// Discrete Gaussian convolution `(K u)_i = sum_j w G_width(x_i - x_j) u_j`.
    pub fn gaussian_blur(grid: &Grid, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "blur width must be positive, got {width}"
            )));
        }
        let n = grid.len();
        let norm = grid.weight() / (2.0 * std::f64::consts::PI * width * width).powf(0.5 * grid.dim() as f64);
        let k = DMatrix::from_fn(n, n, |i, j| {
            let (xi, yi) = grid.coords(i);
            let (xj, yj) = grid.coords(j);
            let r2 = (xi - xj).powi(2) + (yi - yj).powi(2);
            norm * (-0.5 * r2 / (width * width)).exp()
        });
        Ok(ForwardMap::Dense(k))
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        match self {
            ForwardMap::Identity => u.to_vec(),
            ForwardMap::Dense(k) => (k * nalgebra::DVector::from_column_slice(u)).as_slice().to_vec(),
        }
    }

    fn apply_transpose(&self, r: &[f64]) -> Vec<f64> {
        match self {
            ForwardMap::Identity => r.to_vec(),
            ForwardMap::Dense(k) => (k.tr_mul(&nalgebra::DVector::from_column_slice(r)))
                .as_slice()
                .to_vec(),
        }
    }
}

/// `F(u) = 1/2 ||K u - z||^2_{L2}`; with `K = I` this is denoising.
#[derive(Clone, Debug)]
pub struct TrackingProblem {
    grid: Grid,
    target: GridFunction,
    map: ForwardMap,
}

impl TrackingProblem {
    pub fn new(grid: &Grid, target: GridFunction, map: ForwardMap) -> Result<Self> {
        grid.check(target.len())?;
        if let ForwardMap::Dense(k) = &map {
            if k.nrows() != grid.len() || k.ncols() != grid.len() {
                return Err(Error::DimensionMismatch {
                    expected: grid.len(),
                    got: k.nrows().max(k.ncols()),
                });
            }
        }
        Ok(TrackingProblem {
            grid: grid.clone(),
            target,
            map,
        })
    }

    pub fn denoising(grid: &Grid, target: GridFunction) -> Result<Self> {
        Self::new(grid, target, ForwardMap::Identity)
    }

    pub fn target(&self) -> &GridFunction {
        &self.target
    }

    pub fn map(&self) -> &ForwardMap {
        &self.map
    }

    fn residual(&self, u: &GridFunction) -> Result<Vec<f64>> {
        self.grid.check(u.len())?;
        let mut r = self.map.apply(u.as_slice());
        for (ri, zi) in r.iter_mut().zip(self.target.as_slice()) {
            *ri -= zi;
        }
        Ok(r)
    }
}

impl Objective for TrackingProblem {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn eval(&self, u: &GridFunction) -> Result<f64> {
        let r = self.residual(u)?;
        Ok(0.5 * self.grid.weight() * dot(&r, &r))
    }

    fn grad(&self, u: &GridFunction) -> Result<GridFunction> {
        let r = self.residual(u)?;
        Ok(GridFunction::from_vec_unchecked(self.map.apply_transpose(&r)))
    }

    fn eval_grad(&self, u: &GridFunction) -> Result<(f64, GridFunction)> {
        let r = self.residual(u)?;
        let f = 0.5 * self.grid.weight() * dot(&r, &r);
        Ok((f, GridFunction::from_vec_unchecked(self.map.apply_transpose(&r))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_interval_grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_tracking() {
        let g = make_interval_grid(10, 1.0).unwrap();
        let z = GridFunction::from_fn(&g, |x, _| x * x);
        let p = TrackingProblem::denoising(&g, z.clone()).unwrap();
        assert_eq!(p.eval(&z).unwrap(), 0.0);
        let u = GridFunction::from_fn(&g, |x, _| x);
        let gr = p.grad(&u).unwrap();
        for i in 0..10 {
            assert_eq!(gr.as_slice()[i], u.as_slice()[i] - z.as_slice()[i]);
        }
    }

    #[test]
    fn blurred_tracking_gradient_matches_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = make_interval_grid(30, 1.0).unwrap();
        let z = GridFunction::from_fn(&g, |_, _| rng.random_range(-1.0..1.0));
        let p = TrackingProblem::new(&g, z, ForwardMap::gaussian_blur(&g, 0.05).unwrap()).unwrap();
        let u = GridFunction::from_fn(&g, |_, _| rng.random_range(-1.0..1.0));
        let dir = GridFunction::from_fn(&g, |_, _| rng.random_range(-1.0..1.0));
        let d = 1e-4;
        let shift = |s: f64| {
            GridFunction::from_vec_unchecked(
                u.as_slice().iter().zip(dir.as_slice()).map(|(a, b)| a + s * b).collect(),
            )
        };
        let fd = (p.eval(&shift(d)).unwrap() - p.eval(&shift(-d)).unwrap()) / (2.0 * d);
        let an = g.weight() * dot(p.grad(&u).unwrap().as_slice(), dir.as_slice());
        assert!((fd - an).abs() <= 1e-8 * an.abs().max(1e-3));
    }

    #[test]
    fn mismatched_target() {
        let g = make_interval_grid(10, 1.0).unwrap();
        let h = make_interval_grid(11, 1.0).unwrap();
        assert!(TrackingProblem::denoising(&g, GridFunction::zeros(&h)).is_err());
        let p = TrackingProblem::denoising(&g, GridFunction::zeros(&g)).unwrap();
        assert!(p.eval(&GridFunction::zeros(&h)).is_err());
    }
}
