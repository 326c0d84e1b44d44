//! Uniform interior grids on `(0, L)` or `(0, Lx) x (0, Ly)`.
//!
//! Grid functions store interior nodal values only and are implicitly
//! extended by zero outside the domain. All integrals use mass lumping: every
//! interior node carries the weight `h` (or `hx * hy` in 2-D). The boundary
//! half-cells are not covered, so the quadrature measure of the domain is
//! `n * h = L - h` rather than `L`; this O(h) bias is deliberate and shared by
//! every integral in the crate.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One tensor direction: `n` interior nodes on `(0, length)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    n: usize,
    length: f64,
}

impl Axis {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2 interior nodes, got n = {n}"
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "domain length must be positive and finite, got {length}"
            )));
        }
        Ok(Axis { n, length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Mesh width `length / (n + 1)`.
    pub fn h(&self) -> f64 {
        self.length / (self.n + 1) as f64
    }

    /// Coordinate of interior node `i` (0-based), i.e. `(i + 1) * h`.
    pub fn node(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }
}

/// A uniform 1-D grid or a 2-D tensor-product grid.
///
/// In 2-D, values are stored with the x index running fastest:
/// `index = j * nx + i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    x: Axis,
    y: Option<Axis>,
}

/// Builds a 1-D grid with `n` interior nodes on `(0, length)`.
pub fn make_interval_grid(n: usize, length: f64) -> Result<Grid> {
    Ok(Grid {
        x: Axis::new(n, length)?,
        y: None,
    })
}

/// Builds a tensor-product grid on `(0, lx) x (0, ly)`.
pub fn make_rect_grid(nx: usize, lx: f64, ny: usize, ly: f64) -> Result<Grid> {
    Ok(Grid {
        x: Axis::new(nx, lx)?,
        y: Some(Axis::new(ny, ly)?),
    })
}

impl Grid {
    pub fn dim(&self) -> usize {
        if self.y.is_some() {
            2
        } else {
            1
        }
    }

    pub fn x_axis(&self) -> &Axis {
        &self.x
    }

    pub fn y_axis(&self) -> Option<&Axis> {
        self.y.as_ref()
    }

    /// Total number of unknowns.
    pub fn len(&self) -> usize {
        self.x.n * self.y.map_or(1, |a| a.n)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Interior node count along x.
    pub fn n(&self) -> usize {
        self.x.n
    }

    /// Domain length along x.
    pub fn length(&self) -> f64 {
        self.x.length
    }

    /// Mesh width along x.
    pub fn h(&self) -> f64 {
        self.x.h()
    }

    /// Lumped quadrature weight shared by every node.
    pub fn weight(&self) -> f64 {
        self.x.h() * self.y.map_or(1.0, |a| a.h())
    }

    /// Sum of all quadrature weights.
    pub fn quadrature_measure(&self) -> f64 {
        self.weight() * self.len() as f64
    }

    /// Coordinates of node `idx`; the second entry is 0 in 1-D.
    pub fn coords(&self, idx: usize) -> (f64, f64) {
        match self.y {
            None => (self.x.node(idx), 0.0),
            Some(y) => (self.x.node(idx % self.x.n), y.node(idx / self.x.n)),
        }
    }

    pub(crate) fn check(&self, len: usize) -> Result<()> {
        if len == self.len() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.len(),
                got: len,
            })
        }
    }
}

/// Nodal values on the interior of a [`Grid`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction(Vec<f64>);

impl GridFunction {
    /// Wraps `values`, checking the length against `grid` and that every
    /// entry is finite.
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        grid.check(values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid function values"));
        }
        Ok(GridFunction(values))
    }

    pub fn zeros(grid: &Grid) -> Self {
        GridFunction(vec![0.0; grid.len()])
    }

    /// Samples `f(x, y)` at every node (`y = 0` in 1-D).
    pub fn from_fn(grid: &Grid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        GridFunction(
            (0..grid.len())
                .map(|i| {
                    let (x, y) = grid.coords(i);
                    f(x, y)
                })
                .collect(),
        )
    }

    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        GridFunction(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Reads a grid function from CSV with header `x,value` (1-D) or
    /// `x,y,value` (2-D), rows in node-index order.
    pub fn read_csv(grid: &Grid, path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv_from(grid, file).map_err(|e| match e {
            Error::Parse { message, .. } => Error::parse(path, message),
            other => other,
        })
    }

    pub fn read_csv_from(grid: &Grid, reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let expected: &[&str] = if grid.dim() == 1 {
            &["x", "value"]
        } else {
            &["x", "y", "value"]
        };
        let headers = rdr.headers().map_err(|e| Error::parse("<csv>", e))?;
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::parse(
                "<csv>",
                format!("expected header {:?}, found {:?}", expected.join(","), headers),
            ));
        }
        let col = expected.len() - 1;
        let mut values = Vec::with_capacity(grid.len());
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::parse("<csv>", e))?;
            let v: f64 = rec
                .get(col)
                .ok_or_else(|| Error::parse("<csv>", format!("row {row}: missing value")))?
                .parse()
                .map_err(|e| Error::parse("<csv>", format!("row {row}: {e}")))?;
            values.push(v);
        }
        GridFunction::new(grid, values)
    }

    /// Writes `x,value` / `x,y,value` rows with 17 significant digits.
    pub fn write_csv_to(&self, grid: &Grid, mut out: impl Write) -> std::io::Result<()> {
        if grid.dim() == 1 {
            writeln!(out, "x,value")?;
        } else {
            writeln!(out, "x,y,value")?;
        }
        for (i, v) in self.0.iter().enumerate() {
            let (x, y) = grid.coords(i);
            if grid.dim() == 1 {
                writeln!(out, "{},{}", fmt_f64(x), fmt_f64(*v))?;
            } else {
                writeln!(out, "{},{},{}", fmt_f64(x), fmt_f64(y), fmt_f64(*v))?;
            }
        }
        Ok(())
    }

    pub fn write_csv(&self, grid: &Grid, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv_to(grid, &mut buf).map_err(|e| Error::io(path, e))?;
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}

/// Full-precision float formatting used by every CSV writer.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Lumped quadrature `sum_i w_i f_i`.
pub fn integrate(grid: &Grid, f: &GridFunction) -> Result<f64> {
    grid.check(f.len())?;
    Ok(integrate_slice(grid, f.as_slice()))
}

pub(crate) fn integrate_slice(grid: &Grid, f: &[f64]) -> f64 {
    grid.weight() * f.iter().sum::<f64>()
}

/// `int_Omega |u|^p dx` for `0 < p < 1`.
pub fn lp_pseudonorm(grid: &Grid, u: &GridFunction, p: f64) -> Result<f64> {
    check_exponent(p)?;
    grid.check(u.len())?;
    Ok(lp_pseudonorm_slice(grid, u.as_slice(), p))
}

pub(crate) fn lp_pseudonorm_slice(grid: &Grid, u: &[f64], p: f64) -> f64 {
    grid.weight() * u.iter().map(|v| abs_pow(*v, p)).sum::<f64>()
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("p must lie in (0,1), got {p}")))
    }
}

/// `|v|^p` with an exact zero at the origin.
#[inline]
pub(crate) fn abs_pow(v: f64, p: f64) -> f64 {
    let a = v.abs();
    if a == 0.0 {
        0.0
    } else {
        (p * a.ln()).exp()
    }
}

#[inline]
pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_grid_nodes() {
        let g = make_interval_grid(3, 1.0).unwrap();
        assert_eq!(g.h(), 0.25);
        assert_eq!(g.x_axis().nodes(), vec![0.25, 0.5, 0.75]);

        let g = make_interval_grid(99, 2.0).unwrap();
        assert!((g.h() - 0.02).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(make_interval_grid(1, 1.0).is_err());
        assert!(make_interval_grid(4, 0.0).is_err());
        assert!(make_interval_grid(4, -1.0).is_err());
        assert!(make_rect_grid(4, 1.0, 1, 1.0).is_err());
    }

    #[test]
    fn lumped_quadrature_excludes_boundary_cells() {
        let g = make_interval_grid(9, 1.0).unwrap();
        let one = GridFunction::from_fn(&g, |_, _| 1.0);
        assert!((integrate(&g, &one).unwrap() - 0.9).abs() < 1e-14);
        assert_eq!(integrate(&g, &GridFunction::zeros(&g)).unwrap(), 0.0);
        assert!((g.quadrature_measure() - (g.length() - g.h())).abs() < 1e-14);

        let r = make_rect_grid(3, 1.0, 4, 2.0).unwrap();
        assert!((r.quadrature_measure() - 3.0 * 0.25 * 4.0 * 0.4).abs() < 1e-14);
    }

    #[test]
    fn riemann_sum_converges_first_order() {
        // exact integral of x on (0,1) is 1/2; lumped rule gives (1 - h)/2
        let mut prev_err = f64::INFINITY;
        for n in [9, 19, 39, 79, 159] {
            let g = make_interval_grid(n, 1.0).unwrap();
            let f = GridFunction::from_fn(&g, |x, _| x);
            let err = (integrate(&g, &f).unwrap() - 0.5).abs();
            assert!((err - g.h() / 2.0).abs() < 1e-12);
            assert!(err < prev_err);
            prev_err = err;
        }
    }

    #[test]
    fn dimension_mismatch() {
        let g = make_interval_grid(5, 1.0).unwrap();
        let h = make_interval_grid(6, 1.0).unwrap();
        let f = GridFunction::zeros(&h);
        assert!(matches!(
            integrate(&g, &f),
            Err(Error::DimensionMismatch { expected: 5, got: 6 })
        ));
        assert!(GridFunction::new(&g, vec![0.0; 4]).is_err());
        assert!(GridFunction::new(&g, vec![f64::NAN; 5]).is_err());
    }

    #[test]
    fn lp_pseudonorm_values() {
        let g = make_interval_grid(99, 1.0).unwrap();
        let one = GridFunction::from_fn(&g, |_, _| 1.0);
        let four = GridFunction::from_fn(&g, |_, _| 4.0);
        for p in [0.1, 0.5, 0.9] {
            let v = lp_pseudonorm(&g, &one, p).unwrap();
            assert!((v - g.quadrature_measure()).abs() < 1e-14);
        }
        assert_eq!(lp_pseudonorm(&g, &GridFunction::zeros(&g), 0.5).unwrap(), 0.0);
        let v = lp_pseudonorm(&g, &four, 0.5).unwrap();
        assert!((v - 2.0 * 0.99).abs() < 1e-13);
        assert!((v - 2.0).abs() < 2.0 * g.h() + 1e-12);
        assert!(lp_pseudonorm(&g, &one, 1.0).is_err());
        assert!(lp_pseudonorm(&g, &one, 0.0).is_err());
    }

    #[test]
    fn csv_roundtrip_1d_and_2d() {
        let g = make_interval_grid(4, 1.0).unwrap();
        let f = GridFunction::from_fn(&g, |x, _| x.sin() / 3.0);
        let mut buf = Vec::new();
        f.write_csv_to(&g, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("x,value\n"));
        assert_eq!(GridFunction::read_csv_from(&g, buf.as_slice()).unwrap(), f);

        let r = make_rect_grid(3, 1.0, 2, 1.0).unwrap();
        let f = GridFunction::from_fn(&r, |x, y| x - 0.1 * y);
        let mut buf = Vec::new();
        f.write_csv_to(&r, &mut buf).unwrap();
        assert_eq!(GridFunction::read_csv_from(&r, buf.as_slice()).unwrap(), f);
        assert!(GridFunction::read_csv_from(&g, buf.as_slice()).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn pseudonorm_nonnegative_and_homogeneous(
                vals in proptest::collection::vec(-10.0f64..10.0, 8),
                c in -5.0f64..5.0,
                p in 0.05f64..0.95,
            ) {
                let g = make_interval_grid(8, 1.0).unwrap();
                let u = GridFunction::new(&g, vals.clone()).unwrap();
                let base = lp_pseudonorm(&g, &u, p).unwrap();
                prop_assert!(base >= 0.0);
                prop_assert_eq!(base == 0.0, vals.iter().all(|v| *v == 0.0));
                let cu = GridFunction::new(&g, vals.iter().map(|v| c * v).collect()).unwrap();
                let scaled = lp_pseudonorm(&g, &cu, p).unwrap();
                let expect = abs_pow(c, p) * base;
                prop_assert!((scaled - expect).abs() <= 1e-13 * expect.max(1e-300));
            }
        }
    }
}
