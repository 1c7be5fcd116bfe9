//! Uniform cell-centered grids on rectangles and the scalar fields living on them.
//!
//! Cells are stored row-major with the x index running fastest. Boundary
//! conditions are homogeneous Neumann throughout: every stencil reflects the
//! boundary cell into its ghost, so the discrete normal derivative vanishes
//! and face fluxes across the boundary are zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of cells along any axis.
pub const MIN_CELLS: usize = 4;

/// Serialized form of a [`Grid`], as it appears in run configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub extents: Vec<f64>,
    pub cells: Vec<usize>,
}

/// Uniform rectangular discretization of the domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    dim: usize,
    extents: [f64; 2],
    cells: [usize; 2],
}

impl Grid {
    pub fn new(dim: usize, extents: &[f64], cells: &[usize]) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidDimension(dim));
        }
        for got in [extents.len(), cells.len()] {
            if got != dim {
                return Err(Error::AxisCount { expected: dim, got });
            }
        }
        let mut grid = Grid {
            dim,
            extents: [1.0; 2],
            cells: [1; 2],
        };
        for axis in 0..dim {
            let (extent, n) = (extents[axis], cells[axis]);
            if !(extent.is_finite() && extent > 0.0) {
                return Err(Error::NonPositiveExtent { axis, value: extent });
            }
            if n < MIN_CELLS {
                return Err(Error::TooFewCells { axis, cells: n });
            }
            grid.extents[axis] = extent;
            grid.cells[axis] = n;
        }
        Ok(grid)
    }

    /// Unit interval `[0, 1]` with `cells` cells.
    pub fn unit_interval(cells: usize) -> Result<Self> {
        Self::new(1, &[1.0], &[cells])
    }

    /// Unit square `[0, 1]^2` with `cells` cells per side.
    pub fn unit_square(cells: usize) -> Result<Self> {
        Self::new(2, &[1.0, 1.0], &[cells, cells])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.extents[axis]
    }

    pub fn cells(&self, axis: usize) -> usize {
        self.cells[axis]
    }

    /// Cell width along `axis`.
    pub fn spacing(&self, axis: usize) -> f64 {
        self.extents[axis] / self.cells[axis] as f64
    }

    /// Smallest cell width over the active axes.
    pub fn min_spacing(&self) -> f64 {
        (0..self.dim)
            .map(|a| self.spacing(a))
            .fold(f64::INFINITY, f64::min)
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `|Ω|`, the product of the extents.
    pub fn measure(&self) -> f64 {
        self.extents[..self.dim].iter().product()
    }

    pub fn cell_measure(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    /// Cell-center coordinates of flat index `idx`; the unused axis reads 0.
    pub fn center(&self, idx: usize) -> [f64; 2] {
        let nx = self.cells[0];
        let (i, j) = (idx % nx, idx / nx);
        let x = (i as f64 + 0.5) * self.spacing(0);
        let y = if self.dim == 2 {
            (j as f64 + 0.5) * self.spacing(1)
        } else {
            0.0
        };
        [x, y]
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            dim: self.dim,
            extents: self.extents[..self.dim].to_vec(),
            cells: self.cells[..self.dim].to_vec(),
        }
    }

    /// Writes the Neumann five-point (or three-point) Laplacian of `src` into `dst`.
    pub fn laplacian_into(&self, src: &[f64], dst: &mut [f64]) {
        debug_assert_eq!(src.len(), self.len());
        debug_assert_eq!(dst.len(), self.len());
        let (nx, ny) = (self.cells[0], self.cells[1]);
        let ihx2 = 1.0 / (self.spacing(0) * self.spacing(0));
        for j in 0..ny {
            let row = &src[j * nx..(j + 1) * nx];
            let out = &mut dst[j * nx..(j + 1) * nx];
            out[0] = (row[1] - row[0]) * ihx2;
            for i in 1..nx - 1 {
                out[i] = (row[i - 1] - 2.0 * row[i] + row[i + 1]) * ihx2;
            }
            out[nx - 1] = (row[nx - 2] - row[nx - 1]) * ihx2;
        }
        if self.dim == 2 {
            let ihy2 = 1.0 / (self.spacing(1) * self.spacing(1));
            for j in 0..ny {
                let below = if j == 0 { 0 } else { j - 1 };
                let above = if j + 1 == ny { j } else { j + 1 };
                for i in 0..nx {
                    let k = j * nx + i;
                    dst[k] += (src[below * nx + i] - 2.0 * src[k] + src[above * nx + i]) * ihy2;
                }
            }
        }
    }
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;

    fn try_from(spec: GridSpec) -> Result<Self> {
        Grid::new(spec.dim, &spec.extents, &spec.cells)
    }
}

impl From<Grid> for GridSpec {
    fn from(grid: Grid) -> Self {
        grid.spec()
    }
}

/// Cell-sampled scalar function on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Field { grid, values })
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Field {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Samples `f` at the cell centers.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.len()).map(|k| f(grid.center(k))).collect();
        Field { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub(crate) fn ensure_finite(&self, what: &'static str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(what))
        }
    }

    pub(crate) fn ensure_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `∑ values · cell_measure`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_measure()
    }

    /// Midpoint-rule domain average `(1/|Ω|) ∫ f`.
    pub fn mean_integral(&self) -> Result<f64> {
        self.ensure_finite("mean_integral input")?;
        Ok(self.values.iter().sum::<f64>() / self.values.len() as f64)
    }

    /// Discrete `L^k` norm; `k = f64::INFINITY` gives the sup norm.
    pub fn lk_norm(&self, k: f64) -> Result<f64> {
        if k.is_nan() || k < 1.0 {
            return Err(Error::InvalidExponent(k));
        }
        self.ensure_finite("lk_norm input")?;
        if k == f64::INFINITY {
            return Ok(self.values.iter().fold(0.0, |m, v| f64::max(m, v.abs())));
        }
        // Scale by the sup norm so large k does not overflow.
        let scale = self.values.iter().fold(0.0, |m, v| f64::max(m, v.abs()));
        if scale == 0.0 {
            return Ok(0.0);
        }
        let sum: f64 = self.values.iter().map(|v| (v.abs() / scale).powf(k)).sum();
        Ok(scale * (sum * self.grid.cell_measure()).powf(1.0 / k))
    }

    /// Discrete Neumann Laplacian.
    pub fn laplacian_neumann(&self) -> Result<Field> {
        self.ensure_finite("laplacian input")?;
        let mut out = Field::zeros(self.grid);
        self.grid.laplacian_into(&self.values, &mut out.values);
        Ok(out)
    }

    /// Sup-norm distance `max |f - value|`.
    pub fn distance_to_constant(&self, value: f64) -> f64 {
        self.values
            .iter()
            .fold(0.0, |m, v| f64::max(m, (v - value).abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn spacing_is_extent_over_cells() {
        let g = Grid::new(1, &[1.0], &[100]).unwrap();
        assert_relative_eq!(g.spacing(0), 0.01);
        let g = Grid::new(2, &[1.0, 2.0], &[50, 100]).unwrap();
        assert_relative_eq!(g.spacing(0), 0.02);
        assert_relative_eq!(g.spacing(1), 0.02);
        assert_relative_eq!(g.measure(), 2.0);
        assert_eq!(g.len(), 5000);
    }

    #[test]
    fn rejects_bad_grids() {
        assert_eq!(
            Grid::new(3, &[1.0, 1.0, 1.0], &[8, 8, 8]),
            Err(Error::InvalidDimension(3))
        );
        assert!(matches!(
            Grid::new(1, &[0.0], &[8]),
            Err(Error::NonPositiveExtent { .. })
        ));
        assert!(matches!(
            Grid::new(1, &[-1.0], &[8]),
            Err(Error::NonPositiveExtent { .. })
        ));
        assert!(matches!(
            Grid::new(2, &[1.0, 1.0], &[8, 3]),
            Err(Error::TooFewCells { axis: 1, cells: 3 })
        ));
        assert!(matches!(
            Grid::new(2, &[1.0], &[8]),
            Err(Error::AxisCount { .. })
        ));
    }

    #[test]
    fn grid_spec_round_trips_through_json() {
        let g = Grid::new(2, &[1.0, 2.0], &[8, 16]).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        assert_eq!(serde_json::from_str::<Grid>(&text).unwrap(), g);
        assert!(serde_json::from_str::<Grid>(r#"{"dim":1,"extents":[1.0],"cells":[2]}"#).is_err());
    }

    #[test]
    fn mean_integral_examples() {
        let g = Grid::new(2, &[1.0, 3.0], &[7, 9]).unwrap();
        assert_eq!(Field::constant(g, 2.0).mean_integral().unwrap(), 2.0);
        assert_eq!(Field::zeros(g).mean_integral().unwrap(), 0.0);
        let g = Grid::unit_interval(256).unwrap();
        let f = Field::from_fn(g, |x| x[0]);
        assert!((f.mean_integral().unwrap() - 0.5).abs() < 1e-12);
        let mut bad = Field::zeros(g);
        bad.values_mut()[3] = f64::NAN;
        assert_eq!(bad.mean_integral(), Err(Error::NonFinite("mean_integral input")));
    }

    #[test]
    fn lk_norm_examples() {
        let g = Grid::unit_square(8).unwrap();
        assert_relative_eq!(Field::constant(g, 2.0).lk_norm(3.0).unwrap(), 2.0, epsilon = 1e-14);
        assert_eq!(Field::zeros(g).lk_norm(5.0).unwrap(), 0.0);
        assert_eq!(Field::zeros(g).lk_norm(f64::INFINITY).unwrap(), 0.0);
        let g = Grid::unit_interval(256).unwrap();
        let f = Field::from_fn(g, |x| x[0]);
        // midpoint rule on x^2: error h^2/12 * (1/3 of second derivative scale)
        assert!((f.lk_norm(2.0).unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-5);
        assert_relative_eq!(f.lk_norm(f64::INFINITY).unwrap(), 1.0 - 0.5 / 256.0);
        assert_eq!(f.lk_norm(0.5), Err(Error::InvalidExponent(0.5)));
    }

    #[test]
    fn laplacian_annihilates_constants() {
        for g in [Grid::unit_interval(16).unwrap(), Grid::new(2, &[1.0, 2.0], &[6, 9]).unwrap()] {
            let lap = Field::constant(g, 3.7).laplacian_neumann().unwrap();
            assert!(lap.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn laplacian_of_cosine_mode() {
        let g = Grid::unit_interval(256).unwrap();
        let f = Field::from_fn(g, |x| (PI * x[0]).cos());
        let lap = f.laplacian_neumann().unwrap();
        let h = g.spacing(0);
        let err = lap
            .values()
            .iter()
            .zip(f.values())
            .map(|(l, v)| (l + PI * PI * v).abs())
            .fold(0.0, f64::max);
        // truncation error of the central stencil on cos(πx): π^4 h^2 / 12
        assert!(err <= PI.powi(4) * h * h / 12.0 * 1.01, "err = {err}");
    }

    #[test]
    fn laplacian_of_product_mode_2d() {
        let g = Grid::new(2, &[1.0, 2.0], &[32, 64]).unwrap();
        let f = Field::from_fn(g, |x| (PI * x[0]).cos() * (PI * x[1] / 2.0).cos());
        let lap = f.laplacian_neumann().unwrap();
        let eig = PI * PI * 1.25;
        let err = lap
            .values()
            .iter()
            .zip(f.values())
            .map(|(l, v)| (l + eig * v).abs())
            .fold(0.0, f64::max);
        let h = g.spacing(0);
        let bound = (PI.powi(4) + (PI / 2.0).powi(4)) * h * h / 12.0;
        assert!(err <= bound * 1.01, "err = {err}");
    }
}
