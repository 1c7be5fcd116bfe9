//! Solvers for `(a·I − b·Δ_h) x = rhs` under homogeneous Neumann conditions.
//!
//! With `a = b = 1` this is the chemoattractant equation `−Δc + c = u^γ`;
//! with `a = 1, b = dt` it is the implicit diffusion stage of the time stepper.
//! The operator is symmetric positive definite whenever `a > 0`.
//!
//! The direct method diagonalizes the x-direction with the orthonormal
//! cosine basis of the cell-centered Neumann Laplacian and factors one
//! tridiagonal system per x-mode along y. In 1D only the tridiagonal factor
//! remains. The basis is cached per grid and shared between rescaled solvers.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

/// The operator `shift·I − diffusion·Δ_h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftedLaplacian {
    pub shift: f64,
    pub diffusion: f64,
}

impl ShiftedLaplacian {
    /// `−Δ + I`.
    pub const HELMHOLTZ: ShiftedLaplacian = ShiftedLaplacian {
        shift: 1.0,
        diffusion: 1.0,
    };

    /// `I − dt·Δ`.
    pub fn implicit_diffusion(dt: f64) -> Self {
        ShiftedLaplacian {
            shift: 1.0,
            diffusion: dt,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.shift.is_finite() && self.shift > 0.0) {
            return Err(Error::Parameter {
                name: "operator shift",
                value: self.shift,
                requirement: "shift > 0",
            });
        }
        if !(self.diffusion.is_finite() && self.diffusion >= 0.0) {
            return Err(Error::Parameter {
                name: "operator diffusion",
                value: self.diffusion,
                requirement: "diffusion >= 0",
            });
        }
        Ok(())
    }

    /// Writes `(shift·I − diffusion·Δ_h) x` into `out`.
    pub fn apply_into(&self, grid: &Grid, x: &[f64], out: &mut [f64]) {
        grid.laplacian_into(x, out);
        for (o, &v) in out.iter_mut().zip(x) {
            *o = self.shift * v - self.diffusion * *o;
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    /// Cosine transform in x plus cached tridiagonal factors in y.
    #[default]
    Direct,
    /// Jacobi-preconditioned conjugate gradients.
    ConjugateGradient,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Bound on the normwise backward error `‖A x − rhs‖₂ / (‖A‖_∞ ‖x‖₂ + ‖rhs‖₂)`.
    pub tolerance: f64,
    /// CG iterations, or iterative-refinement sweeps for the direct method.
    pub max_iterations: usize,
    pub method: SolverMethod,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-10,
            max_iterations: 2000,
            method: SolverMethod::Direct,
        }
    }
}

/// Outcome of a successful solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveStats {
    /// Normwise backward error `‖rhs − A x‖ / (‖A‖ ‖x‖ + ‖rhs‖)`.
    pub residual: f64,
    pub iterations: usize,
}

/// Orthonormal cosine basis of the cell-centered Neumann Laplacian along x.
#[derive(Debug)]
struct CosineBasis {
    n: usize,
    /// `matrix[k * n + i] = w_k cos(πk(i + ½)/n)`.
    matrix: Vec<f64>,
    /// Eigenvalues of `−Δ_x` for each mode.
    eigenvalues: Vec<f64>,
}

impl CosineBasis {
    fn new(n: usize, h: f64) -> Self {
        let mut matrix = vec![0.0; n * n];
        for k in 0..n {
            let w = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
            for i in 0..n {
                matrix[k * n + i] = w * (PI * k as f64 * (i as f64 + 0.5) / n as f64).cos();
            }
        }
        let eigenvalues = (0..n)
            .map(|k| {
                let s = (PI * k as f64 / (2.0 * n as f64)).sin();
                4.0 * s * s / (h * h)
            })
            .collect();
        CosineBasis {
            n,
            matrix,
            eigenvalues,
        }
    }

    fn forward(&self, src: &[f64], dst: &mut [f64]) {
        for (k, d) in dst.iter_mut().enumerate() {
            let row = &self.matrix[k * self.n..(k + 1) * self.n];
            *d = row.iter().zip(src).map(|(q, s)| q * s).sum();
        }
    }

    fn inverse(&self, src: &[f64], dst: &mut [f64]) {
        dst.fill(0.0);
        for (k, &s) in src.iter().enumerate() {
            let row = &self.matrix[k * self.n..(k + 1) * self.n];
            for (d, q) in dst.iter_mut().zip(row) {
                *d += q * s;
            }
        }
    }
}

/// Thomas-algorithm factors for a batch of tridiagonal systems that share a
/// constant off-diagonal. Entry `[j * lanes + lane]` belongs to row `j` of
/// system `lane`.
#[derive(Clone, Debug)]
struct TridiagonalBatch {
    lanes: usize,
    rows: usize,
    off: f64,
    upper: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl TridiagonalBatch {
    /// `diag(row, lane)` gives the diagonal entry of each system.
    fn factor(lanes: usize, rows: usize, off: f64, diag: impl Fn(usize, usize) -> f64) -> Self {
        let mut upper = vec![0.0; lanes * rows];
        let mut inv_pivot = vec![0.0; lanes * rows];
        for lane in 0..lanes {
            let mut prev_upper = 0.0;
            for j in 0..rows {
                let pivot = diag(j, lane) - off * prev_upper;
                let k = j * lanes + lane;
                inv_pivot[k] = 1.0 / pivot;
                upper[k] = off / pivot;
                prev_upper = upper[k];
            }
        }
        TridiagonalBatch {
            lanes,
            rows,
            off,
            upper,
            inv_pivot,
        }
    }

    /// Solves in place: `x` holds the right-hand sides on entry.
    fn solve(&self, x: &mut [f64]) {
        let l = self.lanes;
        for (v, inv) in x[..l].iter_mut().zip(&self.inv_pivot[..l]) {
            *v *= inv;
        }
        for j in 1..self.rows {
            let (done, rest) = x.split_at_mut(j * l);
            let prev = &done[(j - 1) * l..];
            let cur = &mut rest[..l];
            let inv = &self.inv_pivot[j * l..(j + 1) * l];
            for lane in 0..l {
                cur[lane] = (cur[lane] - self.off * prev[lane]) * inv[lane];
            }
        }
        for j in (0..self.rows - 1).rev() {
            let (head, tail) = x.split_at_mut((j + 1) * l);
            let cur = &mut head[j * l..];
            let next = &tail[..l];
            let up = &self.upper[j * l..(j + 1) * l];
            for lane in 0..l {
                cur[lane] -= up[lane] * next[lane];
            }
        }
    }
}

#[derive(Clone, Debug)]
enum Factorization {
    Line(TridiagonalBatch),
    Plane {
        basis: Arc<CosineBasis>,
        modes: TridiagonalBatch,
    },
    Iterative {
        inv_diag: Vec<f64>,
    },
}

/// Solver for a fixed `ShiftedLaplacian` on a fixed grid.
#[derive(Clone, Debug)]
pub struct HelmholtzSolver {
    grid: Grid,
    op: ShiftedLaplacian,
    options: SolverOptions,
    factor: Factorization,
}

impl HelmholtzSolver {
    /// Solver for `−Δ_h + I`.
    pub fn new(grid: Grid, options: SolverOptions) -> Result<Self> {
        Self::with_operator(grid, ShiftedLaplacian::HELMHOLTZ, options)
    }

    pub fn with_operator(grid: Grid, op: ShiftedLaplacian, options: SolverOptions) -> Result<Self> {
        Self::build(grid, op, options, None)
    }

    /// Same grid and options, new operator; the cosine basis is reused.
    pub fn rescaled(&self, op: ShiftedLaplacian) -> Result<Self> {
        let basis = match &self.factor {
            Factorization::Plane { basis, .. } => Some(Arc::clone(basis)),
            _ => None,
        };
        Self::build(self.grid, op, self.options, basis)
    }

    fn build(
        grid: Grid,
        op: ShiftedLaplacian,
        options: SolverOptions,
        basis: Option<Arc<CosineBasis>>,
    ) -> Result<Self> {
        op.validate()?;
        if !(options.tolerance > 0.0) {
            return Err(Error::Parameter {
                name: "solver tolerance",
                value: options.tolerance,
                requirement: "tolerance > 0",
            });
        }
        let factor = match options.method {
            SolverMethod::ConjugateGradient => Factorization::Iterative {
                inv_diag: jacobi_inverse_diagonal(&grid, op),
            },
            SolverMethod::Direct if grid.dim() == 1 => {
                let n = grid.cells(0);
                let ih2 = op.diffusion / (grid.spacing(0) * grid.spacing(0));
                Factorization::Line(TridiagonalBatch::factor(1, n, -ih2, |j, _| {
                    op.shift + neighbours(j, n) * ih2
                }))
            }
            SolverMethod::Direct => {
                let (nx, ny) = (grid.cells(0), grid.cells(1));
                let basis = basis.unwrap_or_else(|| Arc::new(CosineBasis::new(nx, grid.spacing(0))));
                let ih2 = op.diffusion / (grid.spacing(1) * grid.spacing(1));
                let modes = TridiagonalBatch::factor(nx, ny, -ih2, |j, k| {
                    op.shift + op.diffusion * basis.eigenvalues[k] + neighbours(j, ny) * ih2
                });
                Factorization::Plane { basis, modes }
            }
        };
        Ok(HelmholtzSolver {
            grid,
            op,
            options,
            factor,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn operator(&self) -> ShiftedLaplacian {
        self.op
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    /// Solves `A c = rhs` to the configured tolerance.
    pub fn solve(&self, rhs: &Field) -> Result<Field> {
        if rhs.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        rhs.ensure_finite("elliptic right-hand side")?;
        let mut out = Field::zeros(self.grid);
        self.solve_into(rhs.values(), out.values_mut())?;
        Ok(out)
    }

    /// Slice-level solve used by the time stepper.
    ///
    /// Constants are mapped to `constant / shift` exactly: the solve acts on
    /// `rhs − rhs[0]` only, so spatially uniform states stay uniform to the bit.
    pub fn solve_into(&self, rhs: &[f64], out: &mut [f64]) -> Result<SolveStats> {
        let offset = rhs.first().copied().unwrap_or(0.0);
        let varying: Vec<f64> = rhs.iter().map(|r| r - offset).collect();
        let rhs_norm = norm2(&varying);
        let stats = if rhs_norm == 0.0 {
            out.fill(0.0);
            SolveStats {
                residual: 0.0,
                iterations: 0,
            }
        } else {
            match &self.factor {
                Factorization::Iterative { inv_diag } => self.conjugate_gradient(inv_diag, &varying, rhs_norm, out)?,
                _ => self.direct_with_refinement(&varying, rhs_norm, out)?,
            }
        };
        let base = offset / self.op.shift;
        for o in out.iter_mut() {
            *o += base;
        }
        Ok(stats)
    }

    fn direct(&self, rhs: &[f64], out: &mut [f64]) {
        match &self.factor {
            Factorization::Line(tri) => {
                out.copy_from_slice(rhs);
                tri.solve(out);
            }
            Factorization::Plane { basis, modes } => {
                let nx = basis.n;
                let mut spectral = vec![0.0; rhs.len()];
                for (src, dst) in rhs.chunks_exact(nx).zip(spectral.chunks_exact_mut(nx)) {
                    basis.forward(src, dst);
                }
                modes.solve(&mut spectral);
                for (src, dst) in spectral.chunks_exact(nx).zip(out.chunks_exact_mut(nx)) {
                    basis.inverse(src, dst);
                }
            }
            Factorization::Iterative { .. } => unreachable!("direct solve on iterative solver"),
        }
    }

    fn direct_with_refinement(&self, rhs: &[f64], rhs_norm: f64, out: &mut [f64]) -> Result<SolveStats> {
        self.direct(rhs, out);
        let mut resid = vec![0.0; rhs.len()];
        let mut correction = vec![0.0; rhs.len()];
        let mut sweeps = 0;
        loop {
            self.residual_into(out, rhs, &mut resid);
            let rel = norm2(&resid) / self.error_scale(out, rhs_norm);
            if !rel.is_finite() {
                return Err(Error::SolverFailure {
                    residual: rel,
                    tolerance: self.options.tolerance,
                    iterations: sweeps,
                });
            }
            if rel <= self.options.tolerance {
                return Ok(SolveStats {
                    residual: rel,
                    iterations: sweeps,
                });
            }
            if sweeps >= self.options.max_iterations.min(8) {
                return Err(Error::SolverFailure {
                    residual: rel,
                    tolerance: self.options.tolerance,
                    iterations: sweeps,
                });
            }
            self.direct(&resid, &mut correction);
            for (o, c) in out.iter_mut().zip(&correction) {
                *o += c;
            }
            sweeps += 1;
        }
    }

    fn conjugate_gradient(&self, inv_diag: &[f64], rhs: &[f64], rhs_norm: f64, x: &mut [f64]) -> Result<SolveStats> {
        let n = rhs.len();
        // Initial guess: Jacobi step.
        for ((xi, r), d) in x.iter_mut().zip(rhs).zip(inv_diag) {
            *xi = r * d;
        }
        let mut r = vec![0.0; n];
        self.residual_into(x, rhs, &mut r);
        let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(a, d)| a * d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz = dot(&r, &z);
        let mut rel = norm2(&r) / rhs_norm;
        let mut it = 0;
        while rel > self.options.tolerance {
            if it >= self.options.max_iterations || !rel.is_finite() {
                return Err(Error::SolverFailure {
                    residual: rel,
                    tolerance: self.options.tolerance,
                    iterations: it,
                });
            }
            self.op.apply_into(&self.grid, &p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
            it += 1;
            rel = norm2(&r) / rhs_norm;
        }
        // Recompute the true residual; the recurrence can drift.
        self.residual_into(x, rhs, &mut r);
        let true_rel = norm2(&r) / self.error_scale(x, rhs_norm);
        if true_rel > self.options.tolerance {
            return Err(Error::SolverFailure {
                residual: true_rel,
                tolerance: self.options.tolerance,
                iterations: it,
            });
        }
        Ok(SolveStats {
            residual: true_rel,
            iterations: it,
        })
    }

    /// `‖A‖_∞ ‖x‖₂ + ‖rhs‖₂`; residuals are measured as normwise backward
    /// errors so the tolerance stays above the rounding floor on fine grids.
    fn error_scale(&self, x: &[f64], rhs_norm: f64) -> f64 {
        let inv_h2: f64 = (0..self.grid.dim()).map(|d| self.grid.spacing(d).powi(-2)).sum();
        let op_norm = self.op.shift + 4.0 * self.op.diffusion * inv_h2;
        op_norm * norm2(x) + rhs_norm
    }

    /// `rhs − A x`.
    fn residual_into(&self, x: &[f64], rhs: &[f64], out: &mut [f64]) {
        self.op.apply_into(&self.grid, x, out);
        for (o, r) in out.iter_mut().zip(rhs) {
            *o = r - *o;
        }
    }

    /// Relative residual `‖A x − rhs‖₂ / ‖rhs‖₂` (absolute when `rhs = 0`).
    pub fn relative_residual(&self, x: &Field, rhs: &Field) -> f64 {
        let mut r = vec![0.0; self.grid.len()];
        self.residual_into(x.values(), rhs.values(), &mut r);
        let scale = norm2(rhs.values());
        let res = norm2(&r);
        if scale == 0.0 {
            res
        } else {
            res / scale
        }
    }

    /// Chemoattractant `c` solving `−Δc + c = u^γ`.
    ///
    /// Negative entries of `u` are treated as 0 before powering; the largest
    /// such undershoot is reported alongside `c`.
    pub fn chemoattractant(&self, u: &Field, gamma: f64) -> Result<Chemoattractant> {
        if !(gamma.is_finite() && gamma >= 1.0) {
            return Err(Error::Parameter {
                name: "gamma",
                value: gamma,
                requirement: "gamma >= 1",
            });
        }
        u.ensure_finite("cell density")?;
        let undershoot = u.values().iter().fold(0.0f64, |m, &v| m.max(-v));
        let rhs = u.map(|v| pow_nonnegative(v, gamma));
        Ok(Chemoattractant {
            c: self.solve(&rhs)?,
            undershoot,
        })
    }
}

/// Result of [`HelmholtzSolver::chemoattractant`].
#[derive(Clone, Debug, PartialEq)]
pub struct Chemoattractant {
    pub c: Field,
    /// Largest negative-part magnitude of `u` clamped before powering.
    pub undershoot: f64,
}

/// `v^p` with negative `v` clamped to 0.
pub(crate) fn pow_nonnegative(v: f64, p: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else if p == 1.0 {
        v
    } else {
        v.powf(p)
    }
}

/// Number of in-domain neighbours of row `j` in a line of `n` cells.
fn neighbours(j: usize, n: usize) -> f64 {
    if j == 0 || j + 1 == n {
        1.0
    } else {
        2.0
    }
}

fn jacobi_inverse_diagonal(grid: &Grid, op: ShiftedLaplacian) -> Vec<f64> {
    let nx = grid.cells(0);
    let ny = grid.cells(1);
    let ihx2 = 1.0 / (grid.spacing(0) * grid.spacing(0));
    let ihy2 = if grid.dim() == 2 {
        1.0 / (grid.spacing(1) * grid.spacing(1))
    } else {
        0.0
    };
    (0..grid.len())
        .map(|k| {
            let (i, j) = (k % nx, k / nx);
            let lap = neighbours(i, nx) * ihx2 + if grid.dim() == 2 { neighbours(j, ny) * ihy2 } else { 0.0 };
            1.0 / (op.shift + op.diffusion * lap)
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_err(a: &Field, b: &Field) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    fn solvers(grid: Grid) -> Vec<HelmholtzSolver> {
        [SolverMethod::Direct, SolverMethod::ConjugateGradient]
            .into_iter()
            .map(|method| {
                HelmholtzSolver::new(
                    grid,
                    SolverOptions {
                        method,
                        ..Default::default()
                    },
                )
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn constant_rhs_gives_constant_solution() {
        for grid in [Grid::unit_interval(64).unwrap(), Grid::new(2, &[1.0, 2.0], &[16, 24]).unwrap()] {
            for s in solvers(grid) {
                let c = s.solve(&Field::constant(grid, 5.0)).unwrap();
                assert_eq!(c.distance_to_constant(5.0), 0.0, "{:?}", s.options.method);
            }
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let grid = Grid::unit_square(8).unwrap();
        for s in solvers(grid) {
            let c = s.solve(&Field::zeros(grid)).unwrap();
            assert!(c.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn cosine_mode_1d() {
        let grid = Grid::unit_interval(128).unwrap();
        let rhs = Field::from_fn(grid, |x| 1.0 + (PI * x[0]).cos());
        let exact = Field::from_fn(grid, |x| 1.0 + (PI * x[0]).cos() / (1.0 + PI * PI));
        let h = grid.spacing(0);
        for s in solvers(grid) {
            let c = s.solve(&rhs).unwrap();
            assert!(max_err(&c, &exact) < PI.powi(4) * h * h, "{}", max_err(&c, &exact));
        }
    }

    #[test]
    fn product_mode_2d() {
        let grid = Grid::unit_square(128).unwrap();
        let rhs = Field::from_fn(grid, |x| (PI * x[0]).cos() * (PI * x[1]).cos());
        let exact = rhs.map(|v| v / (1.0 + 2.0 * PI * PI));
        let h = grid.spacing(0);
        let s = HelmholtzSolver::new(grid, SolverOptions::default()).unwrap();
        let c = s.solve(&rhs).unwrap();
        assert!(max_err(&c, &exact) < PI.powi(4) * h * h);
    }

    #[test]
    fn non_square_2d_matches_cg() {
        let grid = Grid::new(2, &[1.5, 0.7], &[12, 20]).unwrap();
        let rhs = Field::from_fn(grid, |x| (3.0 * x[0]).sin().abs() + x[1] * x[1]);
        let [d, cg] = <[HelmholtzSolver; 2]>::try_from(solvers(grid)).unwrap();
        let a = d.solve(&rhs).unwrap();
        let b = cg.solve(&rhs).unwrap();
        assert!(max_err(&a, &b) < 1e-8);
        assert!(d.relative_residual(&a, &rhs) <= 1e-10);
    }

    #[test]
    fn rescaled_solver_matches_fresh_one() {
        let grid = Grid::unit_square(16).unwrap();
        let base = HelmholtzSolver::new(grid, SolverOptions::default()).unwrap();
        let op = ShiftedLaplacian::implicit_diffusion(0.003);
        let fresh = HelmholtzSolver::with_operator(grid, op, SolverOptions::default()).unwrap();
        let rescaled = base.rescaled(op).unwrap();
        let rhs = Field::from_fn(grid, |x| x[0] * (1.0 - x[1]));
        assert!(max_err(&fresh.solve(&rhs).unwrap(), &rescaled.solve(&rhs).unwrap()) < 1e-14);
    }

    #[test]
    fn iteration_limit_reports_residual() {
        let grid = Grid::unit_square(32).unwrap();
        let s = HelmholtzSolver::new(
            grid,
            SolverOptions {
                method: SolverMethod::ConjugateGradient,
                max_iterations: 2,
                tolerance: 1e-12,
            },
        )
        .unwrap();
        let rhs = Field::from_fn(grid, |x| (7.0 * x[0]).sin() + x[1]);
        match s.solve(&rhs) {
            Err(Error::SolverFailure {
                residual, iterations, ..
            }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 1e-12 && residual.is_finite());
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn chemoattractant_examples() {
        let grid = Grid::unit_interval(32).unwrap();
        let s = HelmholtzSolver::new(grid, SolverOptions::default()).unwrap();
        let xi = 0.7;
        let c = s.chemoattractant(&Field::constant(grid, xi), 2.0).unwrap();
        assert!(c.c.distance_to_constant(xi * xi) < 1e-12);
        assert_eq!(c.undershoot, 0.0);
        let c = s.chemoattractant(&Field::zeros(grid), 1.5).unwrap();
        assert!(c.c.values().iter().all(|&v| v == 0.0));
        for gamma in [1.0, 1.3, 3.0] {
            let c = s.chemoattractant(&Field::constant(grid, 1.0), gamma).unwrap();
            assert!(c.c.distance_to_constant(1.0) < 1e-12);
        }
        assert!(s.chemoattractant(&Field::zeros(grid), 0.5).is_err());
    }

    #[test]
    fn chemoattractant_clamps_undershoot() {
        let grid = Grid::unit_interval(8).unwrap();
        let s = HelmholtzSolver::new(grid, SolverOptions::default()).unwrap();
        let mut u = Field::constant(grid, 1.0);
        u.values_mut()[2] = -1e-9;
        u.values_mut()[5] = -3e-9;
        let out = s.chemoattractant(&u, 1.5).unwrap();
        assert_eq!(out.undershoot, 3e-9);
        assert!(out.c.is_finite());
    }

    #[test]
    fn rejects_bad_operator() {
        let grid = Grid::unit_interval(8).unwrap();
        let bad = ShiftedLaplacian {
            shift: 0.0,
            diffusion: 1.0,
        };
        assert!(HelmholtzSolver::with_operator(grid, bad, SolverOptions::default()).is_err());
    }
}
