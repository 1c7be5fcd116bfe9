//! IMEX time stepping of `u_t = Δu − χ∇·(u^m∇c) + λf(u)` with the
//! chemoattractant recomputed from `u` after every step.
//!
//! One step with step size `dt`:
//!
//! 1. explicit increment `E = −χ∇·(u^m∇c) + λu^α(1 − σ⨍u^β)` at the current level,
//! 2. implicit diffusion `(I − dt·Δ_h) u⁺ = u + dt·E` (or Crank-Nicolson),
//! 3. negative undershoots of `u⁺` are set to 0 and the added mass is recorded,
//! 4. `c⁺` solves `−Δc + c = (u⁺)^γ`.
//!
//! Transport is in flux form with `u^m` upwinded by the sign of the face
//! gradient of `c`; boundary faces carry no flux.

use serde::{Deserialize, Serialize};

use crate::comparison::{self, ComparisonState};
use crate::diagnostics::{self, DiagnosticsRow};
use crate::elliptic::{pow_nonnegative, HelmholtzSolver, ShiftedLaplacian};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::params::{DiffusionScheme, Params};
use crate::reaction::{nonlocal_factor, reaction_lipschitz};

/// Solution at one time level.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub u: Field,
    pub c: Field,
    /// Step size used to reach (or to leave) this level.
    pub dt: f64,
    pub step_count: usize,
    /// Cumulative mass added by clamping negative undershoots.
    pub clamped_mass: f64,
}

/// Per-step bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    pub mass_before: f64,
    /// Mass of `u⁺` before clamping.
    pub mass_before_clamp: f64,
    pub clamped_mass: f64,
    pub nonlocal_factor: f64,
    /// Largest negative `u` value seen by the chemoattractant power.
    pub undershoot: f64,
}

fn for_each_face(grid: &Grid, mut f: impl FnMut(usize, usize, f64)) {
    let (nx, ny) = (grid.cells(0), grid.cells(1));
    let hx = grid.spacing(0);
    for j in 0..ny {
        for i in 0..nx - 1 {
            let k = j * nx + i;
            f(k, k + 1, hx);
        }
    }
    if grid.dim() == 2 {
        let hy = grid.spacing(1);
        for j in 0..ny - 1 {
            for i in 0..nx {
                let k = j * nx + i;
                f(k, k + nx, hy);
            }
        }
    }
}

/// Writes `−χ∇·(u^m∇c)` into `out` (overwritten).
pub fn chemotaxis_into(grid: &Grid, u: &[f64], c: &[f64], chi: f64, m: f64, out: &mut [f64]) {
    out.fill(0.0);
    if chi == 0.0 {
        return;
    }
    for_each_face(grid, |left, right, h| {
        let grad = (c[right] - c[left]) / h;
        let upwind = if grad > 0.0 { u[left] } else { u[right] };
        let flux = chi * pow_nonnegative(upwind, m) * grad / h;
        out[left] -= flux;
        out[right] += flux;
    });
}

/// The transport term `−χ∇·(u^m∇c)` in conservative upwind form.
pub fn chemotactic_divergence(u: &Field, c: &Field, chi: f64, m: f64) -> Result<Field> {
    u.ensure_same_grid(c)?;
    u.ensure_finite("cell density")?;
    c.ensure_finite("chemoattractant")?;
    let mut out = Field::zeros(*u.grid());
    chemotaxis_into(u.grid(), u.values(), c.values(), chi, m, out.values_mut());
    Ok(out)
}

/// Largest face speed `χ m u_face^{m−1} |∇c|` along each axis.
pub fn max_face_velocity(u: &Field, c: &Field, chi: f64, m: f64) -> [f64; 2] {
    let mut vmax = [0.0f64; 2];
    if chi == 0.0 {
        return vmax;
    }
    let grid = *u.grid();
    let nx = grid.cells(0);
    let (uv, cv) = (u.values(), c.values());
    for_each_face(&grid, |left, right, h| {
        let axis = usize::from(right - left == nx && grid.dim() == 2);
        let face_u = uv[left].max(uv[right]).max(0.0);
        let speed = if m == 1.0 { 1.0 } else { m * face_u.powf(m - 1.0) };
        let v = chi * speed * ((cv[right] - cv[left]) / h).abs();
        vmax[axis] = vmax[axis].max(v);
    });
    vmax
}

/// Owns the solvers for one grid and parameter set.
#[derive(Clone, Debug)]
pub struct Stepper {
    params: Params,
    helmholtz: HelmholtzSolver,
    implicit: Option<HelmholtzSolver>,
}

impl Stepper {
    pub fn new(grid: Grid, params: Params) -> Result<Self> {
        params.validate()?;
        Ok(Stepper {
            helmholtz: HelmholtzSolver::new(grid, params.numerics.solver)?,
            params,
            implicit: None,
        })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn helmholtz(&self) -> &HelmholtzSolver {
        &self.helmholtz
    }

    /// State at `t = 0` with `c` solved from `u0`.
    pub fn initial_state(&self, u0: Field) -> Result<SimState> {
        if u0.grid() != self.helmholtz.grid() {
            return Err(Error::GridMismatch);
        }
        u0.ensure_finite("initial datum")?;
        if u0.min() < 0.0 {
            return Err(Error::Negative("initial datum"));
        }
        let c = self.helmholtz.chemoattractant(&u0, self.params.model.gamma)?.c;
        Ok(SimState {
            t: 0.0,
            u: u0,
            c,
            dt: self.params.numerics.dt_initial,
            step_count: 0,
            clamped_mass: 0.0,
        })
    }

    /// Stability-limited step: `cfl · min(h/max|v|, 1/Lip(λf), dt_max)`.
    pub fn adapt_dt(&self, state: &SimState) -> f64 {
        let model = &self.params.model;
        let num = &self.params.numerics;
        let grid = state.u.grid();
        let v = max_face_velocity(&state.u, &state.c, model.chi, model.m);
        let advective = (0..grid.dim())
            .map(|a| grid.spacing(a) / v[a])
            .fold(f64::INFINITY, f64::min);
        let factor = nonlocal_factor(&state.u, &model.reaction).unwrap_or(f64::INFINITY);
        let lip = reaction_lipschitz(&state.u, &model.reaction, factor);
        let reactive = if lip > 0.0 { 1.0 / lip } else { f64::INFINITY };
        num.cfl_safety * advective.min(reactive).min(num.dt_max)
    }

    fn implicit_solver(&mut self, coefficient: f64) -> Result<&HelmholtzSolver> {
        let stale = self
            .implicit
            .as_ref()
            .is_none_or(|s| s.operator().diffusion != coefficient);
        if stale {
            self.implicit = Some(self.helmholtz.rescaled(ShiftedLaplacian::implicit_diffusion(coefficient))?);
        }
        Ok(self.implicit.as_ref().expect("implicit solver just built"))
    }

    /// Advances `state` by `state.dt`.
    pub fn step(&mut self, state: &SimState) -> Result<(SimState, StepReport)> {
        let model = self.params.model;
        let scheme = self.params.numerics.diffusion;
        let dt = state.dt;
        let grid = *state.u.grid();
        let u = state.u.values();

        let factor = nonlocal_factor(&state.u, &model.reaction)?;
        let mut increment = vec![0.0; u.len()];
        chemotaxis_into(&grid, u, state.c.values(), model.chi, model.m, &mut increment);
        let growth = model.reaction.lambda * (1.0 - factor);
        if growth != 0.0 {
            for (e, &v) in increment.iter_mut().zip(u) {
                *e += growth * pow_nonnegative(v, model.reaction.alpha);
            }
        }
        if !increment.iter().all(|e| e.is_finite()) {
            return Err(Error::NonFinite("explicit increment"));
        }

        let mut rhs: Vec<f64> = u.iter().zip(&increment).map(|(v, e)| v + dt * e).collect();
        let coefficient = match scheme {
            DiffusionScheme::BackwardEuler => dt,
            DiffusionScheme::CrankNicolson => {
                let mut lap = vec![0.0; u.len()];
                grid.laplacian_into(u, &mut lap);
                for (r, l) in rhs.iter_mut().zip(&lap) {
                    *r += 0.5 * dt * l;
                }
                0.5 * dt
            }
        };
        let mut next = vec![0.0; u.len()];
        self.implicit_solver(coefficient)?.solve_into(&rhs, &mut next)?;

        let cell = grid.cell_measure();
        let mass_before_clamp = next.iter().sum::<f64>() * cell;
        let mut clamped = 0.0;
        for v in next.iter_mut() {
            if *v < 0.0 {
                clamped -= *v;
                *v = 0.0;
            }
        }
        let clamped_mass = clamped * cell;
        let u_next = Field::new(grid, next)?;
        let chem = self.helmholtz.chemoattractant(&u_next, model.gamma)?;
        let report = StepReport {
            mass_before: state.u.integral(),
            mass_before_clamp,
            clamped_mass,
            nonlocal_factor: factor,
            undershoot: chem.undershoot,
        };
        Ok((
            SimState {
                t: state.t + dt,
                u: u_next,
                c: chem.c,
                dt,
                step_count: state.step_count + 1,
                clamped_mass: state.clamped_mass + clamped_mass,
            },
            report,
        ))
    }
}

/// Terminal status of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    BlowUp { time: f64 },
    SolverFailure { time: f64, message: String },
}

impl RunStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, RunStatus::Completed)
    }

    pub fn is_blow_up(&self) -> bool {
        matches!(self, RunStatus::BlowUp { .. })
    }
}

/// Whole-run extrema tracked at every step, not only at record times.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps: usize,
    pub t_end: f64,
    pub sup_linf: f64,
    pub min_u: f64,
    pub min_dt: f64,
    pub last_dt: f64,
    pub initial_mass: f64,
    /// Largest `|mass⁺ − clamped − mass(0)| / mass(0)` over the run.
    pub max_relative_mass_drift: f64,
    pub clamped_mass: f64,
    pub blow_up_threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    #[serde(flatten)]
    pub status: RunStatus,
    pub summary: RunSummary,
    pub rows: Vec<DiagnosticsRow>,
}

impl RunRecord {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.t)
    }
}

/// Runs from `u0` until `t_final` or blow-up.
pub fn run_simulation(u0: Field, params: &Params) -> Result<RunRecord> {
    run(u0, params, None)
}

/// Runs from `u0` with the comparison pair co-integrated; `margin` sets the
/// initial distance of `(ū, u̲)` from the datum's range.
pub fn run_sandwich(u0: Field, params: &Params, margin: f64) -> Result<RunRecord> {
    let s0 = comparison::make_initial(&u0, params.model.equilibrium(), margin)?;
    run(u0, params, Some(s0))
}

fn run(u0: Field, params: &Params, mut comparison: Option<ComparisonState>) -> Result<RunRecord> {
    params.validate()?;
    let model = params.model;
    let num = params.numerics;
    let xi = model.equilibrium();
    let sup0 = u0.max();
    let threshold = num.blow_up_threshold.unwrap_or(1e6 * xi.max(sup0));
    if !(sup0 < threshold) {
        return Err(Error::Parameter {
            name: "blow_up_threshold",
            value: threshold,
            requirement: "threshold > sup u0",
        });
    }

    let mut stepper = Stepper::new(*u0.grid(), *params)?;
    let mut state = stepper.initial_state(u0)?;
    let initial_mass = state.u.integral();
    let row = |s: &SimState, comp: Option<&ComparisonState>| diagnostics::record(s, comp, &model, num.lk_exponent);

    let mut rows = vec![row(&state, comparison.as_ref())?];
    let mut summary = RunSummary {
        steps: 0,
        t_end: 0.0,
        sup_linf: sup0,
        min_u: state.u.min(),
        min_dt: f64::INFINITY,
        last_dt: 0.0,
        initial_mass,
        max_relative_mass_drift: 0.0,
        clamped_mass: 0.0,
        blow_up_threshold: threshold,
    };
    let interval = num.record_interval();
    let mut next_record = interval;
    let end = num.t_final * (1.0 - 1e-12);

    let status = loop {
        if state.t >= end {
            break RunStatus::Completed;
        }
        if state.step_count >= num.max_steps {
            break RunStatus::SolverFailure {
                time: state.t,
                message: format!("step budget of {} exhausted", num.max_steps),
            };
        }
        let limit = if state.step_count == 0 { num.dt_initial } else { 2.0 * state.dt };
        let dt = stepper.adapt_dt(&state).min(limit);
        if !(dt >= num.dt_min) {
            break if state.u.max() > sup0 {
                RunStatus::BlowUp { time: state.t }
            } else {
                RunStatus::SolverFailure {
                    time: state.t,
                    message: format!("step size {dt:e} fell below dt_min without sup-norm growth"),
                }
            };
        }
        state.dt = dt.min(num.t_final - state.t);
        let (next, report) = match stepper.step(&state) {
            Ok(out) => out,
            Err(e) => {
                break RunStatus::SolverFailure {
                    time: state.t,
                    message: e.to_string(),
                }
            }
        };
        if let Some(c) = comparison.as_mut() {
            *c = comparison::advance(c, &model, state.dt);
        }
        state = next;

        let linf = state.u.max();
        summary.steps = state.step_count;
        summary.sup_linf = summary.sup_linf.max(linf);
        summary.min_u = summary.min_u.min(state.u.min());
        summary.min_dt = summary.min_dt.min(state.dt);
        summary.last_dt = state.dt;
        summary.clamped_mass = state.clamped_mass;
        if initial_mass > 0.0 {
            let drift = (report.mass_before_clamp - (state.clamped_mass - report.clamped_mass) - initial_mass).abs() / initial_mass;
            summary.max_relative_mass_drift = summary.max_relative_mass_drift.max(drift);
        }

        if !(linf <= threshold) {
            rows.push(row(&state, comparison.as_ref())?);
            break RunStatus::BlowUp { time: state.t };
        }
        if state.t >= next_record * (1.0 - 1e-12) {
            rows.push(row(&state, comparison.as_ref())?);
            while next_record <= state.t * (1.0 + 1e-12) {
                next_record += interval;
            }
        }
    };
    if rows.last().is_some_and(|r| r.t < state.t) {
        rows.push(row(&state, comparison.as_ref())?);
    }
    summary.t_end = state.t;
    if summary.min_dt == f64::INFINITY {
        summary.min_dt = 0.0;
    }
    Ok(RunRecord { status, summary, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{ModelParams, Numerics};
    use crate::reaction::ReactionParams;
    use std::f64::consts::PI;

    fn params(chi: f64, lambda: f64) -> Params {
        Params {
            model: ModelParams {
                n: 3,
                chi,
                m: 1.0,
                gamma: 1.0,
                reaction: ReactionParams::new(2.0, 4.0, 1.0, lambda).unwrap(),
            },
            numerics: Numerics::default(),
        }
    }

    #[test]
    fn divergence_vanishes_for_constant_c() {
        let g = Grid::unit_square(8).unwrap();
        let u = Field::from_fn(g, |x| 1.0 + x[0] * x[1]);
        let out = chemotactic_divergence(&u, &Field::constant(g, 2.0), 3.0, 1.5).unwrap();
        assert!(out.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn divergence_with_constant_u_is_scaled_laplacian() {
        let g = Grid::unit_interval(64).unwrap();
        let (u0, chi) = (1.7, 0.6);
        let u = Field::constant(g, u0);
        let c = Field::from_fn(g, |x| (PI * x[0]).cos() + x[0] * x[0]);
        let out = chemotactic_divergence(&u, &c, chi, 1.0).unwrap();
        let lap = c.laplacian_neumann().unwrap();
        for (o, l) in out.values().iter().zip(lap.values()) {
            assert!((o + chi * u0 * l).abs() < 1e-10 * (1.0 + l.abs()));
        }
    }

    #[test]
    fn divergence_integrates_to_zero() {
        let g = Grid::new(2, &[1.0, 1.5], &[10, 12]).unwrap();
        let u = Field::from_fn(g, |x| (3.0 * x[0]).sin().powi(2) + x[1]);
        let c = Field::from_fn(g, |x| (x[0] - 0.3).powi(2) * (2.0 * x[1]).cos());
        let out = chemotactic_divergence(&u, &c, 2.0, 1.7).unwrap();
        let scale = out.values().iter().map(|v| v.abs()).sum::<f64>() * g.cell_measure();
        assert!(out.integral().abs() <= 1e-12 * scale);
    }

    #[test]
    fn equilibrium_is_stationary() {
        let p = params(0.4, 1.0);
        let g = Grid::unit_interval(32).unwrap();
        let xi = p.model.equilibrium();
        let mut stepper = Stepper::new(g, p).unwrap();
        let mut s = stepper.initial_state(Field::constant(g, xi)).unwrap();
        for _ in 0..50 {
            s.dt = stepper.adapt_dt(&s);
            s = stepper.step(&s).unwrap().0;
        }
        assert!(s.u.distance_to_constant(xi) < 1e-12);
        assert!(s.c.distance_to_constant(xi) < 1e-12);
    }

    #[test]
    fn adapt_dt_examples() {
        let mut p = params(0.0, 0.0);
        p.numerics.dt_max = 0.02;
        let g = Grid::unit_interval(32).unwrap();
        let stepper = Stepper::new(g, p).unwrap();
        let s = stepper.initial_state(Field::from_fn(g, |x| 1.0 + x[0])).unwrap();
        assert_eq!(stepper.adapt_dt(&s), 0.25 * 0.02);

        let mut p = params(1.0, 0.0);
        p.numerics.dt_max = 1e3;
        let stepper = Stepper::new(g, p).unwrap();
        let u = Field::constant(g, 1.0);
        let c = Field::from_fn(g, |x| x[0]);
        let mut s = stepper.initial_state(u.clone()).unwrap();
        s.c = c.clone();
        let dt1 = stepper.adapt_dt(&s);
        s.c = c.map(|v| 2.0 * v);
        let dt2 = stepper.adapt_dt(&s);
        assert!((dt1 / dt2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn heat_mode_decays() {
        let mut p = params(0.0, 0.0);
        p.numerics.t_final = 0.1;
        p.numerics.dt_max = 1e-4 / 0.25;
        let g = Grid::unit_interval(128).unwrap();
        let u0 = Field::from_fn(g, |x| 1.0 + (PI * x[0]).cos());
        let rec = run_simulation(u0, &p).unwrap();
        assert!(rec.status.is_completed());
        let last = rec.rows.last().unwrap();
        let amp = (-PI * PI * 0.1f64).exp();
        // max of 1 + amp*cos over the cells is 1 + amp*cos(πh/2)
        assert!((last.linf - 1.0 - amp).abs() < 2e-3, "{}", last.linf);
    }

    #[test]
    fn mass_conserved_without_reaction() {
        let p = params(5.0, 0.0);
        let g = Grid::unit_square(16).unwrap();
        let mut stepper = Stepper::new(g, p).unwrap();
        let mut s = stepper
            .initial_state(Field::from_fn(g, |x| 1.0 + 0.5 * (PI * x[0]).cos() * (PI * x[1]).cos()))
            .unwrap();
        let m0 = s.u.integral();
        for _ in 0..100 {
            s.dt = stepper.adapt_dt(&s);
            let (next, report) = stepper.step(&s).unwrap();
            assert!((report.mass_before_clamp - report.mass_before).abs() <= 1e-12 * m0);
            s = next;
        }
        assert!((s.u.integral() - s.clamped_mass - m0).abs() < 1e-10 * m0);
    }
}
