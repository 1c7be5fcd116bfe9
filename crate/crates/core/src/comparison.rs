//! Spatially homogeneous super- and sub-solutions `(ū, u̲)`.
//!
//! They solve
//!
//! ```text
//! ū' = χ ū^m (ū^γ − u̲^γ) + λσ ū^α (ξ^β − ū^β)
//! u̲' = χ u̲^m (u̲^γ − ū^γ) + λσ u̲^α (ξ^β − u̲^β)
//! ```
//!
//! with `ξ = σ^{-1/β}`. Internally the state is kept as the deviations
//! `ū − ξ` and `ξ − u̲`, and every power difference is evaluated through
//! `expm1`/`ln_1p`, so the ordering `u̲ < ξ < ū` stays representable long
//! after `ū` and `u̲` agree with `ξ` to all printed digits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::params::ModelParams;

/// The constant steady state `u ≡ ξ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    xi: f64,
}

impl Equilibrium {
    pub fn new(sigma: f64, beta: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::Parameter {
                name: "sigma",
                value: sigma,
                requirement: "σ > 0",
            });
        }
        if !(beta.is_finite() && beta > 1.0) {
            return Err(Error::Parameter {
                name: "beta",
                value: beta,
                requirement: "β > 1",
            });
        }
        Ok(Equilibrium {
            xi: sigma.powf(-1.0 / beta),
        })
    }

    pub fn of(model: &ModelParams) -> Self {
        Equilibrium {
            xi: model.equilibrium(),
        }
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }
}

/// Super/sub-solution pair at time `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonState {
    pub t: f64,
    pub xi: f64,
    /// `ū − ξ`.
    pub above: f64,
    /// `ξ − u̲`.
    pub below: f64,
}

impl ComparisonState {
    pub fn from_values(t: f64, upper: f64, lower: f64, xi: f64) -> Self {
        ComparisonState {
            t,
            xi,
            above: upper - xi,
            below: xi - lower,
        }
    }

    /// `ū`.
    pub fn upper(&self) -> f64 {
        self.xi + self.above
    }

    /// `u̲`.
    pub fn lower(&self) -> f64 {
        self.xi - self.below
    }

    /// `ū − u̲`.
    pub fn gap(&self) -> f64 {
        self.above + self.below
    }

    /// `|ū − ξ| + |u̲ − ξ|`.
    pub fn distance_to_equilibrium(&self) -> f64 {
        self.above.abs() + self.below.abs()
    }

    fn is_finite(&self) -> bool {
        self.above.is_finite() && self.below.is_finite()
    }

    /// `0 < u̲ ≤ ξ ≤ ū`, with the inequalities that are strict in `reference`
    /// required to stay strict.
    fn ordered_like(&self, reference: &ComparisonState) -> bool {
        let upper_ok = if reference.above > 0.0 {
            self.above > 0.0
        } else {
            self.above >= 0.0
        };
        let lower_ok = if reference.below > 0.0 {
            self.below > 0.0
        } else {
            self.below >= 0.0
        };
        self.is_finite() && upper_ok && lower_ok && self.below < self.xi
    }
}

/// `(x + d)^p − x^p` without cancellation, for `x > 0`, `d > −x`.
fn pow_increment(x: f64, d: f64, p: f64) -> f64 {
    x.powf(p) * (p * (d / x).ln_1p()).exp_m1()
}

/// Time derivatives of the deviations `(ū − ξ, ξ − u̲)`.
fn deviation_rhs(xi: f64, above: f64, below: f64, model: &ModelParams) -> (f64, f64) {
    let r = &model.reaction;
    let upper = xi + above;
    let lower = xi - below;
    let attraction = pow_increment(xi, above, model.gamma) - pow_increment(xi, -below, model.gamma);
    let rate = r.lambda * r.sigma * xi.powf(r.beta);
    let d_above =
        model.chi * upper.powf(model.m) * attraction - rate * upper.powf(r.alpha) * (r.beta * (above / xi).ln_1p()).exp_m1();
    let d_below =
        model.chi * lower.powf(model.m) * attraction + rate * lower.powf(r.alpha) * (r.beta * (-below / xi).ln_1p()).exp_m1();
    (d_above, d_below)
}

/// Right-hand side `(ū', u̲')` of the comparison system.
pub fn comparison_rhs(s: &ComparisonState, model: &ModelParams) -> Result<(f64, f64)> {
    if !(s.upper() > 0.0 && s.lower() > 0.0) {
        return Err(Error::Parameter {
            name: "comparison state",
            value: s.lower().min(s.upper()),
            requirement: "ū, u̲ > 0",
        });
    }
    let (da, db) = deviation_rhs(s.xi, s.above, s.below, model);
    Ok((da, -db))
}

/// Rough spectral scale of the comparison system at `s`, used to pick RK4 steps.
pub fn stiffness(s: &ComparisonState, model: &ModelParams) -> f64 {
    let r = &model.reaction;
    let big = s.upper().max(s.xi);
    let small = s.lower().max(0.0);
    let attraction = (big.powf(model.gamma) - small.powf(model.gamma)).abs();
    let chem = model.chi * (model.m * big.powf(model.m - 1.0) * attraction + 2.0 * model.gamma * big.powf(model.m + model.gamma - 1.0));
    let logistic = r.lambda
        * r.sigma
        * (r.alpha * big.powf(r.alpha - 1.0) * (big.powf(r.beta) - r.sigma.recip()).abs() + r.beta * big.powf(r.alpha + r.beta - 1.0));
    chem + logistic
}

/// A step size for which RK4 is comfortably stable at `s`.
pub fn suggest_dt(s: &ComparisonState, model: &ModelParams) -> f64 {
    let k = stiffness(s, model);
    if k > 0.0 {
        0.25 / k
    } else {
        0.1
    }
}

/// One classical RK4 step of size `dt`.
pub fn rk4_step(s: &ComparisonState, model: &ModelParams, dt: f64) -> ComparisonState {
    let xi = s.xi;
    let f = |a: f64, b: f64| deviation_rhs(xi, a, b, model);
    let (a, b) = (s.above, s.below);
    let k1 = f(a, b);
    let k2 = f(a + 0.5 * dt * k1.0, b + 0.5 * dt * k1.1);
    let k3 = f(a + 0.5 * dt * k2.0, b + 0.5 * dt * k2.1);
    let k4 = f(a + dt * k3.0, b + dt * k3.1);
    ComparisonState {
        t: s.t + dt,
        xi,
        above: a + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        below: b + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    }
}

/// Advances `s` by `dt` using substeps no larger than [`suggest_dt`].
pub fn advance(s: &ComparisonState, model: &ModelParams, dt: f64) -> ComparisonState {
    let limit = suggest_dt(s, model);
    let substeps = (dt / limit).ceil().max(1.0) as usize;
    let h = dt / substeps as f64;
    let mut cur = *s;
    for _ in 0..substeps {
        cur = rk4_step(&cur, model, h);
    }
    cur.t = s.t + dt;
    cur
}

/// Initial super/sub-solution values for a PDE datum `u0`.
///
/// `ū(0) = max(max u0, ξ)(1 + margin)` and `u̲(0) = min(min u0, ξ)(1 − margin)`,
/// so that `u̲(0) < min u0 ≤ max u0 < ū(0)` and `u̲(0) < ξ < ū(0)`.
pub fn make_initial(u0: &Field, xi: f64, margin: f64) -> Result<ComparisonState> {
    if !(margin > 0.0 && margin < 1.0) {
        return Err(Error::Parameter {
            name: "margin",
            value: margin,
            requirement: "0 < margin < 1",
        });
    }
    u0.ensure_finite("initial datum")?;
    let (lo, hi) = (u0.min(), u0.max());
    if !(lo > 0.0) {
        return Err(Error::Parameter {
            name: "min u0",
            value: lo,
            requirement: "u0 > 0 everywhere (a positive lower bound is required)",
        });
    }
    let upper = hi.max(xi) * (1.0 + margin);
    let lower = lo.min(xi) * (1.0 - margin);
    Ok(ComparisonState::from_values(0.0, upper, lower, xi))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrationOptions {
    pub t_final: f64,
    pub dt: f64,
    pub max_halvings: usize,
    /// Approximate number of recorded states (the first and last are always kept).
    pub samples: usize,
    /// `ū` above `escape_factor · max(ξ, ū(0))` ends the run as escaped.
    pub escape_factor: f64,
}

impl IntegrationOptions {
    pub fn new(t_final: f64, dt: f64) -> Self {
        IntegrationOptions {
            t_final,
            dt,
            max_halvings: 6,
            samples: 1000,
            escape_factor: 1e8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    /// `ū` left every bounded set before `t_final` (finite-time growth).
    Escaped { t: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<ComparisonState>,
    pub termination: Termination,
    pub dt: f64,
    pub halvings: usize,
}

impl Trajectory {
    pub fn last(&self) -> &ComparisonState {
        self.points.last().expect("trajectory has at least the initial point")
    }
}

/// Integrates the comparison system with fixed-step RK4.
///
/// The run is restarted with half the step whenever the ordering
/// `0 < u̲ < ξ < ū` (strictness as in `s0`) fails or the state turns
/// non-finite, up to `max_halvings` times.
pub fn integrate_comparison(s0: &ComparisonState, model: &ModelParams, opts: &IntegrationOptions) -> Result<Trajectory> {
    if !(s0.above >= 0.0 && s0.below >= 0.0 && s0.lower() > 0.0 && s0.is_finite()) {
        return Err(Error::Parameter {
            name: "comparison initial state",
            value: s0.lower(),
            requirement: "0 < u̲(0) <= ξ <= ū(0)",
        });
    }
    if !(opts.t_final >= 0.0 && opts.dt > 0.0) {
        return Err(Error::Parameter {
            name: "dt",
            value: opts.dt,
            requirement: "dt > 0 and t_final >= 0",
        });
    }
    let steps = (opts.t_final / opts.dt).ceil().max(1.0) as usize;
    let mut failure = None;
    for halvings in 0..=opts.max_halvings {
        let n = steps << halvings;
        match integrate_fixed(s0, model, opts, n) {
            Ok(mut traj) => {
                traj.halvings = halvings;
                return Ok(traj);
            }
            Err(partial) => failure = Some(partial),
        }
    }
    let (t_fail, mut partial) = failure.expect("at least one attempt");
    // Growth past the escape level that no step refinement can follow is
    // finite-time escape, not an ordering failure.
    let escape_level = ESCAPE_GROWTH * s0.upper().max(s0.xi);
    let last = *partial.last();
    if last.upper() > escape_level && last.above > s0.above {
        partial.termination = Termination::Escaped { t: last.t };
        partial.halvings = opts.max_halvings;
        return Ok(partial);
    }
    Err(Error::OrderingViolation {
        t: t_fail,
        halvings: opts.max_halvings,
    })
}

/// Growth factor of `ū` beyond which an unresolvable step counts as escape.
const ESCAPE_GROWTH: f64 = 10.0;

/// On ordering violation returns the failure time and the ordered prefix.
fn integrate_fixed(
    s0: &ComparisonState,
    model: &ModelParams,
    opts: &IntegrationOptions,
    n: usize,
) -> std::result::Result<Trajectory, (f64, Trajectory)> {
    let dt = opts.t_final / n as f64;
    let stride = (n / opts.samples.max(1)).max(1);
    let cap = opts.escape_factor * s0.upper().max(s0.xi);
    let mut traj = Trajectory {
        points: Vec::with_capacity(n / stride + 2),
        termination: Termination::Completed,
        dt,
        halvings: 0,
    };
    traj.points.push(*s0);
    let mut cur = *s0;
    for step in 1..=n {
        let mut next = rk4_step(&cur, model, dt);
        next.t = s0.t + step as f64 * dt;
        if !next.ordered_like(s0) {
            if traj.points.last().is_some_and(|p| p.t < cur.t) {
                traj.points.push(cur);
            }
            return Err((next.t, traj));
        }
        if next.upper() > cap {
            traj.points.push(next);
            traj.termination = Termination::Escaped { t: next.t };
            return Ok(traj);
        }
        if step % stride == 0 || step == n {
            traj.points.push(next);
        }
        cur = next;
    }
    Ok(traj)
}

/// Least-squares slope of `log(ū − u̲)` against `t` over the final half of
/// the trajectory. Fails with [`Error::NoRate`] unless the slope is negative.
pub fn estimate_rate(traj: &Trajectory) -> Result<f64> {
    let (t0, t1) = match (traj.points.first(), traj.points.last()) {
        (Some(a), Some(b)) if b.t > a.t => (a.t, b.t),
        _ => return Err(Error::NoRate),
    };
    let mid = 0.5 * (t0 + t1);
    let samples: Vec<(f64, f64)> = traj
        .points
        .iter()
        .filter(|p| p.t >= mid && p.gap() > 1e-290)
        .map(|p| (p.t, p.gap().ln()))
        .collect();
    if samples.len() < 2 {
        return Err(Error::NoRate);
    }
    let n = samples.len() as f64;
    let mean_t = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let mean_y = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let (num, den) = samples.iter().fold((0.0, 0.0), |(num, den), &(t, y)| {
        (num + (t - mean_t) * (y - mean_y), den + (t - mean_t) * (t - mean_t))
    });
    if den == 0.0 {
        return Err(Error::NoRate);
    }
    let slope = num / den;
    if slope < 0.0 {
        Ok(slope)
    } else {
        Err(Error::NoRate)
    }
}

/// Bookkeeping for the convergence hypotheses `α + β ≥ γ + m` and `λ > 2χ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConditions {
    /// `max{α − 1, γ + m − 1}`.
    pub delta_low: f64,
    /// `α + β − 1`.
    pub delta_high: f64,
    /// `λ − 2χ`, the checkable form of the rate margin.
    pub rate_margin: f64,
    pub holds: bool,
}

impl ConvergenceConditions {
    pub fn evaluate(model: &ModelParams) -> Self {
        let r = &model.reaction;
        let delta_low = (r.alpha - 1.0).max(model.gamma + model.m - 1.0);
        let delta_high = r.alpha + r.beta - 1.0;
        let rate_margin = r.lambda - 2.0 * model.chi;
        ConvergenceConditions {
            delta_low,
            delta_high,
            rate_margin,
            holds: r.alpha + r.beta >= model.gamma + model.m && r.lambda > 2.0 * model.chi,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::reaction::ReactionParams;
    use approx::assert_relative_eq;

    fn model(chi: f64, lambda: f64, sigma: f64, alpha: f64, beta: f64, gamma: f64, m: f64) -> ModelParams {
        ModelParams {
            n: 3,
            chi,
            m,
            gamma,
            reaction: ReactionParams::new(alpha, beta, sigma, lambda).unwrap(),
        }
    }

    #[test]
    fn equilibrium_examples() {
        assert_eq!(Equilibrium::new(1.0, 2.0).unwrap().xi(), 1.0);
        assert_relative_eq!(Equilibrium::new(4.0, 2.0).unwrap().xi(), 0.5);
        assert_relative_eq!(Equilibrium::new(0.25, 2.0).unwrap().xi(), 2.0);
        assert!(Equilibrium::new(0.0, 2.0).is_err());
        assert!(Equilibrium::new(-1.0, 2.0).is_err());
        for (s, b) in [(0.3, 1.5), (7.0, 3.2)] {
            let xi = Equilibrium::new(s, b).unwrap().xi();
            assert_relative_eq!(s * xi.powf(b), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn rhs_examples() {
        let p = model(1.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0);
        let s = ComparisonState::from_values(0.0, 2.0, 1.0, 1.0);
        let (du, dl) = comparison_rhs(&s, &p).unwrap();
        assert_relative_eq!(du, -4.0, epsilon = 1e-14);
        assert_relative_eq!(dl, -1.0, epsilon = 1e-14);

        let p = model(0.7, 1.3, 2.0, 1.5, 2.5, 1.2, 1.1);
        let xi = p.equilibrium();
        let (du, dl) = comparison_rhs(&ComparisonState::from_values(0.0, xi, xi, xi), &p).unwrap();
        assert_eq!((du, dl), (0.0, 0.0));
    }

    #[test]
    fn rhs_without_chemotaxis_is_logistic() {
        let p = model(0.0, 2.0, 1.0, 1.5, 2.0, 1.0, 1.0);
        let s = ComparisonState::from_values(0.0, 1.5, 0.5, 1.0);
        let (du, dl) = comparison_rhs(&s, &p).unwrap();
        assert_relative_eq!(du, 2.0 * 1.5f64.powf(1.5) * (1.0 - 2.25), epsilon = 1e-13);
        assert!(du < 0.0 && dl > 0.0);
    }

    #[test]
    fn rhs_rejects_nonpositive_state() {
        let p = model(1.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0);
        assert!(comparison_rhs(&ComparisonState::from_values(0.0, 2.0, 0.0, 1.0), &p).is_err());
    }

    #[test]
    fn make_initial_examples() {
        let g = Grid::unit_interval(16).unwrap();
        let xi = 1.7;
        let s = make_initial(&Field::constant(g, xi), xi, 0.1).unwrap();
        assert_relative_eq!(s.upper(), 1.1 * xi, epsilon = 1e-15);
        assert_relative_eq!(s.lower(), 0.9 * xi, epsilon = 1e-15);

        let u0 = Field::from_fn(g, |x| 0.5 + 1.5 * x[0]);
        let u0 = Field::new(g, {
            let mut v = u0.into_values();
            v[0] = 0.5;
            v[15] = 2.0;
            v
        })
        .unwrap();
        let s = make_initial(&u0, 1.0, 0.01).unwrap();
        assert_relative_eq!(s.upper(), 2.02, epsilon = 1e-15);
        assert_relative_eq!(s.lower(), 0.495, epsilon = 1e-15);

        let mut z = Field::constant(g, 1.0);
        z.values_mut()[4] = 0.0;
        assert!(make_initial(&z, 1.0, 0.01).is_err());
    }

    #[test]
    fn fixed_point_trajectory_is_constant() {
        let p = model(0.3, 1.0, 2.0, 2.0, 2.0, 1.0, 1.0);
        let xi = p.equilibrium();
        let s0 = ComparisonState::from_values(0.0, xi, xi, xi);
        let traj = integrate_comparison(&s0, &p, &IntegrationOptions::new(5.0, 0.01)).unwrap();
        assert!(traj.points.iter().all(|s| s.above == 0.0 && s.below == 0.0));
        assert_eq!(estimate_rate(&traj), Err(Error::NoRate));
    }

    #[test]
    fn converging_trajectory_has_negative_rate() {
        let p = model(0.4, 1.0, 1.0, 2.0, 4.0, 1.0, 1.0);
        let xi = p.equilibrium();
        let s0 = ComparisonState::from_values(0.0, 1.1 * xi, 0.9 * xi, xi);
        let traj = integrate_comparison(&s0, &p, &IntegrationOptions::new(50.0, 1e-3)).unwrap();
        assert_eq!(traj.termination, Termination::Completed);
        let gaps: Vec<f64> = traj.points.iter().map(|s| s.gap()).collect();
        assert!(gaps.windows(2).all(|w| w[1] <= w[0]));
        assert!(traj.last().distance_to_equilibrium() < 1e-10);
        let rate = estimate_rate(&traj).unwrap();
        // linearized gap rate is λβξ^{α−1} − 2χγξ^{m+γ−1} = 4 − 0.8
        assert_relative_eq!(rate, -3.2, max_relative = 1e-3);
    }

    #[test]
    fn no_reaction_gap_does_not_decay() {
        let p = model(0.5, 0.0, 1.0, 1.0, 2.0, 1.0, 1.0);
        let s0 = ComparisonState::from_values(0.0, 1.1, 0.9, 1.0);
        let traj = integrate_comparison(&s0, &p, &IntegrationOptions::new(2.0, 1e-3)).unwrap();
        let gaps: Vec<f64> = traj.points.iter().map(|s| s.gap()).collect();
        assert!(gaps.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(estimate_rate(&traj), Err(Error::NoRate));
    }

    #[test]
    fn unstable_step_is_halved() {
        let p = model(0.1, 5.0, 1.0, 2.0, 3.0, 1.0, 1.0);
        let s0 = ComparisonState::from_values(0.0, 3.0, 0.5, 1.0);
        let dt = 40.0 * suggest_dt(&s0, &p);
        let traj = integrate_comparison(&s0, &p, &IntegrationOptions::new(1.0, dt)).unwrap();
        assert!(traj.halvings > 0);
        assert!(traj.points.iter().all(|s| s.lower() > 0.0 && s.below > 0.0 && s.above > 0.0));
    }

    #[test]
    fn escape_is_reported() {
        // α + β < γ + m: chemotactic growth of ū outpaces the damping
        let p = model(2.0, 0.1, 1.0, 1.0, 1.1, 2.0, 2.0);
        let s0 = ComparisonState::from_values(0.0, 3.0, 0.5, 1.0);
        let traj = integrate_comparison(&s0, &p, &IntegrationOptions::new(10.0, 1e-4)).unwrap();
        assert!(matches!(traj.termination, Termination::Escaped { .. }));
    }

    #[test]
    fn convergence_conditions() {
        let c = ConvergenceConditions::evaluate(&model(0.4, 1.0, 1.0, 2.0, 4.0, 1.0, 1.0));
        assert!(c.holds);
        assert_eq!(c.delta_low, 1.0);
        assert_eq!(c.delta_high, 5.0);
        assert!(!ConvergenceConditions::evaluate(&model(0.5, 1.0, 1.0, 2.0, 4.0, 1.0, 1.0)).holds);
    }
}
