//! The nonlocal logistic source `λ f(u)` with `f(u) = u^α (1 − σ ⨍ u^β)`.

use serde::{Deserialize, Serialize};

use crate::elliptic::pow_nonnegative;
use crate::error::{Error, Result};
use crate::grid::Field;

/// Exponents and rates of the nonlocal reaction.
///
/// `lambda = 0` switches the reaction off; the remaining ranges are
/// `alpha >= 1`, `beta > 1`, `sigma > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReactionParams {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub lambda: f64,
}

impl ReactionParams {
    pub fn new(alpha: f64, beta: f64, sigma: f64, lambda: f64) -> Result<Self> {
        let p = ReactionParams {
            alpha,
            beta,
            sigma,
            lambda,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.alpha, "alpha", self.alpha >= 1.0, "α >= 1")?;
        check(self.beta, "beta", self.beta > 1.0, "β > 1")?;
        check(self.sigma, "sigma", self.sigma > 0.0, "σ > 0")?;
        check(self.lambda, "lambda", self.lambda >= 0.0, "λ >= 0")
    }

    /// The constant equilibrium `ξ = σ^{-1/β}`.
    pub fn equilibrium(&self) -> f64 {
        self.sigma.powf(-1.0 / self.beta)
    }
}

fn check(value: f64, name: &'static str, ok: bool, requirement: &'static str) -> Result<()> {
    if value.is_finite() && ok {
        Ok(())
    } else {
        Err(Error::Parameter {
            name,
            value,
            requirement,
        })
    }
}

/// `σ ⨍_Ω u^β dx`, one scalar per time level.
pub fn nonlocal_factor(u: &Field, p: &ReactionParams) -> Result<f64> {
    u.ensure_finite("cell density")?;
    let mean = u.values().iter().map(|&v| pow_nonnegative(v, p.beta)).sum::<f64>() / u.values().len() as f64;
    Ok(p.sigma * mean)
}

/// Pointwise `λ u^α (1 − σ ⨍ u^β)`.
pub fn reaction_term(u: &Field, p: &ReactionParams) -> Result<Field> {
    let factor = nonlocal_factor(u, p)?;
    Ok(reaction_with_factor(u, p, factor))
}

/// `λ u^α (1 − factor)` for a precomputed nonlocal factor.
pub fn reaction_with_factor(u: &Field, p: &ReactionParams, factor: f64) -> Field {
    let scale = p.lambda * (1.0 - factor);
    u.map(|v| scale * pow_nonnegative(v, p.alpha))
}

/// Bound on the sup-norm Lipschitz constant of `λ f` near `u`.
///
/// Local part `α S^{α-1} |1 − F|` plus the nonlocal part
/// `σ β ⨍ u^{β-1} · S^α`, with `S = sup u` and `F` the nonlocal factor.
pub fn reaction_lipschitz(u: &Field, p: &ReactionParams, factor: f64) -> f64 {
    if p.lambda == 0.0 {
        return 0.0;
    }
    let sup = u.max().max(0.0);
    if sup == 0.0 {
        return if p.alpha == 1.0 { p.lambda } else { 0.0 };
    }
    let local = p.alpha * sup.powf(p.alpha - 1.0) * (1.0 - factor).abs();
    let mean_pow = u.values().iter().map(|&v| pow_nonnegative(v, p.beta - 1.0)).sum::<f64>() / u.values().len() as f64;
    let nonlocal = p.sigma * p.beta * mean_pow * sup.powf(p.alpha);
    p.lambda * (local + nonlocal)
}
