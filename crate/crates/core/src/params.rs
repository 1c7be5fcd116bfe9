//! Model parameters and numerical controls.

use serde::{Deserialize, Serialize};

use crate::elliptic::SolverOptions;
use crate::error::{Error, Result};
use crate::reaction::ReactionParams;

/// Parameters of `u_t = Δu − χ∇·(u^m∇c) + λf(u)`, `−Δc + c = u^γ`.
///
/// `n` is the analysis dimension used by the regime classifier; it is
/// independent of the simulated grid dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: u32,
    pub chi: f64,
    pub m: f64,
    pub gamma: f64,
    #[serde(flatten)]
    pub reaction: ReactionParams,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::Parameter {
                name: "n",
                value: self.n as f64,
                requirement: "n >= 3",
            });
        }
        let ranges: [(&'static str, f64, bool, &'static str); 3] = [
            ("chi", self.chi, self.chi >= 0.0, "χ >= 0"),
            ("m", self.m, self.m >= 1.0, "m >= 1"),
            ("gamma", self.gamma, self.gamma >= 1.0, "γ >= 1"),
        ];
        for (name, value, ok, requirement) in ranges {
            if !(value.is_finite() && ok) {
                return Err(Error::Parameter {
                    name,
                    value,
                    requirement,
                });
            }
        }
        self.reaction.validate()
    }

    /// `ξ = σ^{-1/β}`.
    pub fn equilibrium(&self) -> f64 {
        self.reaction.equilibrium()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffusionScheme {
    #[default]
    BackwardEuler,
    CrankNicolson,
}

/// Time-stepping controls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub dt_initial: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub cfl_safety: f64,
    /// Sup-norm level treated as blow-up; `None` means
    /// `1e6 · max(ξ, sup u0)`.
    pub blow_up_threshold: Option<f64>,
    pub t_final: f64,
    /// Simulated time between diagnostics rows; `None` means `t_final / 100`.
    pub record_interval: Option<f64>,
    /// Exponent of the extra `L^k` column.
    pub lk_exponent: f64,
    pub diffusion: DiffusionScheme,
    pub solver: SolverOptions,
    pub max_steps: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            dt_initial: 1e-4,
            dt_min: 1e-12,
            dt_max: 1e-2,
            cfl_safety: 0.25,
            blow_up_threshold: None,
            t_final: 10.0,
            record_interval: None,
            lk_exponent: 4.0,
            diffusion: DiffusionScheme::BackwardEuler,
            solver: SolverOptions::default(),
            max_steps: 50_000_000,
        }
    }
}

impl Numerics {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt_min", self.dt_min),
            ("dt_initial", self.dt_initial),
            ("dt_max", self.dt_max),
            ("t_final", self.t_final),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Parameter {
                    name,
                    value,
                    requirement: "positive and finite",
                });
            }
        }
        if !(self.dt_min < self.dt_initial && self.dt_initial <= self.dt_max) {
            return Err(Error::Parameter {
                name: "dt_initial",
                value: self.dt_initial,
                requirement: "dt_min < dt_initial <= dt_max",
            });
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety < 1.0) {
            return Err(Error::Parameter {
                name: "cfl_safety",
                value: self.cfl_safety,
                requirement: "0 < cfl_safety < 1",
            });
        }
        if let Some(th) = self.blow_up_threshold {
            if !(th.is_finite() && th > 0.0) {
                return Err(Error::Parameter {
                    name: "blow_up_threshold",
                    value: th,
                    requirement: "positive and finite",
                });
            }
        }
        if let Some(r) = self.record_interval {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::Parameter {
                    name: "record_interval",
                    value: r,
                    requirement: "positive and finite",
                });
            }
        }
        if self.lk_exponent.is_nan() || self.lk_exponent < 1.0 {
            return Err(Error::InvalidExponent(self.lk_exponent));
        }
        Ok(())
    }

    pub fn record_interval(&self) -> f64 {
        self.record_interval.unwrap_or(self.t_final / 100.0)
    }
}

/// Everything the time stepper needs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub model: ModelParams,
    #[serde(default)]
    pub numerics: Numerics,
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.numerics.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> ModelParams {
        ModelParams {
            n: 3,
            chi: 0.4,
            m: 1.0,
            gamma: 1.0,
            reaction: ReactionParams::new(2.0, 4.0, 1.0, 1.0).unwrap(),
        }
    }

    #[test]
    fn json_layout_is_flat() {
        let text = serde_json::to_string(&model()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["n", "chi", "m", "gamma", "alpha", "beta", "sigma", "lambda"] {
            assert!(v.get(key).is_some(), "{key} missing in {text}");
        }
        assert_eq!(serde_json::from_str::<ModelParams>(&text).unwrap(), model());
    }

    #[test]
    fn validation() {
        assert!(model().validate().is_ok());
        assert!(ModelParams { n: 2, ..model() }.validate().is_err());
        assert!(ModelParams { m: 0.5, ..model() }.validate().is_err());
        assert!(ModelParams { chi: -1.0, ..model() }.validate().is_err());
        let mut p = Params {
            model: model(),
            numerics: Numerics::default(),
        };
        assert!(p.validate().is_ok());
        p.numerics.dt_min = p.numerics.dt_initial;
        assert!(p.validate().is_err());
        p.numerics = Numerics {
            cfl_safety: 1.0,
            ..Numerics::default()
        };
        assert!(p.validate().is_err());
    }
}
