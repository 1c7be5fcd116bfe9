//! Classification of parameter vectors against the global-existence,
//! collapse-prevention and convergence conditions.
//!
//! Existence branches:
//!
//! ```text
//! branch 1:  γ + m ≤ α < 1 + 2β/n
//! branch 2:  (n + 4)/2 − β < α < γ + m
//! ```
//!
//! Collapse prevention holds when `β > (n/2)(γ + m − 1)`. Convergence to the
//! constant equilibrium is guaranteed on either branch when additionally
//! `α + β ≥ γ + m` and `λ > 2χ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comparison::ConvergenceConditions;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::reaction::ReactionParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Existence {
    GlobalBranch1,
    GlobalBranch2,
    Unclassified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollapsePrevention {
    Holds,
    OpenRegime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convergence {
    Guaranteed,
    NotGuaranteed,
}

/// Every evaluated threshold, for reporting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeDetails {
    /// `γ + m`.
    pub gamma_plus_m: f64,
    /// `1 + 2β/n`.
    pub branch1_upper: f64,
    /// `(n + 4)/2 − β`.
    pub branch2_lower: f64,
    /// `(n/2)(γ + m − 1)`.
    pub collapse_threshold: f64,
    /// `α + β`.
    pub alpha_plus_beta: f64,
    /// `2χ`.
    pub two_chi: f64,
    pub convergence: ConvergenceConditions,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub existence: Existence,
    pub collapse_prevention: CollapsePrevention,
    pub convergence: Convergence,
    pub details: RegimeDetails,
}

fn require(name: &'static str, value: f64, ok: bool, requirement: &'static str) -> Result<()> {
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

/// Classifies `model`; requires `n ≥ 3`, `α, γ, m ≥ 1`, `β > 1` and `χ, λ, σ > 0`.
pub fn classify(model: &ModelParams) -> Result<RegimeReport> {
    model.validate()?;
    require("chi", model.chi, model.chi > 0.0, "χ > 0")?;
    require("lambda", model.reaction.lambda, model.reaction.lambda > 0.0, "λ > 0")?;

    let r = &model.reaction;
    let n = model.n as f64;
    let gamma_plus_m = model.gamma + model.m;
    let branch1_upper = 1.0 + 2.0 * r.beta / n;
    let branch2_lower = (n + 4.0) / 2.0 - r.beta;
    let collapse_threshold = n / 2.0 * (gamma_plus_m - 1.0);

    let existence = if gamma_plus_m <= r.alpha && r.alpha < branch1_upper {
        Existence::GlobalBranch1
    } else if branch2_lower < r.alpha && r.alpha < gamma_plus_m {
        Existence::GlobalBranch2
    } else {
        Existence::Unclassified
    };
    let collapse_prevention = if r.beta > collapse_threshold {
        CollapsePrevention::Holds
    } else {
        CollapsePrevention::OpenRegime
    };
    let conditions = ConvergenceConditions::evaluate(model);
    let convergence = if existence != Existence::Unclassified && conditions.holds {
        Convergence::Guaranteed
    } else {
        Convergence::NotGuaranteed
    };
    Ok(RegimeReport {
        existence,
        collapse_prevention,
        convergence,
        details: RegimeDetails {
            gamma_plus_m,
            branch1_upper,
            branch2_lower,
            collapse_threshold,
            alpha_plus_beta: r.alpha + r.beta,
            two_chi: 2.0 * model.chi,
            convergence: conditions,
        },
    })
}

/// Cartesian grid of parameter values; `n` and `σ` are held fixed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub n: u32,
    pub sigma: f64,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub m: Vec<f64>,
    pub chi: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl SweepGrid {
    fn axes(&self) -> [(&'static str, &[f64]); 6] {
        [
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("gamma", &self.gamma),
            ("m", &self.m),
            ("chi", &self.chi),
            ("lambda", &self.lambda),
        ]
    }

    pub fn len(&self) -> usize {
        self.axes().iter().map(|(_, v)| v.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parameter vector at lexicographic position `idx` (α slowest, λ fastest).
    pub fn point(&self, mut idx: usize) -> ModelParams {
        let axes = self.axes();
        let mut pick = [0.0; 6];
        for (slot, (_, values)) in pick.iter_mut().zip(axes.iter()).rev() {
            *slot = values[idx % values.len()];
            idx /= values.len();
        }
        let [alpha, beta, gamma, m, chi, lambda] = pick;
        ModelParams {
            n: self.n,
            chi,
            m,
            gamma,
            reaction: ReactionParams {
                alpha,
                beta,
                sigma: self.sigma,
                lambda,
            },
        }
    }
}

/// Classifies every point of `grid` in lexicographic order.
pub fn sweep(grid: &SweepGrid) -> Result<Vec<(ModelParams, RegimeReport)>> {
    if let Some((name, _)) = grid.axes().iter().find(|(_, v)| v.is_empty()) {
        return Err(Error::EmptySweep(name));
    }
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let p = grid.point(idx);
            classify(&p).map(|r| (p, r))
        })
        .collect()
}
