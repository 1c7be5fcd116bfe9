//! Run configuration: JSON schema, defaults and validation.

use std::path::{Path, PathBuf};

use chemo_core::{Grid, ModelParams, Numerics, Params, SweepGrid};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Simulate,
    Sandwich,
    Ode,
    Sweep,
    Probe,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Simulate => "simulate",
            Scenario::Sandwich => "sandwich",
            Scenario::Ode => "ode",
            Scenario::Sweep => "sweep",
            Scenario::Probe => "probe",
        }
    }

    fn needs_grid(self) -> bool {
        matches!(self, Scenario::Simulate | Scenario::Sandwich | Scenario::Probe)
    }
}

/// Initial density `u0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialDatum {
    Constant {
        value: f64,
    },
    /// `floor + amplitude · exp(−|x − center|² / (2 width²))`.
    GaussianBump {
        center: Vec<f64>,
        width: f64,
        amplitude: f64,
        #[serde(default)]
        floor: f64,
    },
    /// `ξ (1 + amplitude · Π_d cos(π x_d / L_d))`.
    CosinePerturbation {
        amplitude: f64,
    },
    /// `base (1 + Σ a_k φ_k)` over the lowest Neumann modes with seeded
    /// coefficients, `Σ|a_k| ≤ amplitude`; `base` defaults to `ξ`.
    RandomModes {
        modes: usize,
        amplitude: f64,
        #[serde(default)]
        base: Option<f64>,
    },
    /// JSON array of cell values, x fastest; relative paths resolve against
    /// the config file.
    File {
        path: PathBuf,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputNames {
    pub csv: String,
    pub json: String,
}

impl Default for OutputNames {
    fn default() -> Self {
        OutputNames {
            csv: "diagnostics.csv".into(),
            json: "run.json".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SandwichOptions {
    /// Relative gap between the datum's range and `(u̲(0), ū(0))`.
    pub margin: f64,
}

impl Default for SandwichOptions {
    fn default() -> Self {
        SandwichOptions { margin: 0.01 }
    }
}

/// Comparison-ODE run; unset fields derive from the model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdeOptions {
    /// Defaults to `50/λ`.
    pub t_final: Option<f64>,
    /// Defaults to the stiffness-based step, capped at `t_final/100`.
    pub dt: Option<f64>,
    /// `ū(0)`; defaults to `1.5 ξ`.
    pub upper: Option<f64>,
    /// `u̲(0)`; defaults to `0.5 ξ`.
    pub lower: Option<f64>,
    pub max_halvings: Option<usize>,
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeOptions {
    /// λ values to run in turn; empty means the configured λ only.
    pub lambdas: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    pub params: ModelParams,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialDatum>,
    #[serde(default)]
    pub output: OutputNames,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sandwich: SandwichOptions,
    #[serde(default)]
    pub ode: OdeOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepGrid>,
    #[serde(default)]
    pub probe: ProbeOptions,
}

impl RunConfig {
    pub fn run_params(&self) -> Params {
        Params {
            model: self.params,
            numerics: self.numerics,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenario != Scenario::Sweep {
            self.run_params().validate()?;
        }
        if self.scenario.needs_grid() {
            let grid = self.grid.as_ref().ok_or(CliError::Missing("grid"))?;
            let initial = self.initial.as_ref().ok_or(CliError::Missing("initial"))?;
            initial.validate(grid, self.scenario)?;
        }
        match self.scenario {
            Scenario::Sandwich => {
                let m = self.sandwich.margin;
                if !(m > 0.0 && m < 1.0) {
                    return Err(CliError::invalid("sandwich.margin", m, "0 < margin < 1"));
                }
            }
            Scenario::Ode => self.validate_ode()?,
            Scenario::Sweep => {
                self.sweep.as_ref().ok_or(CliError::Missing("sweep"))?;
            }
            Scenario::Probe => {
                for &l in &self.probe.lambdas {
                    if !(l.is_finite() && l >= 0.0) {
                        return Err(CliError::invalid("probe.lambdas", l, "λ ≥ 0"));
                    }
                }
            }
            Scenario::Simulate => {}
        }
        for name in [&self.output.csv, &self.output.json] {
            if name.is_empty() || Path::new(name).components().count() != 1 {
                return Err(CliError::Config(format!("output name {name:?} must be a plain file name")));
            }
        }
        Ok(())
    }

    fn validate_ode(&self) -> Result<()> {
        let o = &self.ode;
        let xi = self.params.equilibrium();
        if !(self.params.reaction.lambda > 0.0) && o.t_final.is_none() {
            return Err(CliError::invalid("ode.t_final", f64::NAN, "set explicitly when λ = 0"));
        }
        for (name, v) in [("ode.t_final", o.t_final), ("ode.dt", o.dt)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(CliError::invalid(name, v, "positive and finite"));
                }
            }
        }
        let upper = o.upper.unwrap_or(1.5 * xi);
        let lower = o.lower.unwrap_or(0.5 * xi);
        if !(upper.is_finite() && upper > xi) {
            return Err(CliError::invalid("ode.upper", upper, "ū(0) > ξ"));
        }
        if !(lower > 0.0 && lower < xi) {
            return Err(CliError::invalid("ode.lower", lower, "0 < u̲(0) < ξ"));
        }
        Ok(())
    }
}

impl InitialDatum {
    fn validate(&self, grid: &Grid, scenario: Scenario) -> Result<()> {
        let positive_required = scenario == Scenario::Sandwich;
        match self {
            InitialDatum::Constant { value } => {
                if !(value.is_finite() && *value >= 0.0) {
                    return Err(CliError::invalid("initial.value", *value, "u0 ≥ 0"));
                }
                if positive_required && *value <= 0.0 {
                    return Err(positivity("initial.value", *value));
                }
            }
            InitialDatum::GaussianBump {
                center,
                width,
                amplitude,
                floor,
            } => {
                if center.len() != grid.dim() {
                    return Err(CliError::Config(format!(
                        "initial.center has {} coordinates, grid has dimension {}",
                        center.len(),
                        grid.dim()
                    )));
                }
                if !(width.is_finite() && *width > 0.0) {
                    return Err(CliError::invalid("initial.width", *width, "width > 0"));
                }
                if !(amplitude.is_finite() && *amplitude >= 0.0) {
                    return Err(CliError::invalid("initial.amplitude", *amplitude, "amplitude ≥ 0"));
                }
                if !(floor.is_finite() && *floor >= 0.0) {
                    return Err(CliError::invalid("initial.floor", *floor, "floor ≥ 0"));
                }
                if positive_required && *floor <= 0.0 {
                    return Err(positivity("initial.floor", *floor));
                }
            }
            InitialDatum::CosinePerturbation { amplitude } => {
                if !(amplitude.is_finite() && amplitude.abs() < 1.0) {
                    return Err(CliError::invalid("initial.amplitude", *amplitude, "|amplitude| < 1"));
                }
            }
            InitialDatum::RandomModes { modes, amplitude, base } => {
                if *modes == 0 {
                    return Err(CliError::invalid("initial.modes", 0.0, "modes ≥ 1"));
                }
                if !(amplitude.is_finite() && *amplitude >= 0.0 && *amplitude < 1.0) {
                    return Err(CliError::invalid("initial.amplitude", *amplitude, "0 ≤ amplitude < 1"));
                }
                if let Some(b) = base {
                    if !(b.is_finite() && *b > 0.0) {
                        return Err(CliError::invalid("initial.base", *b, "base > 0"));
                    }
                }
            }
            // Values are checked after loading.
            InitialDatum::File { .. } => {}
        }
        Ok(())
    }
}

fn positivity(name: &str, value: f64) -> CliError {
    CliError::invalid(
        name,
        value,
        "min u0 > 0: the sandwich scenario needs a positive lower bound on the initial datum",
    )
}

/// Parses and validates a JSON configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut cfg = parse_config(&text)?;
    if let Some(InitialDatum::File { path: p }) = &mut cfg.initial {
        if p.is_relative() {
            if let Some(dir) = path.parent() {
                *p = dir.join(&*p);
            }
        }
    }
    Ok(cfg)
}
