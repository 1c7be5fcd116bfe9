//! Scenario execution and output files.

use std::path::{Path, PathBuf};

use chemo_core::comparison::{self, ConvergenceConditions, IntegrationOptions, Termination, Trajectory};
use chemo_core::diagnostics::{self, format_float, sandwich_violations};
use chemo_core::dynamics::{run_sandwich, run_simulation};
use chemo_core::{classify, sweep, ComparisonState, Field, Grid, RunDocument, RunRecord, RunStatus};
use serde_json::json;

use crate::config::{RunConfig, Scenario};
use crate::error::{CliError, Result};
use crate::initial;

/// How a scenario ended, for the process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Completed,
    BlowUp,
    /// The run stopped early for a numerical reason recorded in the JSON.
    Failed,
    /// Probe runs: blow-up is a finding, not an error.
    Probed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Execution {
    pub outcome: Outcome,
    pub csv: Vec<PathBuf>,
    pub json: PathBuf,
}

impl Outcome {
    fn of(status: &RunStatus) -> Self {
        match status {
            RunStatus::Completed => Outcome::Completed,
            RunStatus::BlowUp { .. } => Outcome::BlowUp,
            RunStatus::SolverFailure { .. } => Outcome::Failed,
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Completed | Outcome::Probed => 0,
            Outcome::BlowUp => 2,
            Outcome::Failed => 1,
        }
    }
}

/// Runs `cfg` and writes its CSV and JSON outputs into `out_dir`.
pub fn execute(cfg: &RunConfig, out_dir: &Path) -> Result<Execution> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let csv_path = out_dir.join(&cfg.output.csv);
    let json_path = out_dir.join(&cfg.output.json);
    let echo = serde_json::to_value(cfg).map_err(|e| CliError::Config(e.to_string()))?;
    let mut doc = RunDocument::new(cfg.scenario.name(), echo);
    doc.regime = classify(&cfg.params).ok();

    let (outcome, csv) = match cfg.scenario {
        Scenario::Simulate => {
            let record = run_simulation(initial_field(cfg)?, &cfg.run_params())?;
            diagnostics::write_csv(&record.rows, &csv_path)?;
            let outcome = Outcome::of(&record.status);
            doc.record = Some(record);
            (outcome, vec![csv_path])
        }
        Scenario::Sandwich => {
            let record = run_sandwich(initial_field(cfg)?, &cfg.run_params(), cfg.sandwich.margin)?;
            diagnostics::write_csv(&record.rows, &csv_path)?;
            doc.extra = sandwich_summary(cfg, &record);
            let outcome = Outcome::of(&record.status);
            doc.record = Some(record);
            (outcome, vec![csv_path])
        }
        Scenario::Ode => {
            let (traj, extra) = run_ode(cfg)?;
            write_trajectory(&traj, &csv_path)?;
            doc.extra = extra;
            (Outcome::Completed, vec![csv_path])
        }
        Scenario::Sweep => {
            let grid = cfg.sweep.as_ref().ok_or(CliError::Missing("sweep"))?;
            let points = sweep(grid)?;
            write_sweep(&points, &csv_path)?;
            doc.extra = sweep_counts(&points);
            (Outcome::Completed, vec![csv_path])
        }
        Scenario::Probe => {
            let (runs, files) = run_probe(cfg, &csv_path)?;
            doc.extra = json!({ "runs": runs });
            (Outcome::Probed, files)
        }
    };
    diagnostics::write_json(&doc, &json_path)?;
    Ok(Execution {
        outcome,
        csv,
        json: json_path,
    })
}

fn grid_of(cfg: &RunConfig) -> Result<Grid> {
    cfg.grid.ok_or(CliError::Missing("grid"))
}

fn initial_field(cfg: &RunConfig) -> Result<Field> {
    let datum = cfg.initial.as_ref().ok_or(CliError::Missing("initial"))?;
    let u0 = initial::build(datum, grid_of(cfg)?, &cfg.params, cfg.seed)?;
    if cfg.scenario == Scenario::Sandwich && !(u0.min() > 0.0) {
        return Err(CliError::invalid(
            "min u0",
            u0.min(),
            "min u0 > 0: the sandwich scenario needs a positive lower bound on the initial datum",
        ));
    }
    Ok(u0)
}

fn sandwich_summary(cfg: &RunConfig, record: &RunRecord) -> serde_json::Value {
    let xi = cfg.params.equilibrium();
    let tolerance = 1e-3 * xi;
    let worst = record
        .rows
        .iter()
        .filter_map(|r| Some((r.ulow? - r.min_u).max(r.linf - r.ubar?)))
        .fold(f64::NEG_INFINITY, f64::max);
    json!({
        "tolerance": tolerance,
        "violations": sandwich_violations(&record.rows, tolerance),
        "worst_excess": worst,
        "final_dist_u": record.rows.last().map(|r| r.dist_u),
    })
}

fn run_ode(cfg: &RunConfig) -> Result<(Trajectory, serde_json::Value)> {
    let model = cfg.params;
    let xi = model.equilibrium();
    let o = &cfg.ode;
    let s0 = ComparisonState::from_values(0.0, o.upper.unwrap_or(1.5 * xi), o.lower.unwrap_or(0.5 * xi), xi);
    let t_final = o.t_final.unwrap_or(50.0 / model.reaction.lambda);
    let dt = o.dt.unwrap_or_else(|| comparison::suggest_dt(&s0, &model).min(t_final / 100.0));
    let mut opts = IntegrationOptions::new(t_final, dt);
    if let Some(h) = o.max_halvings {
        opts.max_halvings = h;
    }
    if let Some(s) = o.samples {
        opts.samples = s;
    }
    let traj = comparison::integrate_comparison(&s0, &model, &opts)?;
    let last = traj.last();
    let extra = json!({
        "termination": traj.termination,
        "dt": traj.dt,
        "halvings": traj.halvings,
        "final_distance": last.distance_to_equilibrium(),
        "rate": comparison::estimate_rate(&traj).ok(),
        "conditions": ConvergenceConditions::evaluate(&model),
        "escaped": matches!(traj.termination, Termination::Escaped { .. }),
    });
    Ok((traj, extra))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))
}

fn write_trajectory(traj: &Trajectory, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    let io = |e| CliError::io(path, e);
    w.write_record(["t", "ubar", "ulow", "gap"]).map_err(io)?;
    for p in &traj.points {
        w.write_record([p.t, p.upper(), p.lower(), p.gap()].map(format_float)).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn write_sweep(points: &[(chemo_core::ModelParams, chemo_core::RegimeReport)], path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    let io = |e| CliError::io(path, e);
    w.write_record([
        "alpha",
        "beta",
        "gamma",
        "m",
        "chi",
        "lambda",
        "existence",
        "collapse_prevention",
        "convergence",
    ])
    .map_err(io)?;
    for (p, r) in points {
        let r_ = &p.reaction;
        let mut row: Vec<String> = [r_.alpha, r_.beta, p.gamma, p.m, p.chi, r_.lambda].map(format_float).to_vec();
        for label in [
            serde_json::to_value(r.existence),
            serde_json::to_value(r.collapse_prevention),
            serde_json::to_value(r.convergence),
        ] {
            let label = label.map_err(|e| CliError::Config(e.to_string()))?;
            row.push(label.as_str().unwrap_or_default().to_string());
        }
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn sweep_counts(points: &[(chemo_core::ModelParams, chemo_core::RegimeReport)]) -> serde_json::Value {
    let mut counts = std::collections::BTreeMap::<String, usize>::new();
    for (_, r) in points {
        for v in [
            serde_json::to_value(r.existence),
            serde_json::to_value(r.collapse_prevention),
            serde_json::to_value(r.convergence),
        ]
        .into_iter()
        .flatten()
        {
            *counts.entry(v.as_str().unwrap_or_default().to_string()).or_default() += 1;
        }
    }
    json!({ "points": points.len(), "counts": counts })
}

fn run_probe(cfg: &RunConfig, csv_path: &Path) -> Result<(Vec<serde_json::Value>, Vec<PathBuf>)> {
    let lambdas = if cfg.probe.lambdas.is_empty() {
        vec![cfg.params.reaction.lambda]
    } else {
        cfg.probe.lambdas.clone()
    };
    let u0 = initial_field(cfg)?;
    let stem = csv_path.file_stem().and_then(|s| s.to_str()).unwrap_or("diagnostics");
    let mut runs = Vec::new();
    let mut files = Vec::new();
    for (i, &lambda) in lambdas.iter().enumerate() {
        let mut params = cfg.run_params();
        params.model.reaction.lambda = lambda;
        let record = run_simulation(u0.clone(), &params)?;
        let path = csv_path.with_file_name(format!("{stem}_{i}.csv"));
        diagnostics::write_csv(&record.rows, &path)?;
        let status = serde_json::to_value(&record.status).map_err(|e| CliError::Config(e.to_string()))?;
        runs.push(json!({
            "lambda": lambda,
            "regime": classify(&params.model).ok(),
            "result": status,
            "summary": record.summary,
            "csv": path.file_name().and_then(|s| s.to_str()),
        }));
        files.push(path);
    }
    Ok((runs, files))
}
