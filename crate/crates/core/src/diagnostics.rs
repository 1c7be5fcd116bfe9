//! Diagnostics rows and their CSV / JSON serialization.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::comparison::ComparisonState;
use crate::dynamics::{RunRecord, SimState};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::reaction::nonlocal_factor;
use crate::regimes::RegimeReport;

/// Frozen column order of the diagnostics CSV.
pub const CSV_HEADER: [&str; 12] = [
    "t",
    "l1",
    "l2",
    "lk",
    "linf",
    "min_u",
    "dist_u",
    "dist_c",
    "nonlocal_factor",
    "ubar",
    "ulow",
    "clamped_mass",
];

pub const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub l1: f64,
    pub l2: f64,
    pub lk: f64,
    pub linf: f64,
    pub min_u: f64,
    /// `‖u − ξ‖_∞`.
    pub dist_u: f64,
    /// `‖c − ξ^γ‖_∞`.
    pub dist_c: f64,
    pub nonlocal_factor: f64,
    pub ubar: Option<f64>,
    pub ulow: Option<f64>,
    pub clamped_mass: f64,
}

impl DiagnosticsRow {
    fn cells(&self) -> [Option<f64>; 12] {
        [
            Some(self.t),
            Some(self.l1),
            Some(self.l2),
            Some(self.lk),
            Some(self.linf),
            Some(self.min_u),
            Some(self.dist_u),
            Some(self.dist_c),
            Some(self.nonlocal_factor),
            self.ubar,
            self.ulow,
            Some(self.clamped_mass),
        ]
    }

    fn from_cells(c: [Option<f64>; 12]) -> Option<Self> {
        Some(DiagnosticsRow {
            t: c[0]?,
            l1: c[1]?,
            l2: c[2]?,
            lk: c[3]?,
            linf: c[4]?,
            min_u: c[5]?,
            dist_u: c[6]?,
            dist_c: c[7]?,
            nonlocal_factor: c[8]?,
            ubar: c[9],
            ulow: c[10],
            clamped_mass: c[11]?,
        })
    }
}

/// Computes one diagnostics row from the current state.
pub fn record(state: &SimState, comp: Option<&ComparisonState>, model: &ModelParams, k: f64) -> Result<DiagnosticsRow> {
    let u = &state.u;
    let xi = model.equilibrium();
    Ok(DiagnosticsRow {
        t: state.t,
        l1: u.lk_norm(1.0)?,
        l2: u.lk_norm(2.0)?,
        lk: u.lk_norm(k)?,
        linf: u.lk_norm(f64::INFINITY)?,
        min_u: u.min(),
        dist_u: u.distance_to_constant(xi),
        dist_c: state.c.distance_to_constant(xi.powf(model.gamma)),
        nonlocal_factor: nonlocal_factor(u, &model.reaction)?,
        ubar: comp.map(|c| c.upper()),
        ulow: comp.map(|c| c.lower()),
        clamped_mass: state.clamped_mass,
    })
}

/// Number of rows outside `[u̲ − tol, ū + tol]`; rows without a comparison pair are skipped.
pub fn sandwich_violations(rows: &[DiagnosticsRow], tol: f64) -> usize {
    rows.iter()
        .filter(|r| match (r.ulow, r.ubar) {
            (Some(lo), Some(hi)) => r.min_u < lo - tol || r.linf > hi + tol,
            _ => false,
        })
        .count()
}

/// Shortest decimal text that parses back to the same `f64`.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Writes `rows` with the frozen header; `None` cells are left empty.
pub fn write_csv(rows: &[DiagnosticsRow], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(CSV_HEADER).map_err(|e| Error::io(path, e))?;
    for row in rows {
        let fields = row.cells().map(|c| c.map(format_float).unwrap_or_default());
        w.write_record(&fields).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<DiagnosticsRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::io(path, e))?;
    let header = r.headers().map_err(|e| Error::io(path, e))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::io(path, format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::io(path, e))?;
        let mut cells = [None; 12];
        for (slot, field) in cells.iter_mut().zip(rec.iter()) {
            if !field.is_empty() {
                *slot = Some(field.parse::<f64>().map_err(|e| Error::io(path, format!("{field:?}: {e}")))?);
            }
        }
        rows.push(DiagnosticsRow::from_cells(cells).ok_or_else(|| Error::io(path, "missing required column value"))?);
    }
    Ok(rows)
}

/// JSON sidecar: effective configuration, regime labels and the run itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunDocument {
    pub schema_version: String,
    pub scenario: String,
    pub config: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<RegimeReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record: Option<RunRecord>,
    #[serde(default)]
    pub extra: serde_json::Value,
}

impl RunDocument {
    pub fn new(scenario: impl Into<String>, config: serde_json::Value) -> Self {
        RunDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            scenario: scenario.into(),
            config,
            regime: None,
            record: None,
            extra: serde_json::Value::Null,
        }
    }
}

pub fn write_json<T: Serialize>(doc: &T, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, doc).map_err(|e| Error::io(path, e))?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::io(path, e))
}
