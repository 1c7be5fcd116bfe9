//! Construction of initial densities from their config description.

use std::f64::consts::PI;

use chemo_core::{Field, Grid, ModelParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::InitialDatum;
use crate::error::{CliError, Result};

/// Lowest `count` nonconstant Neumann cosine modes, ordered by wavenumber.
fn lowest_modes(grid: &Grid, count: usize) -> Vec<[usize; 2]> {
    let reach = (count as f64).sqrt().ceil() as usize + 2;
    let ky_max = if grid.dim() == 2 { reach } else { 0 };
    let mut modes: Vec<[usize; 2]> = (0..=count.max(reach))
        .flat_map(|kx| (0..=ky_max).map(move |ky| [kx, ky]))
        .filter(|&[kx, ky]| kx + ky > 0)
        .collect();
    modes.sort_by_key(|&[kx, ky]| (kx * kx + ky * ky, kx));
    modes.truncate(count);
    modes
}

fn cosine(grid: &Grid, k: [usize; 2], x: &[f64]) -> f64 {
    (0..grid.dim())
        .map(|d| (PI * k[d] as f64 * x[d] / grid.extent(d)).cos())
        .product()
}

/// Evaluates `datum` on `grid`; `seed` drives the random-modes kind.
pub fn build(datum: &InitialDatum, grid: Grid, model: &ModelParams, seed: u64) -> Result<Field> {
    let xi = model.equilibrium();
    let field = match datum {
        InitialDatum::Constant { value } => Field::constant(grid, *value),
        InitialDatum::GaussianBump {
            center,
            width,
            amplitude,
            floor,
        } => Field::from_fn(grid, |x| {
            let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum();
            floor + amplitude * (-r2 / (2.0 * width * width)).exp()
        }),
        InitialDatum::CosinePerturbation { amplitude } => {
            Field::from_fn(grid, |x| xi * (1.0 + amplitude * cosine(&grid, [1, 1], &x)))
        }
        InitialDatum::RandomModes { modes, amplitude, base } => {
            let base = base.unwrap_or(xi);
            let ks = lowest_modes(&grid, *modes);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let raw: Vec<f64> = ks.iter().map(|_| rng.random_range(-1.0..=1.0)).collect();
            let total: f64 = raw.iter().map(|w| w.abs()).sum();
            let coeffs: Vec<f64> = if total > 0.0 {
                raw.iter().map(|w| amplitude * w / total).collect()
            } else {
                vec![0.0; raw.len()]
            };
            Field::from_fn(grid, |x| {
                let s: f64 = ks.iter().zip(&coeffs).map(|(k, a)| a * cosine(&grid, *k, &x)).sum();
                base * (1.0 + s)
            })
        }
        InitialDatum::File { path } => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let values: Vec<f64> = serde_json::from_str(&text).map_err(|e| CliError::io(path, e))?;
            Field::new(grid, values)?
        }
    };
    if !field.is_finite() || field.min() < 0.0 {
        return Err(CliError::Config("initial datum must be finite and nonnegative".into()));
    }
    Ok(field)
}
