//! Fixtures shared by the kernel benchmarks.

use chemo_core::{Field, Grid, ModelParams, Numerics, Params, ReactionParams};

/// A smooth positive bump on the unit square or interval.
pub fn bump(grid: Grid) -> Field {
    Field::from_fn(grid, |x| {
        let r2 = (x[0] - 0.4).powi(2) + if grid.dim() == 2 { (x[1] - 0.6).powi(2) } else { 0.0 };
        0.5 + 4.0 * (-r2 / 0.02).exp()
    })
}

pub fn params() -> Params {
    Params {
        model: ModelParams {
            n: 3,
            chi: 1.0,
            m: 1.0,
            gamma: 1.0,
            reaction: ReactionParams {
                alpha: 2.0,
                beta: 4.0,
                sigma: 1.0,
                lambda: 1.0,
            },
        },
        numerics: Numerics::default(),
    }
}
