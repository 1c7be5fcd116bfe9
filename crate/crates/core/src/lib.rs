//! Simulation and verification toolkit for the parabolic-elliptic
//! Keller-Segel system with a nonlocal logistic source,
//!
//! ```text
//! u_t = Δu − χ∇·(u^m∇c) + λ u^α (1 − σ ⨍_Ω u^β dx),
//! −Δc + c = u^γ,             ∇u·ν = ∇c·ν = 0,
//! ```
//!
//! on rectangles in one or two dimensions.
//!
//! * [`grid`]: cell-centered grids, fields, quadrature and the Neumann Laplacian
//! * [`elliptic`]: cached direct / CG solvers for `(a − bΔ_h) x = rhs`
//! * [`reaction`]: the nonlocal source term
//! * [`dynamics`]: IMEX stepping, step control and blow-up detection
//! * [`comparison`]: spatially homogeneous super/sub-solutions and their convergence
//! * [`regimes`]: parameter classification and sweeps
//! * [`diagnostics`]: per-record norms and CSV / JSON output

// Negated comparisons are deliberate: they treat NaN as out of range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod comparison;
pub mod diagnostics;
pub mod dynamics;
pub mod elliptic;
pub mod error;
pub mod grid;
pub mod params;
pub mod reaction;
pub mod regimes;

pub use comparison::{ComparisonState, Equilibrium, IntegrationOptions, Trajectory};
pub use diagnostics::{DiagnosticsRow, RunDocument};
pub use dynamics::{RunRecord, RunStatus, SimState, Stepper};
pub use elliptic::{HelmholtzSolver, SolverMethod, SolverOptions};
pub use error::{Error, Result};
pub use grid::{Field, Grid};
pub use params::{DiffusionScheme, ModelParams, Numerics, Params};
pub use reaction::ReactionParams;
pub use regimes::{classify, sweep, RegimeReport, SweepGrid};
