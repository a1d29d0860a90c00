//! Central-upwind finite-volume discretization on a uniform grid.

pub mod config;
pub mod flux;
pub mod grid;
pub mod reconstruct;
pub mod rhs;
pub mod stepping;

pub use config::{Boundaries, BoundaryKind, Integrator, SolverConfig, SourceDiscretization};
pub use grid::{build_bottom, BottomField, Grid, StateField};
pub use rhs::{semidiscrete_rhs, FilterStats, RhsOutput};
pub use stepping::{hyperbolic_dt, run, step, RunDiagnostics, StepReport};
