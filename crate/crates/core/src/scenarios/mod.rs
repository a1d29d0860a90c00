//! The benchmark problems as declarative definitions, plus statistics,
//! error norms and comparison tools built on top of the solver.

mod collocation;
mod stats;

use std::sync::Arc;

use crate::basis::{BetaParams, DistributionSpec, MultiIndexSet, OrthonormalBasis};
use crate::error::{Error, Result};
use crate::solver::{
    build_bottom, run, BottomField, Boundaries, BoundaryKind, Grid, RunDiagnostics, SolverConfig,
    StateField,
};
use crate::space::StochasticSpace;
use crate::swe::PhysicsParams;

pub use collocation::collocation_solve;
pub use stats::{
    closure_discrepancy, convergence_table, error_norm, moments, restrict, surface_moments,
    ConvergenceRow, MomentField,
};

/// A scalar field `f(x, y, xi)`.
pub type Field = Arc<dyn Fn(f64, f64, &[f64]) -> f64 + Send + Sync>;

fn field(f: impl Fn(f64, f64, &[f64]) -> f64 + Send + Sync + 'static) -> Field {
    Arc::new(f)
}

#[derive(Clone)]
pub struct ScenarioSpec {
    pub id: u32,
    pub name: &'static str,
    pub x: [f64; 2],
    pub y: [f64; 2],
    /// Initial water surface `w = h + B`.
    pub surface: Field,
    pub u: Field,
    pub v: Field,
    pub bottom: Field,
    pub distribution: DistributionSpec,
    pub index_set: MultiIndexSet,
    pub boundaries: Boundaries,
    pub g: f64,
    pub theta: f64,
    pub end_time: f64,
    pub snapshots: Vec<f64>,
    /// Default cells per direction.
    pub grid: usize,
}

impl std::fmt::Debug for ScenarioSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScenarioSpec")
            .field("id", &self.id)
            .field("name", &self.name)
            .field("x", &self.x)
            .field("y", &self.y)
            .field("distribution", &self.distribution)
            .field("terms", &self.index_set.len())
            .field("boundaries", &self.boundaries)
            .field("theta", &self.theta)
            .field("end_time", &self.end_time)
            .finish_non_exhaustive()
    }
}

fn step_in_x(lo: f64, hi: f64, inside: f64, outside: f64) -> Field {
    field(move |x, _, _| if lo < x && x < hi { inside } else { outside })
}

fn constant(c: f64) -> Field {
    field(move |_, _, _| c)
}

/// The five benchmark problems.
pub fn builtin_scenario(id: u32) -> Result<ScenarioSpec> {
    let skewed = BetaParams::new(1.0, 3.0)?;
    let uniform = BetaParams::UNIFORM;
    let unit = [0.0, 2.0];
    let spec = match id {
        1 => ScenarioSpec {
            id,
            name: "accuracy test over a stochastic hump",
            x: unit,
            y: [0.0, 1.0],
            surface: constant(1.0),
            u: constant(0.3),
            v: constant(0.0),
            bottom: field(|x, y, xi| {
                0.5 * (-25.0 * (x - 1.0).powi(2) - 50.0 * (y - 0.5).powi(2)).exp()
                    + 0.1 * (xi[0] + 1.0)
            }),
            distribution: DistributionSpec::new(vec![uniform])?,
            index_set: MultiIndexSet::tensor(&[3])?,
            boundaries: Boundaries::EXTRAPOLATION,
            g: 1.0,
            theta: 1.3,
            end_time: 0.07,
            snapshots: vec![0.07],
            grid: 100,
        },
        2 => ScenarioSpec {
            id,
            name: "perturbed lake over a hump with uncertain offset",
            x: unit,
            y: [0.0, 1.0],
            surface: step_in_x(0.05, 0.15, 1.01, 1.0),
            u: constant(0.0),
            v: constant(0.0),
            bottom: field(|x, y, xi| {
                0.8 * (-5.0 * (x - 0.9).powi(2) - 50.0 * (y - 0.5).powi(2)).exp()
                    + 0.1 * (xi[0] + 1.0)
            }),
            distribution: DistributionSpec::new(vec![skewed])?,
            index_set: MultiIndexSet::tensor(&[7])?,
            boundaries: Boundaries {
                left: BoundaryKind::Extrapolation,
                right: BoundaryKind::Extrapolation,
                bottom: BoundaryKind::Periodic,
                top: BoundaryKind::Periodic,
            },
            g: 1.0,
            theta: 1.3,
            end_time: 1.2,
            snapshots: vec![1.2],
            grid: 200,
        },
        3 => ScenarioSpec {
            id,
            name: "perturbed lake over a hump with uncertain position",
            x: unit,
            y: [0.0, 1.0],
            surface: step_in_x(0.05, 0.15, 1.01, 1.0),
            u: constant(0.0),
            v: constant(0.0),
            bottom: field(|x, y, xi| {
                0.8 * (-5.0 * (x - 0.9 + 0.1 * xi[0]).powi(2)
                    - 50.0 * (y - 0.5 + 0.1 * xi[1]).powi(2))
                .exp()
            }),
            distribution: DistributionSpec::new(vec![skewed, uniform])?,
            index_set: MultiIndexSet::tensor(&[3, 3])?,
            boundaries: Boundaries::EXTRAPOLATION,
            g: 1.0,
            theta: 1.3,
            end_time: 1.8,
            snapshots: vec![0.6, 0.9, 1.2, 1.5, 1.8],
            grid: 100,
        },
        4 => ScenarioSpec {
            id,
            name: "submerged plateau",
            x: [-0.5, 0.5],
            y: [-0.5, 0.5],
            surface: step_in_x(-0.4, -0.3, 1.0001, 1.0),
            u: constant(0.0),
            v: constant(0.0),
            bottom: field(|x, y, xi| {
                let r = (x * x + y * y).sqrt() + 0.0001 * (xi[1] + 1.0);
                if r <= 0.1 {
                    0.9998
                } else if r <= 0.2 {
                    9.997 * (0.2 - r) + 0.0001 * (xi[0] + 1.0)
                } else {
                    0.0001
                }
            }),
            distribution: DistributionSpec::new(vec![uniform, skewed])?,
            index_set: MultiIndexSet::tensor(&[3, 3])?,
            boundaries: Boundaries::EXTRAPOLATION,
            g: 1.0,
            theta: 1.0,
            end_time: 0.65,
            snapshots: vec![0.2, 0.35, 0.5, 0.65],
            grid: 100,
        },
        5 => ScenarioSpec {
            id,
            name: "hump of uncertain width",
            x: unit,
            y: [0.0, 1.0],
            surface: constant(1.0),
            u: constant(0.3),
            v: constant(0.0),
            bottom: field(|x, y, xi| {
                0.5 * (-12.5 * (xi[0] + 1.0) * (x - 1.0).powi(2)
                    - 25.0 * (xi[1] + 1.0) * (y - 0.5).powi(2))
                .exp()
            }),
            distribution: DistributionSpec::new(vec![BetaParams::new(3.0, 1.0)?, uniform])?,
            index_set: MultiIndexSet::tensor(&[3, 3])?,
            boundaries: Boundaries::EXTRAPOLATION,
            g: 1.0,
            theta: 1.3,
            end_time: 0.07,
            snapshots: vec![0.07],
            grid: 100,
        },
        _ => return Err(Error::UnknownScenario(id)),
    };
    Ok(spec)
}

impl ScenarioSpec {
    /// Uses a `k`-term basis: degree `k - 1` for one random variable, the
    /// full tensor set of degree `p` per dimension when `k = (p + 1)^d`.
    pub fn with_terms(mut self, k: usize) -> Result<Self> {
        let d = self.distribution.dim();
        let p = (k as f64).powf(1.0 / d as f64).round() as usize;
        if k == 0 || p.pow(d as u32) != k {
            return Err(Error::Domain(format!(
                "{k} terms do not form a full tensor set in {d} dimensions"
            )));
        }
        self.index_set = MultiIndexSet::tensor(&vec![p - 1; d])?;
        Ok(self)
    }

    pub fn with_max_degrees(mut self, degrees: &[usize]) -> Result<Self> {
        if degrees.len() != self.distribution.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.distribution.dim(),
                found: degrees.len(),
            });
        }
        self.index_set = MultiIndexSet::tensor(degrees)?;
        Ok(self)
    }

    pub fn basis(&self) -> Result<OrthonormalBasis> {
        OrthonormalBasis::new(self.distribution.clone(), self.index_set.clone())
    }

    pub fn space(&self) -> Result<StochasticSpace> {
        Ok(StochasticSpace::new(self.basis()?))
    }

    pub fn grid(&self, nx: usize, ny: usize) -> Result<Grid> {
        Grid::new(nx, ny, self.x, self.y)
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            physics: PhysicsParams { g: self.g },
            theta: self.theta,
            boundaries: self.boundaries,
            ..SolverConfig::default()
        }
    }

    pub fn build_bottom(&self, grid: &Grid, space: &StochasticSpace) -> BottomField {
        let b = self.bottom.clone();
        build_bottom(move |x, y, xi| b(x, y, xi), grid, space)
    }

    /// Cell averages at `t = 0`: the surface and velocities are projected
    /// at cell centers, `h̄ = w̄ - B̄` and `q̄ = P(h̄) ū`.
    pub fn initial_state(
        &self,
        grid: &Grid,
        space: &StochasticSpace,
        bottom: &BottomField,
    ) -> Result<StateField> {
        let k = space.k();
        let mut state = StateField::zeros(*grid, k);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.center(i, j);
                let w = space.project(|xi| (self.surface)(x, y, xi));
                let u = space.project(|xi| (self.u)(x, y, xi));
                let v = space.project(|xi| (self.v)(x, y, xi));
                let h = w.sub(bottom.center(i, j));
                let cell = state.cell_mut(i, j);
                cell[..k].copy_from_slice(&h);
                let (_, q) = cell.split_at_mut(k);
                let (qx, qy) = q.split_at_mut(k);
                space.tensor().product_into(&h, &u, qx);
                space.tensor().product_into(&h, &v, qy);
            }
        }
        let min = state.min_node_height(space);
        if !(min >= 0.0) {
            return Err(Error::Domain(format!(
                "initial water height is negative at a quadrature node (min {min:e})"
            )));
        }
        Ok(state)
    }

    /// Runs the problem on an `nx x ny` grid to `end_time`, calling
    /// `output` at `t = 0`, at each snapshot time and at the end.
    pub fn simulate<F>(
        &self,
        nx: usize,
        ny: usize,
        cfg: &SolverConfig,
        end_time: f64,
        output: F,
    ) -> Result<Simulation>
    where
        F: FnMut(&StateField) -> Result<()>,
    {
        let space = self.space()?;
        let grid = self.grid(nx, ny)?;
        let bottom = self.build_bottom(&grid, &space);
        let mut state = self.initial_state(&grid, &space, &bottom)?;
        let diagnostics = run(
            &mut state,
            &bottom,
            &space,
            cfg,
            end_time,
            &self.snapshots,
            output,
        )?;
        Ok(Simulation {
            space,
            bottom,
            state,
            diagnostics,
        })
    }

    /// Runs to the scenario's end time with its own solver settings.
    pub fn solve(&self, nx: usize, ny: usize) -> Result<Simulation> {
        self.simulate(nx, ny, &self.solver_config(), self.end_time, |_| Ok(()))
    }
}

/// Final data of a run.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub space: StochasticSpace,
    pub bottom: BottomField,
    pub state: StateField,
    pub diagnostics: RunDiagnostics,
}

/// Outcome of a stochastic lake-at-rest run.
#[derive(Debug, Clone, PartialEq)]
pub struct WellBalanceReport {
    /// Largest `|U(t) - U(0)|` over cells and coefficients.
    pub max_deviation: f64,
    /// Largest `|q̂|` over cells and coefficients at the end.
    pub max_discharge: f64,
    pub steps: usize,
}

impl WellBalanceReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_deviation <= tol && self.max_discharge <= tol
    }
}

/// Runs still water with the constant surface `eta` over the scenario's
/// bottom and reports how far the state drifts.
pub fn lake_at_rest_check(
    spec: &ScenarioSpec,
    eta: &[f64],
    nx: usize,
    ny: usize,
    end_time: f64,
    cfg: &SolverConfig,
) -> Result<WellBalanceReport> {
    let space = spec.space()?;
    if eta.len() > space.k() {
        return Err(Error::DimensionMismatch {
            expected: space.k(),
            found: eta.len(),
        });
    }
    let mut eta_k = vec![0.0; space.k()];
    eta_k[..eta.len()].copy_from_slice(eta);
    let still = ScenarioSpec {
        surface: field(|_, _, _| 0.0),
        u: constant(0.0),
        v: constant(0.0),
        ..spec.clone()
    };
    let grid = still.grid(nx, ny)?;
    let bottom = still.build_bottom(&grid, &space);
    let mut state = StateField::zeros(grid, space.k());
    let k = space.k();
    for j in 0..ny {
        for i in 0..nx {
            let b = bottom.center(i, j).to_vec();
            let cell = state.cell_mut(i, j);
            for m in 0..k {
                cell[m] = eta_k[m] - b[m];
            }
        }
    }
    if !(state.min_node_height(&space) > 0.0) {
        return Err(Error::Domain("lake surface lies below the bottom".into()));
    }
    let initial = state.clone();
    let diag = run(&mut state, &bottom, &space, cfg, end_time, &[], |_| Ok(()))?;
    let max_deviation = state
        .data
        .iter()
        .zip(&initial.data)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let max_discharge = state
        .cells()
        .flat_map(|c| c[k..].iter())
        .map(|v| v.abs())
        .fold(0.0, f64::max);
    Ok(WellBalanceReport {
        max_deviation,
        max_discharge,
        steps: diag.steps(),
    })
}
