use crate::basis::NodeTable;
use crate::error::{Error, Result};
use crate::linalg::sym_extremes;
use crate::solver::config::{Integrator, SolverConfig};
use crate::solver::grid::{BottomField, StateField};
use crate::solver::rhs::{semidiscrete_rhs, FilterStats, RhsOutput};
use crate::space::StochasticSpace;

/// Denominators below this do not constrain the positivity time step.
pub const DT_DENOMINATOR_TOL: f64 = 1.0e-14;

/// Largest forward Euler step that keeps every node height of every cell
/// nonnegative: `min |h̄ᵀΦ(ξ_m) / Dᵀ Φ(ξ_m)|` with `D = -dh̄/dt`.
pub fn hyperbolic_dt(state: &StateField, rhs: &[f64], table: &NodeTable) -> f64 {
    let k = state.k;
    let s = 3 * k;
    let mut dt = f64::INFINITY;
    for (cell, r) in state.data.chunks(s).zip(rhs.chunks(s)) {
        for row in table.rows() {
            let den: f64 = -r[..k].iter().zip(row).map(|(a, p)| a * p).sum::<f64>();
            if den.abs() < DT_DENOMINATOR_TOL {
                continue;
            }
            let num: f64 = cell[..k].iter().zip(row).map(|(a, p)| a * p).sum();
            dt = dt.min((num / den).abs());
        }
    }
    dt
}

/// Diagnostics of one accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub dt: f64,
    /// Time step limit from the positivity condition alone.
    pub dt_positivity: f64,
    pub max_speed: f64,
    pub halvings: u32,
    /// Smallest node height over all cells after the step.
    pub min_node_height: f64,
    pub stats: FilterStats,
}

fn axpy(out: &mut [f64], a: f64, x: &[f64], b: f64, y: &[f64], dt: f64, r: &[f64]) {
    for i in 0..out.len() {
        out[i] = a * x[i] + b * (y[i] + dt * r[i]);
    }
}

/// Advances `state` by one step of at most `max_dt`.
///
/// The step size is fixed from the pre-step state. If a stage produces a
/// nonpositive node height the step is retried from the start with half
/// the step size.
pub fn step(
    state: &mut StateField,
    bottom: &BottomField,
    space: &StochasticSpace,
    cfg: &SolverConfig,
    max_dt: f64,
) -> Result<StepReport> {
    let first = semidiscrete_rhs(state, bottom, space, cfg)?;
    let grid = state.grid;
    let dt_pos = hyperbolic_dt(state, &first.rhs, space.table());
    let dt_cfl = if first.max_speed > 0.0 {
        grid.dx.min(grid.dy) / (2.0 * first.max_speed)
    } else {
        f64::INFINITY
    };
    let mut dt = (cfg.cfl * dt_pos.min(dt_cfl)).min(max_dt);
    if !(dt > 0.0) {
        return Err(Error::SolverAbort {
            t: state.t,
            reason: format!("nonpositive time step {dt}"),
        });
    }
    if !dt.is_finite() {
        return Err(Error::SolverAbort {
            t: state.t,
            reason: "no time step restriction (zero speeds and no bound given)".into(),
        });
    }

    let start = state.clone();
    for halvings in 0..=cfg.max_halvings {
        match try_stages(&start, &first, bottom, space, cfg, dt)? {
            Some((next, stats)) => {
                let mut all = first.stats;
                all.merge(&stats);
                let min_node_height = next.min_node_height(space);
                *state = next;
                return Ok(StepReport {
                    dt,
                    dt_positivity: dt_pos,
                    max_speed: first.max_speed,
                    halvings,
                    min_node_height,
                    stats: all,
                });
            }
            None => dt *= 0.5,
        }
    }
    Err(Error::SolverAbort {
        t: state.t,
        reason: format!(
            "node heights stay nonpositive after {} time step halvings",
            cfg.max_halvings
        ),
    })
}

/// Runs the Runge-Kutta stages. `None` signals a positivity failure.
fn try_stages(
    start: &StateField,
    first: &RhsOutput,
    bottom: &BottomField,
    space: &StochasticSpace,
    cfg: &SolverConfig,
    dt: f64,
) -> Result<Option<(StateField, FilterStats)>> {
    let mut stats = FilterStats::default();
    let positive = |f: &StateField| f.min_node_height(space) > 0.0;
    let u0 = &start.data;

    let mut u1 = start.clone();
    axpy(&mut u1.data, 0.0, u0, 1.0, u0, dt, &first.rhs);
    if !positive(&u1) {
        return Ok(None);
    }
    let mut stage = |u: &mut StateField| -> Result<Vec<f64>> {
        let out = semidiscrete_rhs(u, bottom, space, cfg)?;
        stats.merge(&out.stats);
        Ok(out.rhs)
    };
    let mut next = start.clone();
    match cfg.integrator {
        Integrator::SspRk2 => {
            let r1 = stage(&mut u1)?;
            axpy(&mut next.data, 0.5, u0, 0.5, &u1.data, dt, &r1);
        }
        Integrator::SspRk3 => {
            let r1 = stage(&mut u1)?;
            let mut u2 = start.clone();
            axpy(&mut u2.data, 0.75, u0, 0.25, &u1.data, dt, &r1);
            if !positive(&u2) {
                return Ok(None);
            }
            let r2 = stage(&mut u2)?;
            axpy(&mut next.data, 1.0 / 3.0, u0, 2.0 / 3.0, &u2.data, dt, &r2);
        }
    }
    if !positive(&next) {
        return Ok(None);
    }
    next.t = start.t + dt;
    Ok(Some((next, stats)))
}

/// Summary of a complete run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunDiagnostics {
    pub dt_history: Vec<f64>,
    /// Smallest node height over all cells after each step.
    pub min_node_history: Vec<f64>,
    pub halvings: u32,
    pub filter_activations: usize,
    pub corrections: usize,
    pub mu_max: f64,
    pub mu_sum: f64,
    /// Number of cell evaluations entering `mu_sum`.
    pub mu_samples: usize,
    pub min_node_height: f64,
    /// Smallest eigenvalue of `P(h̄)` over all cells after each step.
    pub min_eigen_history: Vec<f64>,
    /// Smallest eigenvalue of `P(h̄)` over the initial state and every step.
    pub min_eigenvalue: f64,
}

impl RunDiagnostics {
    pub fn steps(&self) -> usize {
        self.dt_history.len()
    }

    pub fn mu_mean(&self) -> f64 {
        if self.mu_samples == 0 {
            0.0
        } else {
            self.mu_sum / self.mu_samples as f64
        }
    }
}

/// Smallest eigenvalue of `P(h̄)` over all cells.
pub fn min_height_eigenvalue(state: &StateField, space: &StochasticSpace) -> f64 {
    use rayon::prelude::*;
    let k = state.k;
    if k == 1 {
        return state.cells().map(|c| c[0]).fold(f64::INFINITY, f64::min);
    }
    state
        .data
        .par_chunks(3 * k)
        .map(|c| sym_extremes(space.tensor().p_matrix(&c[..k])).0)
        .reduce(|| f64::INFINITY, f64::min)
}

/// Integrates to `end_time`, calling `output` at `t0`, at every entry of
/// `output_times` inside `(t0, end_time)`, and at `end_time`.
pub fn run<F>(
    state: &mut StateField,
    bottom: &BottomField,
    space: &StochasticSpace,
    cfg: &SolverConfig,
    end_time: f64,
    output_times: &[f64],
    mut output: F,
) -> Result<RunDiagnostics>
where
    F: FnMut(&StateField) -> Result<()>,
{
    cfg.validate()?;
    let mut stops: Vec<f64> = output_times
        .iter()
        .copied()
        .filter(|&t| t > state.t && t < end_time)
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    stops.push(end_time);

    let mut diag = RunDiagnostics {
        min_node_height: state.min_node_height(space),
        min_eigenvalue: min_height_eigenvalue(state, space),
        ..Default::default()
    };
    output(state)?;
    let cells = state.grid.cells();
    let stages = match cfg.integrator {
        Integrator::SspRk2 => 2,
        Integrator::SspRk3 => 3,
    };
    for stop in stops {
        while state.t < stop {
            let rest = stop - state.t;
            let report = step(state, bottom, space, cfg, rest)?;
            // absorb round-off so the loop lands exactly on the stop
            if (stop - state.t).abs() <= 1e-12 * stop.abs().max(1.0) {
                state.t = stop;
            }
            diag.dt_history.push(report.dt);
            diag.min_node_history.push(report.min_node_height);
            diag.halvings += report.halvings;
            diag.filter_activations += report.stats.activations;
            diag.corrections += report.stats.corrections;
            diag.mu_max = diag.mu_max.max(report.stats.mu_max);
            diag.mu_sum += report.stats.mu_sum;
            diag.mu_samples += cells * stages;
            diag.min_node_height = diag.min_node_height.min(report.min_node_height);
            let lowest = min_height_eigenvalue(state, space);
            diag.min_eigen_history.push(lowest);
            diag.min_eigenvalue = diag.min_eigenvalue.min(lowest);
        }
        output(state)?;
    }
    Ok(diag)
}
