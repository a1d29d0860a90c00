use std::sync::Arc;

use crate::error::{Error, Result};
use crate::solver::{SolverConfig, StateField};
use crate::space::StochasticSpace;

use super::{Field, ScenarioSpec};

fn frozen(f: &Field, zeta: &[f64]) -> Field {
    let f = f.clone();
    let zeta = zeta.to_vec();
    Arc::new(move |x, y, _| f(x, y, &zeta))
}

/// Stochastic collocation: one deterministic run per node of the
/// `points_per_dim`-point Gauss rule of the scenario's density, projected
/// onto `space` by the same rule.
pub fn collocation_solve(
    spec: &ScenarioSpec,
    nx: usize,
    ny: usize,
    points_per_dim: usize,
    cfg: &SolverConfig,
    space: &StochasticSpace,
) -> Result<StateField> {
    if points_per_dim == 0 {
        return Err(Error::Domain("collocation needs at least one node".into()));
    }
    let basis = space.basis();
    if basis.distribution() != &spec.distribution {
        return Err(Error::Domain(
            "collocation target basis uses a different distribution".into(),
        ));
    }
    let rule = basis.gauss_rule(&vec![points_per_dim; spec.distribution.dim()])?;
    let table = basis.tabulate(&rule);
    let det = StochasticSpace::deterministic();
    let k = space.k();
    let grid = spec.grid(nx, ny)?;
    let mut out = StateField::zeros(grid, k);
    for m in 0..rule.len() {
        let zeta = rule.node(m);
        let sample = ScenarioSpec {
            surface: frozen(&spec.surface, zeta),
            u: frozen(&spec.u, zeta),
            v: frozen(&spec.v, zeta),
            bottom: frozen(&spec.bottom, zeta),
            ..spec.clone()
        };
        let bottom = sample.build_bottom(&grid, &det);
        let mut state = sample.initial_state(&grid, &det, &bottom)?;
        crate::solver::run(&mut state, &bottom, &det, cfg, spec.end_time, &[], |_| {
            Ok(())
        })?;
        out.t = state.t;
        let w = rule.weight(m);
        let phi = table.phi(m);
        for (acc, c) in out.data.chunks_mut(3 * k).zip(state.data.chunks(3)) {
            for var in 0..3 {
                for (a, p) in acc[var * k..(var + 1) * k].iter_mut().zip(phi) {
                    *a += c[var] * p * w;
                }
            }
        }
    }
    Ok(out)
}
