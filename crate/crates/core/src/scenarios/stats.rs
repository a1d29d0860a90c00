use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::galerkin::galerkin_divide;
use crate::solver::{BottomField, Grid, SolverConfig, StateField};
use crate::space::StochasticSpace;

use super::ScenarioSpec;

/// Per-cell mean and standard deviation of a PCE field.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentField {
    pub grid: Grid,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl MomentField {
    pub fn max_std(&self) -> f64 {
        self.std.iter().copied().fold(0.0, f64::max)
    }
}

/// Moments of a field stored as consecutive `k`-vectors, one per cell.
pub fn moments(grid: &Grid, k: usize, values: &[f64]) -> Result<MomentField> {
    if values.len() != grid.cells() * k {
        return Err(Error::DimensionMismatch {
            expected: grid.cells() * k,
            found: values.len(),
        });
    }
    let (mean, std) = values
        .chunks(k)
        .map(|z| (z[0], z[1..].iter().map(|c| c * c).sum::<f64>().sqrt()))
        .unzip();
    Ok(MomentField {
        grid: *grid,
        mean,
        std,
    })
}

/// Moments of the water surface `h̄ + B̄`.
pub fn surface_moments(state: &StateField, bottom: &BottomField) -> Result<MomentField> {
    let k = state.k;
    let w: Vec<f64> = state
        .cells()
        .zip(bottom.centers.chunks(k))
        .flat_map(|(c, b)| (0..k).map(move |m| c[m] + b[m]))
        .collect();
    moments(&state.grid, k, &w)
}

/// Averages a field on an integer refinement of `coarse` down to `coarse`.
pub fn restrict(fine: &StateField, coarse: &Grid) -> Result<StateField> {
    let (rx, ry) = coarse.refinement_factor(&fine.grid).ok_or_else(|| {
        Error::IncompatibleGrids(format!(
            "{}x{} is not an integer refinement of {}x{}",
            fine.grid.nx, fine.grid.ny, coarse.nx, coarse.ny
        ))
    })?;
    let s = fine.stride();
    let mut out = StateField::zeros(*coarse, fine.k);
    out.t = fine.t;
    let w = 1.0 / (rx * ry) as f64;
    for j in 0..coarse.ny {
        for i in 0..coarse.nx {
            let acc = out.cell_mut(i, j);
            for jj in j * ry..(j + 1) * ry {
                for ii in i * rx..(i + 1) * rx {
                    let c = fine.cell(ii, jj);
                    for m in 0..s {
                        acc[m] += w * c[m];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `sum |C| (|ĥ - ĥref| + |q̂x - q̂xref| + |q̂y - q̂yref|)` with Euclidean
/// coefficient norms and the reference averaged down to the coarse grid.
pub fn error_norm(state: &StateField, reference: &StateField) -> Result<f64> {
    if state.k != reference.k {
        return Err(Error::DimensionMismatch {
            expected: state.k,
            found: reference.k,
        });
    }
    let r = restrict(reference, &state.grid)?;
    let k = state.k;
    let norm = |v: &[f64], w: &[f64]| {
        v.iter()
            .zip(w)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let total: f64 = state
        .cells()
        .zip(r.cells())
        .map(|(a, b)| {
            norm(&a[..k], &b[..k])
                + norm(&a[k..2 * k], &b[k..2 * k])
                + norm(&a[2 * k..], &b[2 * k..])
        })
        .sum();
    Ok(total * state.grid.cell_area())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub nx: usize,
    pub ny: usize,
    pub error: f64,
    /// `log(e_prev / e) / log(nx / nx_prev)`; absent on the first row.
    pub order: Option<f64>,
}

/// Errors against a reference run and observed orders between successive
/// grids. Grids are `(nx, ny)`; the reference must refine each of them.
pub fn convergence_table(
    spec: &ScenarioSpec,
    grids: &[(usize, usize)],
    reference: (usize, usize),
    cfg: &SolverConfig,
) -> Result<Vec<ConvergenceRow>> {
    let fine = spec.grid(reference.0, reference.1)?;
    for &(nx, ny) in grids {
        if spec.grid(nx, ny)?.refinement_factor(&fine).is_none() {
            return Err(Error::IncompatibleGrids(format!(
                "reference {}x{} does not refine {nx}x{ny}",
                reference.0, reference.1
            )));
        }
    }
    let reference = spec
        .simulate(reference.0, reference.1, cfg, spec.end_time, |_| Ok(()))?
        .state;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(grids.len());
    for &(nx, ny) in grids {
        let state = spec.simulate(nx, ny, cfg, spec.end_time, |_| Ok(()))?.state;
        let error = error_norm(&state, &reference)?;
        let order = rows
            .last()
            .map(|p| (p.error / error).ln() / (nx as f64 / p.nx as f64).ln());
        rows.push(ConvergenceRow {
            nx,
            ny,
            error,
            order,
        });
    }
    Ok(rows)
}

/// Largest `|P(q̂x) P(ĥ)⁻¹ q̂y - P(q̂y) P(ĥ)⁻¹ q̂x|` over cells: the gap
/// between the two Galerkin closures of `qx qy / h`.
pub fn closure_discrepancy(state: &StateField, space: &StochasticSpace) -> Result<f64> {
    let k = state.k;
    let t = space.tensor();
    state
        .data
        .par_chunks(3 * k)
        .map(|c| -> Result<f64> {
            let (h, qx, qy) = (&c[..k], &c[k..2 * k], &c[2 * k..]);
            let u = galerkin_divide(t, h, qx)?;
            let v = galerkin_divide(t, h, qy)?;
            let mut a = vec![0.0; k];
            let mut b = vec![0.0; k];
            t.product_into(qx, &v, &mut a);
            t.product_into(qy, &u, &mut b);
            Ok(a.iter()
                .zip(&b)
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt())
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{BetaParams, OrthonormalBasis};

    #[test]
    fn moment_examples() {
        let g = Grid::new(2, 1, [0.0, 1.0], [0.0, 1.0]).unwrap();
        let m = moments(&g, 3, &[2.0, 0.3, 0.4, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(m.mean, vec![2.0, 1.0]);
        assert!((m.std[0] - 0.5).abs() < 1e-15);
        assert_eq!(m.std[1], 0.0);
        let flipped = moments(&g, 3, &[2.0, -0.3, -0.4, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(flipped.std, m.std);
    }

    #[test]
    fn error_norm_examples() {
        let g = Grid::new(1, 1, [0.0, 1.0], [0.0, 1.0]).unwrap();
        let mut a = StateField::zeros(g, 2);
        let b = a.clone();
        assert_eq!(error_norm(&a, &b).unwrap(), 0.0);
        a.data[0] = 0.3;
        a.data[1] = 0.4;
        assert!((error_norm(&a, &b).unwrap() - 0.5).abs() < 1e-15);
        let odd = StateField::zeros(Grid::new(3, 3, [0.0, 1.0], [0.0, 1.0]).unwrap(), 2);
        let two = StateField::zeros(Grid::new(2, 2, [0.0, 1.0], [0.0, 1.0]).unwrap(), 2);
        assert!(matches!(
            error_norm(&two, &odd),
            Err(Error::IncompatibleGrids(_))
        ));
    }

    #[test]
    fn restriction_averages() {
        let fine_grid = Grid::new(2, 2, [0.0, 1.0], [0.0, 1.0]).unwrap();
        let mut fine = StateField::zeros(fine_grid, 1);
        for (c, v) in fine.data.chunks_mut(3).zip([1.0, 2.0, 3.0, 4.0]) {
            c[0] = v;
        }
        let coarse = restrict(&fine, &Grid::new(1, 1, [0.0, 1.0], [0.0, 1.0]).unwrap()).unwrap();
        assert_eq!(coarse.data[0], 2.5);
    }

    #[test]
    fn discrepancy_vanishes_for_commuting_cases() {
        let g = Grid::new(1, 1, [0.0, 1.0], [0.0, 1.0]).unwrap();
        let det = StochasticSpace::deterministic();
        let mut st = StateField::zeros(g, 1);
        st.data.copy_from_slice(&[2.0, 0.3, -0.7]);
        assert_eq!(closure_discrepancy(&st, &det).unwrap(), 0.0);
        let space = StochasticSpace::new(
            OrthonormalBasis::one_dimensional(BetaParams::UNIFORM, 3).unwrap(),
        );
        let mut st = StateField::zeros(g, 3);
        st.data
            .copy_from_slice(&[1.0, 0.2, 0.05, 0.3, 0.1, 0.02, 0.3, 0.1, 0.02]);
        assert!(closure_discrepancy(&st, &space).unwrap() < 1e-15);
        st.data[8] = -0.05;
        assert!(closure_discrepancy(&st, &space).unwrap() > 1e-6);
    }
}
