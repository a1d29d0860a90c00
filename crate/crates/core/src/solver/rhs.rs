use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::solver::config::{SolverConfig, SourceDiscretization};
use crate::solver::flux::{central_upwind_flux, well_balanced_source, LocalSpeeds};
use crate::solver::grid::{BottomField, StateField};
use crate::solver::reconstruct::{neighbour, process_cell, CellInfo, CellOut, Face};
use crate::space::StochasticSpace;
use crate::swe::PointWork;

/// Filter and correction activity during one right-hand side evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FilterStats {
    /// Cells whose face heights were filtered.
    pub activations: usize,
    /// Faces reset by the positivity correction.
    pub corrections: usize,
    pub mu_max: f64,
    pub mu_sum: f64,
}

impl FilterStats {
    pub fn merge(&mut self, other: &FilterStats) {
        self.activations += other.activations;
        self.corrections += other.corrections;
        self.mu_max = self.mu_max.max(other.mu_max);
        self.mu_sum += other.mu_sum;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhsOutput {
    /// `d/dt` of every cell average, laid out like [`StateField::data`].
    pub rhs: Vec<f64>,
    /// Largest `max(a+, -a-, b+, -b-)` over all interfaces.
    pub max_speed: f64,
    pub stats: FilterStats,
}

struct FaceData {
    k: usize,
    points: Vec<f64>,
    fluxes: Vec<f64>,
    speeds: Vec<(f64, f64)>,
}

impl FaceData {
    fn state(&self, cell: usize, face: Face) -> &[f64] {
        let s = 3 * self.k;
        let o = (cell * 4 + face as usize) * s;
        &self.points[o..o + s]
    }

    fn flux(&self, cell: usize, face: Face) -> &[f64] {
        let s = 3 * self.k;
        let o = (cell * 4 + face as usize) * s;
        &self.fluxes[o..o + s]
    }

    fn bounds(&self, cell: usize, face: Face) -> (f64, f64) {
        self.speeds[cell * 4 + face as usize]
    }

    fn interface(&self, left: (usize, Face), right: (usize, Face), out: &mut [f64]) -> LocalSpeeds {
        let speeds =
            LocalSpeeds::from_bounds(self.bounds(left.0, left.1), self.bounds(right.0, right.1));
        central_upwind_flux(
            speeds,
            self.state(left.0, left.1),
            self.state(right.0, right.1),
            self.flux(left.0, left.1),
            self.flux(right.0, right.1),
            out,
        );
        speeds
    }
}

/// Semi-discrete right-hand side. The cell averages of `h` in `state` are
/// replaced by the averages of the corrected and filtered face values.
pub fn semidiscrete_rhs(
    state: &mut StateField,
    bottom: &BottomField,
    space: &StochasticSpace,
    cfg: &SolverConfig,
) -> Result<RhsOutput> {
    let grid = state.grid;
    let (nx, ny, k) = (grid.nx, grid.ny, state.k);
    if space.k() != k || bottom.k != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: if space.k() != k { space.k() } else { bottom.k },
        });
    }
    if bottom.grid != grid {
        return Err(Error::IncompatibleGrids(
            "bottom and state grids differ".into(),
        ));
    }
    let eps = cfg.epsilon_for(grid.dx, grid.dy);
    let s = 3 * k;
    let n = grid.cells();

    let mut faces = FaceData {
        k,
        points: vec![0.0; n * 4 * s],
        fluxes: vec![0.0; n * 4 * s],
        speeds: vec![(0.0, 0.0); n * 4],
    };
    let mut h_bar = vec![0.0; n * k];
    let mut infos = vec![CellInfo::default(); n];
    {
        let st: &StateField = state;
        faces
            .points
            .par_chunks_mut(nx * 4 * s)
            .zip(faces.fluxes.par_chunks_mut(nx * 4 * s))
            .zip(faces.speeds.par_chunks_mut(nx * 4))
            .zip(h_bar.par_chunks_mut(nx * k))
            .zip(infos.par_chunks_mut(nx))
            .enumerate()
            .for_each(|(j, ((((pts, fl), sp), hb), inf))| {
                let mut vel = vec![0.0; 8 * k];
                let mut work = PointWork::new(k);
                for i in 0..nx {
                    inf[i] = process_cell(
                        st,
                        bottom,
                        space,
                        cfg,
                        eps,
                        i,
                        j,
                        CellOut {
                            points: &mut pts[i * 4 * s..(i + 1) * 4 * s],
                            velocities: &mut vel,
                            fluxes: &mut fl[i * 4 * s..(i + 1) * 4 * s],
                            speeds: &mut sp[i * 4..(i + 1) * 4],
                            h_bar: &mut hb[i * k..(i + 1) * k],
                            work: &mut work,
                        },
                    );
                }
            });
    }
    for (c, cell) in state.data.chunks_mut(s).enumerate() {
        cell[..k].copy_from_slice(&h_bar[c * k..(c + 1) * k]);
    }
    let mut stats = FilterStats::default();
    for info in &infos {
        if info.mu > 0.0 {
            stats.activations += 1;
        }
        stats.corrections += info.corrections;
        stats.mu_max = stats.mu_max.max(info.mu);
        stats.mu_sum += info.mu;
    }

    let (xp, yp) = (cfg.boundaries.x_periodic(), cfg.boundaries.y_periodic());
    let idx = |i: usize, j: usize| grid.index(i, j);

    // fluxes through x = x_{i-1/2}, i = 0..=nx
    let mut x_flux = vec![0.0; (nx + 1) * ny * s];
    let x_speed: f64 = x_flux
        .par_chunks_mut((nx + 1) * s)
        .enumerate()
        .map(|(j, row)| {
            let mut amax = 0.0f64;
            for i in 0..=nx {
                let left = if i > 0 {
                    (idx(i - 1, j), Face::E)
                } else if xp {
                    (idx(nx - 1, j), Face::E)
                } else {
                    (idx(0, j), Face::W)
                };
                let right = if i < nx {
                    (idx(i, j), Face::W)
                } else if xp {
                    (idx(0, j), Face::W)
                } else {
                    (idx(nx - 1, j), Face::E)
                };
                let sp = faces.interface(left, right, &mut row[i * s..(i + 1) * s]);
                amax = amax.max(sp.max_abs());
            }
            amax
        })
        .reduce(|| 0.0, f64::max);

    // fluxes through y = y_{j-1/2}, j = 0..=ny
    let mut y_flux = vec![0.0; nx * (ny + 1) * s];
    let y_speed: f64 = y_flux
        .par_chunks_mut(nx * s)
        .enumerate()
        .map(|(j, row)| {
            let mut bmax = 0.0f64;
            for i in 0..nx {
                let below = if j > 0 {
                    (idx(i, j - 1), Face::N)
                } else if yp {
                    (idx(i, ny - 1), Face::N)
                } else {
                    (idx(i, 0), Face::S)
                };
                let above = if j < ny {
                    (idx(i, j), Face::S)
                } else if yp {
                    (idx(i, 0), Face::S)
                } else {
                    (idx(i, ny - 1), Face::N)
                };
                let sp = faces.interface(below, above, &mut row[i * s..(i + 1) * s]);
                bmax = bmax.max(sp.max_abs());
            }
            bmax
        })
        .reduce(|| 0.0, f64::max);
    let max_speed = x_speed.max(y_speed);
    if !max_speed.is_finite() {
        return Err(Error::NonHyperbolic(format!(
            "non-finite local speed at t = {}",
            state.t
        )));
    }

    let st: &StateField = state;
    let mut rhs = vec![0.0; n * s];
    rhs.par_chunks_mut(nx * s).enumerate().for_each(|(j, row)| {
        let mut src = vec![0.0; s];
        let mut bx = vec![0.0; k];
        let mut by = vec![0.0; k];
        for i in 0..nx {
            let out = &mut row[i * s..(i + 1) * s];
            let fw = &x_flux[(j * (nx + 1) + i) * s..(j * (nx + 1) + i + 1) * s];
            let fe = &x_flux[(j * (nx + 1) + i + 1) * s..(j * (nx + 1) + i + 2) * s];
            let gs = &y_flux[(j * nx + i) * s..(j * nx + i + 1) * s];
            let gn = &y_flux[((j + 1) * nx + i) * s..((j + 1) * nx + i + 1) * s];
            let h = st.h(i, j);
            match cfg.source {
                SourceDiscretization::WellBalanced => well_balanced_source(
                    space.tensor(),
                    &cfg.physics,
                    h,
                    bottom.x_face(i, j),
                    bottom.x_face(i + 1, j),
                    bottom.y_face(i, j),
                    bottom.y_face(i, j + 1),
                    grid.dx,
                    grid.dy,
                    &mut src,
                ),
                SourceDiscretization::CellCentered => {
                    let (il, ir) = (neighbour(i, nx, -1, xp), neighbour(i, nx, 1, xp));
                    let (js, jn) = (neighbour(j, ny, -1, yp), neighbour(j, ny, 1, yp));
                    for m in 0..k {
                        bx[m] = bottom.center(ir, j)[m] - bottom.center(il, j)[m];
                        by[m] = bottom.center(i, jn)[m] - bottom.center(i, js)[m];
                    }
                    well_balanced_source(
                        space.tensor(),
                        &cfg.physics,
                        h,
                        &vec![0.0; k],
                        &bx,
                        &vec![0.0; k],
                        &by,
                        2.0 * grid.dx,
                        2.0 * grid.dy,
                        &mut src,
                    );
                }
            }
            for m in 0..s {
                out[m] = -(fe[m] - fw[m]) / grid.dx - (gn[m] - gs[m]) / grid.dy + src[m];
            }
        }
    });

    Ok(RhsOutput {
        rhs,
        max_speed,
        stats,
    })
}
