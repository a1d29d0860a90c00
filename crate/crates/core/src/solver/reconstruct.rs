//! Piecewise linear reconstruction, positivity correction, moment filter
//! and velocity desingularization at the four face midpoints of a cell.

use crate::basis::NodeTable;
use crate::galerkin::TripleProductTensor;
use crate::linalg::SymEig;
use crate::pce::dot;
use crate::solver::config::SolverConfig;
use crate::solver::grid::{BottomField, StateField};
use crate::space::StochasticSpace;
use crate::swe::{flux_with_velocities, Direction, PointWork};

/// Face midpoints of a cell, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    W = 0,
    E = 1,
    S = 2,
    N = 3,
}

impl Face {
    pub const ALL: [Face; 4] = [Face::W, Face::E, Face::S, Face::N];

    pub fn direction(self) -> Direction {
        match self {
            Face::W | Face::E => Direction::X,
            Face::S | Face::N => Direction::Y,
        }
    }
}

/// Scalar minmod of three candidates.
pub fn minmod3(a: f64, b: f64, c: f64) -> f64 {
    if a > 0.0 && b > 0.0 && c > 0.0 {
        a.min(b).min(c)
    } else if a < 0.0 && b < 0.0 && c < 0.0 {
        a.max(b).max(c)
    } else {
        0.0
    }
}

/// Componentwise generalized minmod slope from three consecutive cell
/// averages spaced `d` apart.
pub fn minmod_slope(
    left: &[f64],
    center: &[f64],
    right: &[f64],
    d: f64,
    theta: f64,
    out: &mut [f64],
) {
    for (((o, l), c), r) in out.iter_mut().zip(left).zip(center).zip(right) {
        *o = minmod3(
            theta * (c - l) / d,
            (r - l) / (2.0 * d),
            theta * (r - c) / d,
        );
    }
}

/// Replaces a face height with a nonpositive mean by zero and doubles the
/// opposite face so that the four faces still average to `h_bar`.
///
/// `points` holds the W, E, S, N heights (`4K` values). Returns the number
/// of corrected faces.
pub fn positivity_correction(points: &mut [f64], h_bar: &[f64]) -> usize {
    let k = h_bar.len();
    let mut count = 0;
    for (bad, opposite) in [
        (Face::W, Face::E),
        (Face::E, Face::W),
        (Face::S, Face::N),
        (Face::N, Face::S),
    ] {
        let b = bad as usize * k;
        if points[b] <= 0.0 {
            points[b..b + k].iter_mut().for_each(|v| *v = 0.0);
            let o = opposite as usize * k;
            for (p, h) in points[o..o + k].iter_mut().zip(h_bar) {
                *p = 2.0 * h;
            }
            count += 1;
        }
    }
    count
}

/// Smallest `mu'` with `z_1 + (1 - mu') (z(xi_m) - z_1) >= 0` at every node.
/// Zero if `z` is already nonnegative at all nodes or if `z_1 <= 0`.
pub fn minimal_filter_parameter(z: &[f64], table: &NodeTable) -> f64 {
    let z1 = z[0];
    if z1 <= 0.0 {
        return 0.0;
    }
    table
        .rows()
        .map(|phi| dot(z, phi) - z1)
        .filter(|&s| s < -z1)
        .map(|s| 1.0 + z1 / s)
        .fold(0.0, f64::max)
}

/// Outcome of filtering the four face heights of a cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterOutcome {
    /// Common parameter applied to all faces (0 when nothing was filtered).
    pub mu: f64,
    /// Minimal parameters of the individual faces.
    pub face_mu: [f64; 4],
}

/// Damps the higher moments of all four face heights by the common factor
/// `1 - mu`, `mu = min(max_f mu'_f + delta, 1)`, and writes the average of
/// the filtered faces to `h_bar_out`.
pub fn hyperbolicity_filter(
    points: &mut [f64],
    table: &NodeTable,
    delta: f64,
    h_bar_out: &mut [f64],
) -> FilterOutcome {
    let k = h_bar_out.len();
    let mut face_mu = [0.0; 4];
    for (f, mu) in face_mu.iter_mut().enumerate() {
        *mu = minimal_filter_parameter(&points[f * k..(f + 1) * k], table);
    }
    let worst = face_mu.iter().copied().fold(0.0, f64::max);
    let mu = if worst > 0.0 {
        (worst + delta).min(1.0)
    } else {
        0.0
    };
    if mu > 0.0 {
        for f in 0..4 {
            points[f * k + 1..(f + 1) * k]
                .iter_mut()
                .for_each(|v| *v *= 1.0 - mu);
        }
    }
    for (m, o) in h_bar_out.iter_mut().enumerate() {
        *o = 0.25 * (points[m] + points[k + m] + points[2 * k + m] + points[3 * k + m]);
    }
    FilterOutcome { mu, face_mu }
}

/// `sqrt(2) s / sqrt(s^4 + max(s^4, eps^4))`: the reciprocal `1/s` for
/// `s >= eps`, smoothly going to zero as `s -> 0`.
pub fn corrected_reciprocal(s: f64, eps: f64) -> f64 {
    let s4 = s.powi(4);
    std::f64::consts::SQRT_2 * s / (s4 + s4.max(eps.powi(4))).sqrt()
}

/// Velocities from the corrected inverse of `P(h)` and the discharges
/// recomputed from them.
#[derive(Debug, Clone, PartialEq)]
pub struct Desingularized {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub qx: Vec<f64>,
    pub qy: Vec<f64>,
}

pub fn desingularize_velocity(
    tensor: &TripleProductTensor,
    h: &[f64],
    qx: &[f64],
    qy: &[f64],
    eps: f64,
) -> Desingularized {
    let k = h.len();
    let eig = SymEig::new(&tensor.p_matrix(h));
    let cor: Vec<f64> = eig
        .values
        .iter()
        .map(|&s| corrected_reciprocal(s, eps))
        .collect();
    let mut out = Desingularized {
        u: vec![0.0; k],
        v: vec![0.0; k],
        qx: vec![0.0; k],
        qy: vec![0.0; k],
    };
    eig.apply_diag(&cor, qx, &mut out.u);
    eig.apply_diag(&cor, qy, &mut out.v);
    tensor.product_into(h, &out.u, &mut out.qx);
    tensor.product_into(h, &out.v, &mut out.qy);
    out
}

/// Desingularizes the point value `(h, qx, qy)` and evaluates the normal
/// flux and wave speed bounds in direction `dir`. Writes `3K` state values,
/// `2K` velocity values and `3K` flux values.
#[allow(clippy::too_many_arguments)]
pub(crate) fn evaluate_point(
    space: &StochasticSpace,
    g: f64,
    eps: f64,
    dir: Direction,
    h: &[f64],
    q: [&[f64]; 2],
    state_out: &mut [f64],
    vel_out: &mut [f64],
    flux_out: &mut [f64],
    work: &mut PointWork,
) -> (f64, f64) {
    let k = h.len();
    let tensor = space.tensor();
    work.decompose(tensor, h);
    for i in 0..k {
        let s = work.vals[i];
        let cor = corrected_reciprocal(s, eps);
        work.w[i] = cor;
        work.root[i] = (g * s.max(0.0)).sqrt();
        work.inv[i] = (cor.max(0.0) / g).sqrt();
    }
    let (u, v) = vel_out.split_at_mut(k);
    work.apply_weights(q[0], u);
    work.apply_weights(q[1], v);
    let (sh, rest) = state_out.split_at_mut(k);
    let (sqx, sqy) = rest.split_at_mut(k);
    sh.copy_from_slice(h);
    tensor.product_into(h, u, sqx);
    tensor.product_into(h, v, sqy);
    flux_with_velocities(tensor, g, h, [sqx, sqy], [u, v], dir, flux_out);
    let (qn, un) = match dir {
        Direction::X => (&*sqx, &*u),
        Direction::Y => (&*sqy, &*v),
    };
    work.speed_bounds(tensor, qn, un, g)
}

/// Face values of every cell after correction, filtering and
/// desingularization.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedState {
    pub k: usize,
    /// Per cell and face (W, E, S, N): `(h, qx, qy)`.
    pub points: Vec<f64>,
    /// Per cell and face: `(u, v)`.
    pub velocities: Vec<f64>,
    /// Per cell: the common filter parameter.
    pub mu: Vec<f64>,
    /// Per cell: the cell average of `h` consistent with the faces.
    pub h_bar: Vec<f64>,
}

impl ReconstructedState {
    pub fn point(&self, cell: usize, face: Face) -> &[f64] {
        let s = 3 * self.k;
        let off = (cell * 4 + face as usize) * s;
        &self.points[off..off + s]
    }

    pub fn velocity(&self, cell: usize, face: Face) -> &[f64] {
        let s = 2 * self.k;
        let off = (cell * 4 + face as usize) * s;
        &self.velocities[off..off + s]
    }
}

/// Neighbour index along one axis under the boundary conditions. Ghost
/// cells are never stored: extrapolation maps them to the boundary cell,
/// periodicity wraps.
#[inline]
pub(crate) fn neighbour(i: usize, n: usize, step: isize, periodic: bool) -> usize {
    let m = i as isize + step;
    if m < 0 {
        if periodic {
            (m + n as isize) as usize
        } else {
            0
        }
    } else if m >= n as isize {
        if periodic {
            (m - n as isize) as usize
        } else {
            n - 1
        }
    } else {
        m as usize
    }
}

/// Statistics of the processing of one cell.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct CellInfo {
    pub mu: f64,
    pub corrections: usize,
}

/// Output slices of one cell.
pub(crate) struct CellOut<'a> {
    pub points: &'a mut [f64],
    pub velocities: &'a mut [f64],
    pub fluxes: &'a mut [f64],
    pub speeds: &'a mut [(f64, f64)],
    pub h_bar: &'a mut [f64],
    pub work: &'a mut PointWork,
}

/// Runs the full face pipeline for cell `(i, j)`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn process_cell(
    state: &StateField,
    bottom: &BottomField,
    space: &StochasticSpace,
    cfg: &SolverConfig,
    eps: f64,
    i: usize,
    j: usize,
    out: CellOut<'_>,
) -> CellInfo {
    let k = state.k;
    let grid = &state.grid;
    let (xp, yp) = (cfg.boundaries.x_periodic(), cfg.boundaries.y_periodic());
    let (il, ir) = (neighbour(i, grid.nx, -1, xp), neighbour(i, grid.nx, 1, xp));
    let (js, jn) = (neighbour(j, grid.ny, -1, yp), neighbour(j, grid.ny, 1, yp));

    // surface and discharges of the cell and its four neighbours
    let gather = |ii: usize, jj: usize| -> Vec<f64> {
        let c = state.cell(ii, jj);
        let b = bottom.center(ii, jj);
        let mut v = c.to_vec();
        for m in 0..k {
            v[m] += b[m];
        }
        v
    };
    let center = gather(i, j);
    let s = 3 * k;
    let mut sx = vec![0.0; s];
    let mut sy = vec![0.0; s];
    minmod_slope(
        &gather(il, j),
        &center,
        &gather(ir, j),
        grid.dx,
        cfg.theta,
        &mut sx,
    );
    minmod_slope(
        &gather(i, js),
        &center,
        &gather(i, jn),
        grid.dy,
        cfg.theta,
        &mut sy,
    );

    // face values of (eta, qx, qy)
    let mut faces = vec![0.0; 4 * s];
    for m in 0..s {
        faces[m] = center[m] - 0.5 * grid.dx * sx[m];
        faces[s + m] = center[m] + 0.5 * grid.dx * sx[m];
        faces[2 * s + m] = center[m] - 0.5 * grid.dy * sy[m];
        faces[3 * s + m] = center[m] + 0.5 * grid.dy * sy[m];
    }

    // heights from the surface and the bottom at each face
    let face_bottom = [
        bottom.x_face(i, j),
        bottom.x_face(i + 1, j),
        bottom.y_face(i, j),
        bottom.y_face(i, j + 1),
    ];
    let mut heights = vec![0.0; 4 * k];
    for f in 0..4 {
        for m in 0..k {
            heights[f * k + m] = faces[f * s + m] - face_bottom[f][m];
        }
    }

    let h_bar = state.h(i, j);
    let corrections = positivity_correction(&mut heights, h_bar);
    let mut filtered_bar = vec![0.0; k];
    let outcome = hyperbolicity_filter(&mut heights, space.table(), cfg.delta, &mut filtered_bar);
    if corrections > 0 || outcome.mu > 0.0 {
        out.h_bar.copy_from_slice(&filtered_bar);
    } else {
        out.h_bar.copy_from_slice(h_bar);
    }

    let g = cfg.physics.g;
    for face in Face::ALL {
        let f = face as usize;
        let h = &heights[f * k..(f + 1) * k];
        let q = [
            &faces[f * s + k..f * s + 2 * k],
            &faces[f * s + 2 * k..(f + 1) * s],
        ];
        out.speeds[f] = evaluate_point(
            space,
            g,
            eps,
            face.direction(),
            h,
            q,
            &mut out.points[f * s..(f + 1) * s],
            &mut out.velocities[f * 2 * k..(f + 1) * 2 * k],
            &mut out.fluxes[f * s..(f + 1) * s],
            out.work,
        );
    }
    CellInfo {
        mu: outcome.mu,
        corrections,
    }
}

/// Face values of every cell (for inspection; the right-hand side runs the
/// same pipeline internally).
pub fn reconstruct(
    state: &StateField,
    bottom: &BottomField,
    space: &StochasticSpace,
    cfg: &SolverConfig,
) -> ReconstructedState {
    let k = state.k;
    let n = state.grid.cells();
    let eps = cfg.epsilon_for(state.grid.dx, state.grid.dy);
    let mut rec = ReconstructedState {
        k,
        points: vec![0.0; n * 12 * k],
        velocities: vec![0.0; n * 8 * k],
        mu: vec![0.0; n],
        h_bar: vec![0.0; n * k],
    };
    let mut fluxes = vec![0.0; 12 * k];
    let mut speeds = [(0.0, 0.0); 4];
    let mut work = PointWork::new(k);
    for j in 0..state.grid.ny {
        for i in 0..state.grid.nx {
            let c = state.grid.index(i, j);
            let info = process_cell(
                state,
                bottom,
                space,
                cfg,
                eps,
                i,
                j,
                CellOut {
                    points: &mut rec.points[c * 12 * k..(c + 1) * 12 * k],
                    velocities: &mut rec.velocities[c * 8 * k..(c + 1) * 8 * k],
                    fluxes: &mut fluxes,
                    speeds: &mut speeds,
                    h_bar: &mut rec.h_bar[c * k..(c + 1) * k],
                    work: &mut work,
                },
            );
            rec.mu[c] = info.mu;
        }
    }
    rec
}
