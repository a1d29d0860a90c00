//! Central-upwind interface fluxes and the balanced source term.

use crate::galerkin::TripleProductTensor;
use crate::solver::reconstruct::evaluate_point;
use crate::space::StochasticSpace;
use crate::swe::{Direction, PhysicsParams, PointWork, SgState};

/// Threshold on `a+ - a-` below which an interface counts as degenerate.
pub const DEGENERATE_SPEED_GAP: f64 = 1.0e-14;

/// One-sided speed bounds at an interface, `minus <= 0 <= plus`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalSpeeds {
    pub minus: f64,
    pub plus: f64,
}

impl LocalSpeeds {
    /// Combines the wave speed bounds of the two sides with zero.
    pub fn from_bounds(left: (f64, f64), right: (f64, f64)) -> Self {
        Self {
            minus: left.0.min(right.0).min(0.0),
            plus: left.1.max(right.1).max(0.0),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.plus.max(-self.minus)
    }
}

/// Central-upwind flux from the left/right face states and their physical
/// normal fluxes.
pub fn central_upwind_flux(
    speeds: LocalSpeeds,
    u_left: &[f64],
    u_right: &[f64],
    f_left: &[f64],
    f_right: &[f64],
    out: &mut [f64],
) {
    let LocalSpeeds {
        minus: am,
        plus: ap,
    } = speeds;
    let gap = ap - am;
    if gap < DEGENERATE_SPEED_GAP {
        for ((o, fl), fr) in out.iter_mut().zip(f_left).zip(f_right) {
            *o = 0.5 * (fl + fr);
        }
        return;
    }
    let prod = ap * am / gap;
    for i in 0..out.len() {
        out[i] = (ap * f_left[i] - am * f_right[i]) / gap + prod * (u_right[i] - u_left[i]);
    }
}

/// A face value after desingularization, with its normal flux and speeds.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceValue {
    pub state: Vec<f64>,
    pub velocities: Vec<f64>,
    pub flux: Vec<f64>,
    pub bounds: (f64, f64),
}

/// Desingularizes a face value and evaluates its flux and speed bounds.
pub fn face_value(
    space: &StochasticSpace,
    params: &PhysicsParams,
    eps: f64,
    dir: Direction,
    point: &SgState,
) -> FaceValue {
    let k = point.k();
    let mut out = FaceValue {
        state: vec![0.0; 3 * k],
        velocities: vec![0.0; 2 * k],
        flux: vec![0.0; 3 * k],
        bounds: (0.0, 0.0),
    };
    out.bounds = evaluate_point(
        space,
        params.g,
        eps,
        dir,
        &point.h,
        [&point.qx, &point.qy],
        &mut out.state,
        &mut out.velocities,
        &mut out.flux,
        &mut PointWork::new(k),
    );
    out
}

/// Speeds at an interface between the face values `left` and `right`.
pub fn local_speeds(
    space: &StochasticSpace,
    params: &PhysicsParams,
    eps: f64,
    dir: Direction,
    left: &SgState,
    right: &SgState,
) -> LocalSpeeds {
    let l = face_value(space, params, eps, dir, left);
    let r = face_value(space, params, eps, dir, right);
    LocalSpeeds::from_bounds(l.bounds, r.bounds)
}

fn numerical_flux(
    space: &StochasticSpace,
    params: &PhysicsParams,
    eps: f64,
    dir: Direction,
    left: &SgState,
    right: &SgState,
) -> (Vec<f64>, LocalSpeeds) {
    let l = face_value(space, params, eps, dir, left);
    let r = face_value(space, params, eps, dir, right);
    let speeds = LocalSpeeds::from_bounds(l.bounds, r.bounds);
    let mut out = vec![0.0; 3 * left.k()];
    central_upwind_flux(speeds, &l.state, &r.state, &l.flux, &r.flux, &mut out);
    (out, speeds)
}

/// Flux through `x_{i+1/2}` from the east face of cell `i` (`left`) and
/// the west face of cell `i+1` (`right`).
pub fn numerical_flux_x(
    space: &StochasticSpace,
    params: &PhysicsParams,
    eps: f64,
    left: &SgState,
    right: &SgState,
) -> (Vec<f64>, LocalSpeeds) {
    numerical_flux(space, params, eps, Direction::X, left, right)
}

/// Flux through `y_{j+1/2}` from the north face of cell `j` (`left`) and
/// the south face of cell `j+1` (`right`).
pub fn numerical_flux_y(
    space: &StochasticSpace,
    params: &PhysicsParams,
    eps: f64,
    left: &SgState,
    right: &SgState,
) -> (Vec<f64>, LocalSpeeds) {
    numerical_flux(space, params, eps, Direction::Y, left, right)
}

/// `(0; -g P(h) (B_E - B_W)/dx; -g P(h) (B_N - B_S)/dy)`.
#[allow(clippy::too_many_arguments)]
pub fn well_balanced_source(
    tensor: &TripleProductTensor,
    params: &PhysicsParams,
    h_bar: &[f64],
    b_west: &[f64],
    b_east: &[f64],
    b_south: &[f64],
    b_north: &[f64],
    dx: f64,
    dy: f64,
    out: &mut [f64],
) {
    let k = h_bar.len();
    out[..k].iter_mut().for_each(|v| *v = 0.0);
    let bx: Vec<f64> = b_east
        .iter()
        .zip(b_west)
        .map(|(e, w)| (e - w) / dx)
        .collect();
    let by: Vec<f64> = b_north
        .iter()
        .zip(b_south)
        .map(|(n, s)| (n - s) / dy)
        .collect();
    let (_, rest) = out.split_at_mut(k);
    let (sx, sy) = rest.split_at_mut(k);
    tensor.product_into(h_bar, &bx, sx);
    tensor.product_into(h_bar, &by, sy);
    sx.iter_mut()
        .chain(sy.iter_mut())
        .for_each(|v| *v *= -params.g);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{BetaParams, OrthonormalBasis};
    use approx::assert_abs_diff_eq;

    fn space(k: usize) -> StochasticSpace {
        StochasticSpace::new(OrthonormalBasis::one_dimensional(BetaParams::UNIFORM, k).unwrap())
    }

    fn point(h: &[f64], qx: &[f64], qy: &[f64]) -> SgState {
        SgState::new(h.to_vec().into(), qx.to_vec().into(), qy.to_vec().into()).unwrap()
    }

    #[test]
    fn deterministic_speeds() {
        let s = space(1);
        let p = PhysicsParams::default();
        let a = point(&[1.0], &[0.3], &[0.0]);
        let sp = local_speeds(&s, &p, 0.01, Direction::X, &a, &a);
        assert_abs_diff_eq!(sp.minus, -0.7, epsilon = 1e-14);
        assert_abs_diff_eq!(sp.plus, 1.3, epsilon = 1e-14);
        let fast = point(&[1.0], &[2.0], &[0.0]);
        assert_eq!(
            local_speeds(&s, &p, 0.01, Direction::X, &fast, &fast).minus,
            0.0
        );
    }

    #[test]
    fn still_water_speeds_are_symmetric() {
        let s = space(3);
        let p = PhysicsParams::default();
        let a = point(&[1.0, 0.1, 0.02], &[0.0; 3], &[0.0; 3]);
        let b = point(&[0.8, -0.05, 0.0], &[0.0; 3], &[0.0; 3]);
        let sp = local_speeds(&s, &p, 0.01, Direction::Y, &a, &b);
        let ra = local_speeds(&s, &p, 0.01, Direction::Y, &a, &a);
        assert_abs_diff_eq!(ra.minus, -ra.plus, epsilon = 1e-14);
        assert!(sp.plus >= ra.plus - 1e-14);
    }

    #[test]
    fn consistency_and_lax_friedrichs_form() {
        let s = space(3);
        let p = PhysicsParams::default();
        let a = point(&[1.0, 0.1, 0.02], &[0.2, 0.01, 0.0], &[-0.1, 0.0, 0.01]);
        let (f, _) = numerical_flux_x(&s, &p, 0.01, &a, &a);
        let exact = crate::swe::flux_x(s.tensor(), &a, &p).unwrap();
        for (x, y) in f.iter().zip(&exact) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-13);
        }
        let (ul, ur) = ([1.0, 2.0], [3.0, 5.0]);
        let (fl, fr) = ([0.5, 0.0], [1.5, 2.0]);
        let mut out = [0.0; 2];
        central_upwind_flux(
            LocalSpeeds {
                minus: -2.0,
                plus: 2.0,
            },
            &ul,
            &ur,
            &fl,
            &fr,
            &mut out,
        );
        assert_abs_diff_eq!(out[0], 1.0 - 1.0 * 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out[1], 1.0 - 1.0 * 3.0, epsilon = 1e-15);
        central_upwind_flux(
            LocalSpeeds {
                minus: 0.0,
                plus: 0.0,
            },
            &ul,
            &ur,
            &fl,
            &fr,
            &mut out,
        );
        assert_eq!(out, [1.0, 1.0]);
    }

    #[test]
    fn lake_at_rest_interface_flux() {
        let s = space(3);
        let p = PhysicsParams::default();
        let h = [0.6, 0.01, -0.02];
        let a = point(&h, &[0.0; 3], &[0.0; 3]);
        let (f, _) = numerical_flux_x(&s, &p, 0.01, &a, &a);
        let mut hh = [0.0; 3];
        s.tensor().product_into(&h, &h, &mut hh);
        for m in 0..3 {
            assert_eq!(f[m], 0.0);
            assert_abs_diff_eq!(f[3 + m], 0.5 * hh[m], epsilon = 1e-15);
            assert_eq!(f[6 + m], 0.0);
        }
    }

    #[test]
    fn source_examples() {
        let s = space(1);
        let p = PhysicsParams::default();
        let mut out = [0.0; 3];
        well_balanced_source(
            s.tensor(),
            &p,
            &[1.0],
            &[0.0],
            &[0.01],
            &[0.0],
            &[0.0],
            0.1,
            0.1,
            &mut out,
        );
        assert_abs_diff_eq!(out[1], -0.1, epsilon = 1e-15);
        assert_eq!(out[0], 0.0);
        assert_eq!(out[2], 0.0);
    }
}
