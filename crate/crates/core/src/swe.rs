//! The stochastic Galerkin shallow water system: fluxes, source, Jacobians,
//! wave speed bounds and the symmetrized directional Jacobian.

use crate::error::{Error, Result};
use crate::galerkin::{galerkin_divide, TripleProductTensor};
use crate::linalg::{dot, sym_eigen_flat, sym_extremes_flat, Matrix, SymEig};
use crate::pce::PceVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsParams {
    pub g: f64,
}

impl PhysicsParams {
    pub fn new(g: f64) -> Result<Self> {
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::Domain(format!("gravity must be positive, got {g}")));
        }
        Ok(Self { g })
    }
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self { g: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    X,
    Y,
}

/// Coefficients `(h, qx, qy)` of one stochastic state.
#[derive(Debug, Clone, PartialEq)]
pub struct SgState {
    pub h: PceVector,
    pub qx: PceVector,
    pub qy: PceVector,
}

impl SgState {
    pub fn new(h: PceVector, qx: PceVector, qy: PceVector) -> Result<Self> {
        for v in [&qx, &qy] {
            if v.len() != h.len() {
                return Err(Error::DimensionMismatch {
                    expected: h.len(),
                    found: v.len(),
                });
            }
        }
        Ok(Self { h, qx, qy })
    }

    /// Splits a stacked vector `(h, qx, qy)` of length `3K`.
    pub fn from_stacked(u: &[f64]) -> Result<Self> {
        if !u.len().is_multiple_of(3) || u.is_empty() {
            return Err(Error::Domain(format!(
                "stacked state length {} is not a positive multiple of 3",
                u.len()
            )));
        }
        let k = u.len() / 3;
        Ok(Self {
            h: PceVector::from_slice(&u[..k]),
            qx: PceVector::from_slice(&u[k..2 * k]),
            qy: PceVector::from_slice(&u[2 * k..]),
        })
    }

    pub fn k(&self) -> usize {
        self.h.len()
    }

    pub fn stacked(&self) -> Vec<f64> {
        [&self.h[..], &self.qx[..], &self.qy[..]].concat()
    }

    /// The state with the two horizontal directions exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            h: self.h.clone(),
            qx: self.qy.clone(),
            qy: self.qx.clone(),
        }
    }
}

fn check_tensor(tensor: &TripleProductTensor, k: usize) -> Result<()> {
    if tensor.k() != k {
        return Err(Error::DimensionMismatch {
            expected: tensor.k(),
            found: k,
        });
    }
    Ok(())
}

/// `P(h)^{-1} q`.
pub fn velocity_pce(tensor: &TripleProductTensor, h: &[f64], q: &[f64]) -> Result<PceVector> {
    galerkin_divide(tensor, h, q)
}

/// Flux in direction `dir` from given velocity coefficients `u`, `v`.
/// Used both with exact and with desingularized velocities.
pub(crate) fn flux_with_velocities(
    tensor: &TripleProductTensor,
    g: f64,
    h: &[f64],
    q: [&[f64]; 2],
    vel: [&[f64]; 2],
    dir: Direction,
    out: &mut [f64],
) {
    let k = h.len();
    let (h_out, rest) = out.split_at_mut(k);
    let (x_out, y_out) = rest.split_at_mut(k);
    let mut hh = [0.0f64; 64];
    let mut hh_heap;
    let hh: &mut [f64] = if k <= 64 {
        &mut hh[..k]
    } else {
        hh_heap = vec![0.0; k];
        &mut hh_heap
    };
    tensor.product_into(h, h, hh);
    let qn = match dir {
        Direction::X => q[0],
        Direction::Y => q[1],
    };
    h_out.copy_from_slice(qn);
    tensor.product_into(qn, vel[0], x_out);
    tensor.product_into(qn, vel[1], y_out);
    let pressure = match dir {
        Direction::X => x_out,
        Direction::Y => y_out,
    };
    for (p, v) in pressure.iter_mut().zip(hh.iter()) {
        *p += 0.5 * g * v;
    }
}

fn exact_flux(
    tensor: &TripleProductTensor,
    state: &SgState,
    params: &PhysicsParams,
    dir: Direction,
) -> Result<Vec<f64>> {
    check_tensor(tensor, state.k())?;
    let u = velocity_pce(tensor, &state.h, &state.qx)?;
    let v = velocity_pce(tensor, &state.h, &state.qy)?;
    let mut out = vec![0.0; 3 * state.k()];
    flux_with_velocities(
        tensor,
        params.g,
        &state.h,
        [&state.qx, &state.qy],
        [&u, &v],
        dir,
        &mut out,
    );
    Ok(out)
}

/// `F = (qx; P(qx) P^{-1}(h) qx + g/2 P(h) h; P(qx) P^{-1}(h) qy)`.
pub fn flux_x(
    tensor: &TripleProductTensor,
    state: &SgState,
    params: &PhysicsParams,
) -> Result<Vec<f64>> {
    exact_flux(tensor, state, params, Direction::X)
}

/// `G = (qy; P(qy) P^{-1}(h) qx; P(qy) P^{-1}(h) qy + g/2 P(h) h)`.
pub fn flux_y(
    tensor: &TripleProductTensor,
    state: &SgState,
    params: &PhysicsParams,
) -> Result<Vec<f64>> {
    exact_flux(tensor, state, params, Direction::Y)
}

/// `(0; -g P(h) Bx; -g P(h) By)`.
pub fn source(
    tensor: &TripleProductTensor,
    h: &[f64],
    bx: &[f64],
    by: &[f64],
    params: &PhysicsParams,
) -> Result<Vec<f64>> {
    let k = h.len();
    check_tensor(tensor, k)?;
    for v in [bx, by] {
        check_tensor(tensor, v.len())?;
    }
    let mut out = vec![0.0; 3 * k];
    tensor.product_into(h, bx, &mut out[k..2 * k]);
    tensor.product_into(h, by, &mut out[2 * k..]);
    out[k..].iter_mut().for_each(|v| *v *= -params.g);
    Ok(out)
}

fn set_block(m: &mut Matrix, bi: usize, bj: usize, k: usize, block: &Matrix) {
    m.view_mut((bi * k, bj * k), (k, k)).copy_from(block);
}

/// Jacobian of the flux in direction `dir`, assembled blockwise.
fn jacobian(
    tensor: &TripleProductTensor,
    state: &SgState,
    params: &PhysicsParams,
    dir: Direction,
) -> Result<Matrix> {
    let k = state.k();
    check_tensor(tensor, k)?;
    let u = velocity_pce(tensor, &state.h, &state.qx)?;
    let v = velocity_pce(tensor, &state.h, &state.qy)?;
    let ph = tensor.p_matrix(&state.h);
    let ph_inv = ph.clone().try_inverse().ok_or(Error::SingularOperator {
        min_abs_eigenvalue: 0.0,
    })?;
    let pu = tensor.p_matrix(&u);
    let pv = tensor.p_matrix(&v);
    let eye = Matrix::identity(k, k);
    // normal discharge / velocity and tangential velocity
    let (qn, pn, pt) = match dir {
        Direction::X => (&state.qx, &pu, &pv),
        Direction::Y => (&state.qy, &pv, &pu),
    };
    let corner = tensor.p_matrix(qn) * &ph_inv;
    // rows/columns ordered (h, q_normal, q_tangential)
    let r1 = &ph * params.g - &corner * pn;
    let r2 = &corner + pn;
    let t1 = -(&corner * pt);
    let mut local = Matrix::zeros(3 * k, 3 * k);
    set_block(&mut local, 0, 1, k, &eye);
    set_block(&mut local, 1, 0, k, &r1);
    set_block(&mut local, 1, 1, k, &r2);
    set_block(&mut local, 2, 0, k, &t1);
    set_block(&mut local, 2, 1, k, pt);
    set_block(&mut local, 2, 2, k, &corner);
    Ok(match dir {
        Direction::X => local,
        Direction::Y => permute_tangential(&local, k),
    })
}

/// Exchanges the second and third block rows and columns.
fn permute_tangential(m: &Matrix, k: usize) -> Matrix {
    let idx = |b: usize| match b {
        1 => 2,
        2 => 1,
        b => b,
    };
    Matrix::from_fn(3 * k, 3 * k, |i, j| {
        let (bi, ri) = (i / k, i % k);
        let (bj, rj) = (j / k, j % k);
        m[(idx(bi) * k + ri, idx(bj) * k + rj)]
    })
}

pub fn jacobian_x(
    tensor: &TripleProductTensor,
    state: &SgState,
    params: &PhysicsParams,
) -> Result<Matrix> {
    jacobian(tensor, state, params, Direction::X)
}

pub fn jacobian_y(
    tensor: &TripleProductTensor,
    state: &SgState,
    params: &PhysicsParams,
) -> Result<Matrix> {
    jacobian(tensor, state, params, Direction::Y)
}

/// Square root factors of `g P(h)`: `E` and an approximate inverse of it.
pub(crate) struct HeightFactors {
    pub e: Matrix,
    pub e_inv: Matrix,
}

impl HeightFactors {
    /// Exact factors; fails unless `P(h)` is positive definite.
    pub fn exact(eig: &SymEig, g: f64) -> Result<Self> {
        let min = eig.min();
        if !(min > 0.0) {
            return Err(Error::NonHyperbolic(format!(
                "P(h) has smallest eigenvalue {min:e}"
            )));
        }
        Ok(Self {
            e: eig.spectral_map(|s| (g * s).sqrt()),
            e_inv: eig.spectral_map(|s| 1.0 / (g * s).sqrt()),
        })
    }
}

/// Scratch space for the eigenbasis of `P(h)` at one point value and the
/// wave speed bounds built on it. Reused across points to keep the face
/// loop free of allocations.
pub(crate) struct PointWork {
    k: usize,
    /// Row `j` is the unit eigenvector of `vals[j]`.
    vecs: Vec<f64>,
    pub vals: Vec<f64>,
    /// Spectral weights for `apply_weights`.
    pub w: Vec<f64>,
    /// Diagonal of `E` and of its (approximate) inverse in the eigenbasis.
    pub root: Vec<f64>,
    pub inv: Vec<f64>,
    y: Vec<f64>,
    pmat: Vec<f64>,
    tmp: Vec<f64>,
    qv: Vec<f64>,
    block: Vec<f64>,
    bd: Vec<f64>,
    be: Vec<f64>,
}

impl PointWork {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            vecs: vec![0.0; k * k],
            vals: vec![0.0; k],
            w: vec![0.0; k],
            root: vec![0.0; k],
            inv: vec![0.0; k],
            y: vec![0.0; k],
            pmat: vec![0.0; k * k],
            tmp: vec![0.0; k * k],
            qv: vec![0.0; k * k],
            block: vec![0.0; 4 * k * k],
            bd: vec![0.0; 2 * k],
            be: vec![0.0; 2 * k],
        }
    }

    /// Eigendecomposition of `P(h)`.
    pub fn decompose(&mut self, tensor: &TripleProductTensor, h: &[f64]) {
        tensor.p_flat_into(h, &mut self.vecs);
        sym_eigen_flat(
            &mut self.vecs,
            self.k,
            &mut self.vals,
            &mut self.y,
            &mut self.tmp,
        );
    }

    /// `out = V diag(w) Vᵀ x`.
    pub fn apply_weights(&mut self, x: &[f64], out: &mut [f64]) {
        let k = self.k;
        out.iter_mut().for_each(|o| *o = 0.0);
        for j in 0..k {
            let row = &self.vecs[j * k..(j + 1) * k];
            let c = dot(row, x) * self.w[j];
            for (o, r) in out.iter_mut().zip(row) {
                *o += c * r;
            }
        }
    }

    /// `Vᵀ P(z) V` into `qv` (`into_block = false`) or the upper-left
    /// block of `block`.
    fn congruence(&mut self, tensor: &TripleProductTensor, z: &[f64], into_block: bool) {
        let k = self.k;
        tensor.p_flat_into(z, &mut self.pmat);
        // row b of tmp is P(z) v_b
        for b in 0..k {
            let v = &self.vecs[b * k..(b + 1) * k];
            for i in 0..k {
                self.tmp[b * k + i] = dot(&self.pmat[i * k..(i + 1) * k], v);
            }
        }
        let (out, stride) = if into_block {
            (&mut self.block, 2 * k)
        } else {
            (&mut self.qv, k)
        };
        for a in 0..k {
            let va = &self.vecs[a * k..(a + 1) * k];
            for b in 0..=a {
                let acc = dot(va, &self.tmp[b * k..(b + 1) * k]);
                out[a * stride + b] = acc;
                out[b * stride + a] = acc;
            }
        }
    }

    /// Extreme eigenvalues of the directional Jacobian with normal discharge
    /// `qn` and velocity `un`, after `decompose` and with `root`, `inv` set.
    ///
    /// In the eigenbasis of `P(h)` the symmetrized Jacobian reduces to the
    /// `2K` matrix `[[B, diag(root)], [diag(root), Ã]]` with
    /// `B = Vᵀ P(un) V` and `Ã = diag(inv) Vᵀ g P(qn) V diag(inv)`. Its
    /// remaining `K` eigenvalues are those of `Ã`, a compression of the
    /// same matrix, so they lie between its extremes.
    pub fn speed_bounds(
        &mut self,
        tensor: &TripleProductTensor,
        qn: &[f64],
        un: &[f64],
        g: f64,
    ) -> (f64, f64) {
        let k = self.k;
        let n = 2 * k;
        self.congruence(tensor, qn, false);
        self.congruence(tensor, un, true);
        for a in 0..k {
            for b in 0..k {
                self.block[(k + a) * n + k + b] =
                    g * self.inv[a] * self.inv[b] * self.qv[a * k + b];
                self.block[a * n + k + b] = 0.0;
                self.block[(k + a) * n + b] = 0.0;
            }
            self.block[a * n + k + a] = self.root[a];
            self.block[(k + a) * n + a] = self.root[a];
        }
        sym_extremes_flat(&mut self.block, n, &mut self.bd, &mut self.be)
    }
}

fn symmetrize(m: Matrix) -> Matrix {
    (&m + m.transpose()) * 0.5
}

/// Smallest and largest eigenvalue of the flux Jacobian in direction `dir`.
pub fn wave_speed_bounds(
    tensor: &TripleProductTensor,
    state: &SgState,
    dir: Direction,
    params: &PhysicsParams,
) -> Result<(f64, f64)> {
    check_tensor(tensor, state.k())?;
    let g = params.g;
    let mut work = PointWork::new(state.k());
    work.decompose(tensor, &state.h);
    let min = work.vals.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(Error::NonHyperbolic(format!(
            "P(h) has smallest eigenvalue {min:e}"
        )));
    }
    for i in 0..state.k() {
        let s = work.vals[i];
        work.w[i] = 1.0 / s;
        work.root[i] = (g * s).sqrt();
        work.inv[i] = 1.0 / (g * s).sqrt();
    }
    let qn = match dir {
        Direction::X => &state.qx,
        Direction::Y => &state.qy,
    };
    let mut un = vec![0.0; state.k()];
    work.apply_weights(qn, &mut un);
    let (lo, hi) = work.speed_bounds(tensor, qn, &un, g);
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::NonHyperbolic("non-finite wave speed".into()));
    }
    Ok((lo, hi))
}

/// The symmetric matrix similar to `nx dF/dU + ny dG/dU`.
pub fn symmetrized_jacobian(
    tensor: &TripleProductTensor,
    state: &SgState,
    n: [f64; 2],
    params: &PhysicsParams,
) -> Result<Matrix> {
    let k = state.k();
    check_tensor(tensor, k)?;
    let norm = (n[0] * n[0] + n[1] * n[1]).sqrt();
    if !((norm - 1.0).abs() < 1e-12) {
        return Err(Error::Domain(format!(
            "direction must be a unit vector, |n| = {norm}"
        )));
    }
    let g = params.g;
    let eig = SymEig::new(&tensor.p_matrix(&state.h));
    let f = HeightFactors::exact(&eig, g)?;
    let inv: Vec<f64> = eig.values.iter().map(|s| 1.0 / s).collect();
    let mut u = vec![0.0; k];
    let mut v = vec![0.0; k];
    eig.apply_diag(&inv, &state.qx, &mut u);
    eig.apply_diag(&inv, &state.qy, &mut v);
    let a_t = symmetrize(&f.e_inv * (tensor.p_matrix(&state.qx) * g) * &f.e_inv);
    let c_t = symmetrize(&f.e_inv * (tensor.p_matrix(&state.qy) * g) * &f.e_inv);
    let b = tensor.p_matrix(&u);
    let d = tensor.p_matrix(&v);
    let (nx, ny) = (n[0], n[1]);
    let plus = (&b + &a_t) * nx + (&d + &c_t) * ny;
    let j11 = &f.e * 2.0 + &plus;
    let j13 = (&b - &a_t) * nx + (&d - &c_t) * ny;
    let j22 = &a_t * (2.0 * nx) + &c_t * (2.0 * ny);
    let j33 = &plus - &f.e * 2.0;
    let mut j = Matrix::zeros(3 * k, 3 * k);
    set_block(&mut j, 0, 0, k, &j11);
    set_block(&mut j, 0, 2, k, &j13);
    set_block(&mut j, 1, 1, k, &j22);
    set_block(&mut j, 2, 0, k, &j13);
    set_block(&mut j, 2, 2, k, &j33);
    Ok(j * 0.5)
}
