//! Galerkin algebra on coefficient vectors: the triple-product tensor, the
//! multiplication matrix `P(z)`, products, divisions and positivity checks.

use crate::basis::{NodeTable, OrthonormalBasis, QuadratureRule};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymEig};
use crate::pce::PceVector;

/// Relative eigenvalue threshold below which `P(a)` counts as singular.
pub const SINGULAR_RTOL: f64 = 1.0e-12;

const SNAP_TOL: f64 = 1.0e-14;

/// The `K` symmetric matrices `(M_k)_{lm} = <phi_k, phi_l phi_m>`.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleProductTensor {
    k: usize,
    dense: Vec<f64>,
    /// Non-zero entries `(k, l, m, value)` with `l <= m`.
    sparse: Vec<(u16, u16, u16, f64)>,
}

impl TripleProductTensor {
    /// Builds the tensor by the p3-exact quadrature of `basis`.
    pub fn new(basis: &OrthonormalBasis) -> Self {
        let k = basis.len();
        let rule = basis.p3_exact_rule();
        let table = basis.tabulate(&rule);
        let set = basis.index_set();
        let mut dense = vec![0.0; k * k * k];
        for a in 0..k {
            for b in a..k {
                for c in b..k {
                    let v = if a == 0 {
                        if b == c {
                            1.0
                        } else {
                            0.0
                        }
                    } else if structurally_zero(set.get(a), set.get(b), set.get(c)) {
                        0.0
                    } else {
                        (0..table.len())
                            .map(|m| {
                                let phi = table.phi(m);
                                table.weight(m) * phi[a] * phi[b] * phi[c]
                            })
                            .sum::<f64>()
                    };
                    // quadrature noise on entries that vanish by parity
                    let v = if v.abs() < SNAP_TOL { 0.0 } else { v };
                    for (x, y, z) in [
                        (a, b, c),
                        (a, c, b),
                        (b, a, c),
                        (b, c, a),
                        (c, a, b),
                        (c, b, a),
                    ] {
                        dense[(x * k + y) * k + z] = v;
                    }
                }
            }
        }
        let mut sparse = Vec::new();
        for a in 0..k {
            for l in 0..k {
                for m in l..k {
                    let v = dense[(a * k + l) * k + m];
                    if v != 0.0 {
                        sparse.push((a as u16, l as u16, m as u16, v));
                    }
                }
            }
        }
        Self { k, dense, sparse }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `<phi_a, phi_l phi_m>` (0-based indices).
    pub fn get(&self, a: usize, l: usize, m: usize) -> f64 {
        self.dense[(a * self.k + l) * self.k + m]
    }

    /// The matrix `M_a` (0-based).
    pub fn matrix(&self, a: usize) -> Matrix {
        let k = self.k;
        Matrix::from_fn(k, k, |l, m| self.get(a, l, m))
    }

    /// `P(z) = sum_k z_k M_k`.
    pub fn p_matrix(&self, z: &[f64]) -> Matrix {
        let mut out = Matrix::zeros(self.k, self.k);
        self.p_matrix_into(z, &mut out);
        out
    }

    pub fn p_matrix_into(&self, z: &[f64], out: &mut Matrix) {
        debug_assert_eq!(z.len(), self.k);
        out.fill(0.0);
        for &(a, l, m, v) in &self.sparse {
            let w = z[a as usize] * v;
            out[(l as usize, m as usize)] += w;
        }
        for l in 0..self.k {
            for m in 0..l {
                out[(l, m)] = out[(m, l)];
            }
        }
    }

    /// `P(z)` into a row-major `K x K` buffer.
    pub(crate) fn p_flat_into(&self, z: &[f64], out: &mut [f64]) {
        let k = self.k;
        out.iter_mut().for_each(|o| *o = 0.0);
        for &(a, l, m, v) in &self.sparse {
            let w = z[a as usize] * v;
            let (l, m) = (l as usize, m as usize);
            out[l * k + m] += w;
            if l != m {
                out[m * k + l] += w;
            }
        }
    }

    /// `P(a) b` without assembling the matrix.
    pub fn product_into(&self, a: &[f64], b: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for &(kk, l, m, v) in &self.sparse {
            let w = a[kk as usize] * v;
            let (l, m) = (l as usize, m as usize);
            out[l] += w * b[m];
            if l != m {
                out[m] += w * b[l];
            }
        }
    }
}

/// A triple product vanishes identically when, in some dimension, one
/// degree exceeds the sum of the other two.
fn structurally_zero(a: &[usize], b: &[usize], c: &[usize]) -> bool {
    a.iter()
        .zip(b)
        .zip(c)
        .any(|((&x, &y), &z)| x > y + z || y > x + z || z > x + y)
}

fn check_len(tensor: &TripleProductTensor, v: &[f64]) -> Result<()> {
    if v.len() != tensor.k() {
        return Err(Error::DimensionMismatch {
            expected: tensor.k(),
            found: v.len(),
        });
    }
    Ok(())
}

pub fn p_matrix(tensor: &TripleProductTensor, z: &[f64]) -> Result<Matrix> {
    check_len(tensor, z)?;
    Ok(tensor.p_matrix(z))
}

/// Pseudo-spectral product `P(a) b`.
pub fn galerkin_product(tensor: &TripleProductTensor, a: &[f64], b: &[f64]) -> Result<PceVector> {
    check_len(tensor, a)?;
    check_len(tensor, b)?;
    let mut out = vec![0.0; tensor.k()];
    tensor.product_into(a, b, &mut out);
    Ok(PceVector::from(out))
}

/// Solves `P(a) x = b`.
pub fn galerkin_divide(tensor: &TripleProductTensor, a: &[f64], b: &[f64]) -> Result<PceVector> {
    check_len(tensor, a)?;
    check_len(tensor, b)?;
    let eig = SymEig::new(&tensor.p_matrix(a));
    let max_abs = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min_abs = eig.values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if !(min_abs > SINGULAR_RTOL * max_abs) {
        return Err(Error::SingularOperator {
            min_abs_eigenvalue: min_abs,
        });
    }
    let inv: Vec<f64> = eig.values.iter().map(|s| 1.0 / s).collect();
    let mut out = vec![0.0; tensor.k()];
    eig.apply_diag(&inv, b, &mut out);
    Ok(PceVector::from(out))
}

/// Symmetric positive definite square root.
pub fn sqrt_pd(m: &Matrix) -> Result<Matrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let eig = SymEig::new(m);
    let min = eig.min();
    if !(min > 0.0) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min,
        });
    }
    Ok(eig.spectral_map(f64::sqrt))
}

/// Both hyperbolicity certificates of a water-height expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolicityCertificate {
    pub pd: bool,
    pub min_eigenvalue: f64,
    pub pointwise: bool,
    pub min_node_value: f64,
}

pub fn certify_hyperbolic(
    tensor: &TripleProductTensor,
    basis: &OrthonormalBasis,
    rule: &QuadratureRule,
    h: &[f64],
) -> Result<HyperbolicityCertificate> {
    check_len(tensor, h)?;
    if basis.len() != tensor.k() {
        return Err(Error::DimensionMismatch {
            expected: tensor.k(),
            found: basis.len(),
        });
    }
    Ok(certify_tabulated(tensor, &basis.tabulate(rule), h))
}

pub(crate) fn certify_tabulated(
    tensor: &TripleProductTensor,
    table: &NodeTable,
    h: &[f64],
) -> HyperbolicityCertificate {
    let min_eigenvalue = SymEig::new(&tensor.p_matrix(h)).min();
    let min_node_value = table.min_value(h);
    HyperbolicityCertificate {
        pd: min_eigenvalue > 0.0,
        min_eigenvalue,
        pointwise: min_node_value > 0.0,
        min_node_value,
    }
}
