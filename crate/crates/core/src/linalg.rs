//! Small dense symmetric helpers on top of `nalgebra`.

use nalgebra::DMatrix;

pub type Matrix = DMatrix<f64>;

/// Eigendecomposition `A = V diag(values) V^T` of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymEig {
    pub fn new(a: &Matrix) -> Self {
        let n = a.nrows();
        let mut flat: Vec<f64> = a.transpose().as_slice().to_vec();
        let mut values = vec![0.0; n];
        let (mut e, mut x) = (vec![0.0; n], vec![0.0; n * n]);
        if n > 0 {
            sym_eigen_flat(&mut flat, n, &mut values, &mut e, &mut x);
        }
        // row j of `flat` is the eigenvector of values[j]
        Self {
            values,
            vectors: Matrix::from_column_slice(n, n, &flat),
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `V diag(f(values)) V^T`.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        self.spectral_map_indexed(|j| f(self.values[j]))
    }

    /// `V diag(d) V^T` with `d_i = f(i)`.
    pub fn spectral_map_indexed(&self, f: impl Fn(usize) -> f64) -> Matrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let s = f(j);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        &scaled * self.vectors.transpose()
    }

    /// `V diag(weights) V^T x` without forming the matrix.
    pub fn apply_diag(&self, weights: &[f64], x: &[f64], out: &mut [f64]) {
        let n = self.values.len();
        let v = &self.vectors;
        let mut tmp = [0.0f64; 64];
        let mut heap;
        let coords: &mut [f64] = if n <= 64 {
            &mut tmp[..n]
        } else {
            heap = vec![0.0; n];
            &mut heap
        };
        for j in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                s += v[(i, j)] * x[i];
            }
            coords[j] = s * weights[j];
        }
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += v[(i, j)] * coords[j];
            }
            out[i] = s;
        }
    }
}

/// Extreme eigenvalues of a symmetric matrix.
pub fn sym_extremes(mut a: Matrix) -> (f64, f64) {
    let n = a.nrows();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    sym_extremes_flat(a.as_mut_slice(), n, &mut d, &mut e)
}

/// Extreme eigenvalues of the symmetric `n x n` matrix in `a` (full
/// storage, destroyed),
/// with `d`, `e` as scratch of length `n`.
///
/// Eigenvalues only: Householder tridiagonalization followed by implicit
/// QL iterations, without accumulating any transformations. This sits on
/// the per-face hot path, where the general-purpose solver's allocations
/// dominate at the small sizes involved.
pub(crate) fn sym_extremes_flat(
    a: &mut [f64],
    n: usize,
    d: &mut [f64],
    e: &mut [f64],
) -> (f64, f64) {
    match n {
        0 => return (f64::INFINITY, f64::NEG_INFINITY),
        1 => return (a[0], a[0]),
        2 => {
            let (p, q, r) = (a[0], a[1], a[3]);
            let m = 0.5 * (p + r);
            let half = 0.5 * (p - r);
            let rad = (half * half + q * q).sqrt();
            return (m - rad, m + rad);
        }
        _ => {}
    }
    householder(a, n, d, e, None);
    implicit_ql(d, e, None);
    d.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

/// Full eigendecomposition of the symmetric `n x n` matrix in `a`. On
/// return `d` holds the eigenvalues and row `j` of the row-major `a` the
/// unit eigenvector of `d[j]`; `e` and `x` are scratch of length `n` and
/// `n * n`.
pub(crate) fn sym_eigen_flat(a: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64], x: &mut [f64]) {
    if n == 1 {
        d[0] = a[0];
        a[0] = 1.0;
        return;
    }
    householder(a, n, d, e, Some(&mut *x));
    a.copy_from_slice(x);
    implicit_ql(d, e, Some(a));
}

/// Dot product with four partial sums, so the loop vectorizes.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for t in 0..4 {
            acc[t] += x[t] * y[t];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += s x`.
#[inline]
fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    for (a, b) in y.iter_mut().zip(x) {
        *a += s * b;
    }
}

/// Householder reduction of the symmetric matrix in `a` (full storage) to
/// tridiagonal form with diagonal `d` and subdiagonal `e[1..]`. With `q`,
/// the transposed orthogonal transformation is accumulated there, so that
/// `a = Qᵀᵀ T Qᵀ`.
fn householder(a: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64], mut q: Option<&mut [f64]>) {
    if let Some(q) = q.as_deref_mut() {
        q.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            q[i * n + i] = 1.0;
        }
    }
    for i in (1..n).rev() {
        let l = i - 1;
        let m = l + 1;
        if l == 0 {
            e[i] = a[i * n];
            continue;
        }
        let scale: f64 = a[i * n..i * n + m].iter().map(|v| v.abs()).sum();
        if scale == 0.0 {
            e[i] = a[i * n + l];
            continue;
        }
        let (head, tail) = a.split_at_mut(i * n);
        let u = &mut tail[..m];
        u.iter_mut().for_each(|v| *v /= scale);
        let mut h = dot(u, u);
        let f = u[l];
        let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
        e[i] = scale * g;
        h -= f * g;
        u[l] = f - g;
        let u: &[f64] = u;
        // p = A u / h, then q = p - (uᵀp / 2h) u, both into e[..m]
        for j in 0..m {
            e[j] = dot(&head[j * n..j * n + m], u) / h;
        }
        let hh = dot(&e[..m], u) / (h + h);
        for j in 0..m {
            e[j] -= hh * u[j];
        }
        for j in 0..m {
            let row = &mut head[j * n..j * n + m];
            axpy(row, -u[j], &e[..m]);
            axpy(row, -e[j], u);
        }
        if let Some(q) = q.as_deref_mut() {
            // Qᵀ <- (I - u uᵀ / h) Qᵀ, touching rows 0..m
            d[..n].iter_mut().for_each(|v| *v = 0.0);
            for j in 0..m {
                axpy(d, u[j], &q[j * n..(j + 1) * n]);
            }
            for j in 0..m {
                axpy(&mut q[j * n..(j + 1) * n], -u[j] / h, d);
            }
        }
    }
    e[0] = 0.0;
    for i in 0..n {
        d[i] = a[i * n + i];
    }
}

/// Eigenvalues (into `d`) of the symmetric tridiagonal matrix with
/// diagonal `d` and subdiagonal `e[1..]`, by implicit QL with Wilkinson
/// shifts. When `z` is given its rows are rotated along.
fn implicit_ql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = (g * g + 1.0).sqrt();
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = (f * f + g * g).sqrt();
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    let (lo, hi) = z.split_at_mut((i + 1) * n);
                    let zi = &mut lo[i * n..];
                    let zn = &mut hi[..n];
                    for (a, b) in zi.iter_mut().zip(zn.iter_mut()) {
                        let t = *b;
                        *b = s * *a + c * t;
                        *a = c * *a - s * t;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

pub fn max_abs(a: &Matrix) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}
