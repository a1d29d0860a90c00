use std::ops::{Deref, DerefMut};

/// Coefficients of a polynomial chaos expansion in the fixed multi-index
/// ordering of an [`OrthonormalBasis`](crate::basis::OrthonormalBasis).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PceVector(Vec<f64>);

impl PceVector {
    pub fn zeros(k: usize) -> Self {
        Self(vec![0.0; k])
    }

    /// The deterministic constant `c`, i.e. `(c, 0, ..., 0)`.
    pub fn constant(k: usize, c: f64) -> Self {
        let mut v = vec![0.0; k];
        if k > 0 {
            v[0] = c;
        }
        Self(v)
    }

    /// Unit vector `e_index` (0-based).
    pub fn unit(k: usize, index: usize) -> Self {
        let mut v = vec![0.0; k];
        v[index] = 1.0;
        Self(v)
    }

    pub fn from_slice(values: &[f64]) -> Self {
        Self(values.to_vec())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Expectation of the expansion: the first coefficient.
    pub fn mean(&self) -> f64 {
        self.0.first().copied().unwrap_or(0.0)
    }

    /// Variance: sum of squares of the higher coefficients.
    pub fn variance(&self) -> f64 {
        self.0.iter().skip(1).map(|c| c * c).sum()
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Euclidean norm of the coefficients, equal to the L2(rho) norm of the
    /// expansion by orthonormality.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Value of the expansion given the basis evaluated at a point.
    pub fn evaluate_with(&self, phi: &[f64]) -> f64 {
        dot(&self.0, phi)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(self.0.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &[f64]) -> Self {
        Self(self.0.iter().zip(other).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &[f64]) -> Self {
        Self(self.0.iter().zip(other).map(|(a, b)| a - b).collect())
    }
}

impl From<Vec<f64>> for PceVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl Deref for PceVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for PceVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
