//! Orthonormal polynomial bases for tensor products of Beta densities on
//! `[-1, 1]`, their Gauss rules, and projection onto the truncated space.
//!
//! Each marginal density is `C (1 - x)^alpha (1 + x)^beta`, normalized to
//! integrate to one, so the orthonormal family is the Jacobi family scaled
//! such that `phi_1 == 1`.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::pce::PceVector;

/// Parameters of one Beta-type marginal on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaParams {
    pub const UNIFORM: Self = Self {
        alpha: 0.0,
        beta: 0.0,
    };

    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > -1.0) || !(beta.is_finite() && beta > -1.0) {
            return Err(Error::Domain(format!(
                "Beta parameters must satisfy alpha, beta > -1 (got alpha = {alpha}, beta = {beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }
}

/// Product density of independent Beta marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSpec {
    marginals: Vec<BetaParams>,
}

impl DistributionSpec {
    pub fn new(marginals: Vec<BetaParams>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::Domain(
                "distribution needs at least one dimension".into(),
            ));
        }
        for m in &marginals {
            BetaParams::new(m.alpha, m.beta)?;
        }
        Ok(Self { marginals })
    }

    pub fn uniform(dim: usize) -> Result<Self> {
        Self::new(vec![BetaParams::UNIFORM; dim])
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[BetaParams] {
        &self.marginals
    }
}

/// Ordered set of multi-indices. Ordering is graded lexicographic, so the
/// zero index always comes first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIndexSet {
    dim: usize,
    indices: Vec<Vec<usize>>,
}

impl MultiIndexSet {
    /// Full tensor set `{nu : 0 <= nu_i <= max_degree_i}`.
    pub fn tensor(max_degrees: &[usize]) -> Result<Self> {
        if max_degrees.is_empty() {
            return Err(Error::Domain(
                "index set needs at least one dimension".into(),
            ));
        }
        let mut indices: Vec<Vec<usize>> = vec![vec![]];
        for &p in max_degrees {
            indices = indices
                .into_iter()
                .flat_map(|prefix| {
                    (0..=p).map(move |d| {
                        let mut nu = prefix.clone();
                        nu.push(d);
                        nu
                    })
                })
                .collect();
        }
        Self::from_indices(max_degrees.len(), indices)
    }

    /// Builds a set from arbitrary indices; sorts them into graded
    /// lexicographic order and rejects duplicates or a missing zero index.
    pub fn from_indices(dim: usize, mut indices: Vec<Vec<usize>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain(
                "index set needs at least one dimension".into(),
            ));
        }
        if let Some(bad) = indices.iter().find(|nu| nu.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        indices.sort_by(|a, b| {
            let da: usize = a.iter().sum();
            let db: usize = b.iter().sum();
            da.cmp(&db).then_with(|| a.cmp(b))
        });
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain("duplicate multi-index".into()));
        }
        if indices.first().is_none_or(|nu| nu.iter().any(|&d| d != 0)) {
            return Err(Error::Domain(
                "index set must contain the zero multi-index".into(),
            ));
        }
        Ok(Self { dim, indices })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: usize) -> &[usize] {
        &self.indices[k]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.indices.iter().map(|v| v.as_slice())
    }

    pub fn position(&self, nu: &[usize]) -> Option<usize> {
        self.indices.iter().position(|v| v == nu)
    }

    /// Largest degree appearing in each dimension.
    pub fn max_degrees(&self) -> Vec<usize> {
        (0..self.dim)
            .map(|i| self.indices.iter().map(|nu| nu[i]).max().unwrap_or(0))
            .collect()
    }
}

/// Three-term recurrence of the orthonormal Jacobi polynomials with respect
/// to the normalized density:
/// `b_{n+1} p_{n+1}(x) = (x - a_n) p_n(x) - b_n p_{n-1}(x)`, `p_0 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiRecurrence {
    params: BetaParams,
    /// `a_n`, n = 0..len
    a: Vec<f64>,
    /// `b_n`, n = 0..len (`b_0` unused and zero)
    b: Vec<f64>,
}

impl JacobiRecurrence {
    /// Coefficients for degrees up to `len - 1` and Gauss rules with up to
    /// `len` points.
    pub fn new(params: BetaParams, len: usize) -> Self {
        let (al, be) = (params.alpha, params.beta);
        let mut a = Vec::with_capacity(len);
        let mut b = Vec::with_capacity(len + 1);
        for n in 0..len {
            let an = if n == 0 {
                (be - al) / (al + be + 2.0)
            } else {
                let s = 2.0 * n as f64 + al + be;
                (be * be - al * al) / (s * (s + 2.0))
            };
            a.push(an);
        }
        b.push(0.0);
        for n in 1..=len {
            let nf = n as f64;
            let bn2 = if n == 1 {
                4.0 * (1.0 + al) * (1.0 + be) / ((2.0 + al + be).powi(2) * (3.0 + al + be))
            } else {
                let s = 2.0 * nf + al + be;
                4.0 * nf * (nf + al) * (nf + be) * (nf + al + be) / (s * s * (s + 1.0) * (s - 1.0))
            };
            b.push(bn2.sqrt());
        }
        Self { params, a, b }
    }

    pub fn params(&self) -> BetaParams {
        self.params
    }

    pub fn max_degree(&self) -> usize {
        self.a.len().saturating_sub(1)
    }

    /// Writes `p_0(x), ..., p_{out.len()-1}(x)` into `out`.
    pub fn eval_all(&self, x: f64, out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        assert!(
            out.len() <= self.a.len() + 1,
            "degree beyond recurrence table"
        );
        out[0] = 1.0;
        if out.len() > 1 {
            out[1] = (x - self.a[0]) / self.b[1];
        }
        for n in 1..out.len().saturating_sub(1) {
            out[n + 1] = ((x - self.a[n]) * out[n] - self.b[n] * out[n - 1]) / self.b[n + 1];
        }
    }

    /// `n`-point Gauss rule (Golub-Welsch) for the normalized density.
    /// Nodes ascend; weights sum to one.
    pub fn gauss(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        assert!(
            n >= 1 && n <= self.a.len(),
            "Gauss rule size beyond recurrence table"
        );
        let mut jac = Matrix::zeros(n, n);
        for i in 0..n {
            jac[(i, i)] = self.a[i];
            if i + 1 < n {
                jac[(i, i + 1)] = self.b[i + 1];
                jac[(i + 1, i)] = self.b[i + 1];
            }
        }
        let eig = nalgebra::SymmetricEigen::new(jac);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|j| (eig.eigenvalues[j], eig.eigenvectors[(0, j)].powi(2)))
            .collect();
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        pairs.into_iter().map(|(x, w)| (x, w / total)).unzip()
    }
}

/// Positive quadrature rule on `R^d` for the product density.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn new(dim: usize, nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != dim * weights.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * weights.len(),
                found: nodes.len(),
            });
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::Domain("quadrature weights must be positive".into()));
        }
        Ok(Self {
            dim,
            nodes,
            weights,
        })
    }

    /// Tensor product of one-dimensional rules, the last dimension varying
    /// fastest.
    pub fn tensor(rules: &[(Vec<f64>, Vec<f64>)]) -> Self {
        let dim = rules.len();
        let mut nodes: Vec<Vec<f64>> = vec![vec![]];
        let mut weights = vec![1.0];
        for (x, w) in rules {
            let mut next_nodes = Vec::with_capacity(nodes.len() * x.len());
            let mut next_weights = Vec::with_capacity(nodes.len() * x.len());
            for (prefix, pw) in nodes.iter().zip(&weights) {
                for (xi, wi) in x.iter().zip(w) {
                    let mut p = prefix.clone();
                    p.push(*xi);
                    next_nodes.push(p);
                    next_weights.push(pw * wi);
                }
            }
            nodes = next_nodes;
            weights = next_weights;
        }
        Self {
            dim,
            nodes: nodes.concat(),
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node(&self, m: usize) -> &[f64] {
        &self.nodes[m * self.dim..(m + 1) * self.dim]
    }

    pub fn weight(&self, m: usize) -> f64 {
        self.weights[m]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.nodes
            .chunks(self.dim)
            .zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }
}

/// Orthonormal basis `phi_1 .. phi_K` of `P_Lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    distribution: DistributionSpec,
    index_set: MultiIndexSet,
    recurrences: Vec<JacobiRecurrence>,
}

impl OrthonormalBasis {
    pub fn new(distribution: DistributionSpec, index_set: MultiIndexSet) -> Result<Self> {
        if distribution.dim() != index_set.dim() {
            return Err(Error::DimensionMismatch {
                expected: distribution.dim(),
                found: index_set.dim(),
            });
        }
        let degrees = index_set.max_degrees();
        // Tables long enough for the p3-exact Gauss rules as well.
        let recurrences = distribution
            .marginals()
            .iter()
            .zip(&degrees)
            .map(|(m, &p)| JacobiRecurrence::new(*m, p3_points(p).max(p + 1)))
            .collect();
        Ok(Self {
            distribution,
            index_set,
            recurrences,
        })
    }

    /// Total-order one-dimensional convenience: `Lambda = {0, .., k-1}`.
    pub fn one_dimensional(params: BetaParams, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("basis size must be positive".into()));
        }
        Self::new(
            DistributionSpec::new(vec![params])?,
            MultiIndexSet::tensor(&[k - 1])?,
        )
    }

    pub fn len(&self) -> usize {
        self.index_set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_set.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.index_set.dim()
    }

    pub fn distribution(&self) -> &DistributionSpec {
        &self.distribution
    }

    pub fn index_set(&self) -> &MultiIndexSet {
        &self.index_set
    }

    pub fn recurrence(&self, dim: usize) -> &JacobiRecurrence {
        &self.recurrences[dim]
    }

    /// `Phi(xi) = (phi_1(xi), .., phi_K(xi))`.
    pub fn evaluate(&self, xi: &[f64]) -> Result<PceVector> {
        if xi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: xi.len(),
            });
        }
        let mut out = vec![0.0; self.len()];
        self.evaluate_into(xi, &mut out);
        Ok(PceVector::from(out))
    }

    pub(crate) fn evaluate_into(&self, xi: &[f64], out: &mut [f64]) {
        let univariate: Vec<Vec<f64>> = self
            .recurrences
            .iter()
            .zip(self.index_set.max_degrees())
            .zip(xi)
            .map(|((rec, p), &x)| {
                let mut v = vec![0.0; p + 1];
                rec.eval_all(x, &mut v);
                v
            })
            .collect();
        for (o, nu) in out.iter_mut().zip(self.index_set.iter()) {
            *o = nu
                .iter()
                .zip(&univariate)
                .map(|(&d, vals)| vals[d])
                .product();
        }
    }

    /// Tensor Gauss rule with the given number of points per dimension.
    pub fn gauss_rule(&self, points_per_dim: &[usize]) -> Result<QuadratureRule> {
        if points_per_dim.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: points_per_dim.len(),
            });
        }
        let rules: Vec<_> = self
            .distribution
            .marginals()
            .iter()
            .zip(points_per_dim)
            .map(|(m, &n)| {
                if n == 0 {
                    return Err(Error::Domain("Gauss rule needs at least one point".into()));
                }
                Ok(JacobiRecurrence::new(*m, n).gauss(n))
            })
            .collect::<Result<_>>()?;
        Ok(QuadratureRule::tensor(&rules))
    }

    /// Per-dimension point counts of [`Self::p3_exact_rule`].
    pub fn p3_points_per_dim(&self) -> Vec<usize> {
        self.index_set
            .max_degrees()
            .into_iter()
            .map(p3_points)
            .collect()
    }

    /// Tensor Gauss rule exact on `P_Lambda^3`.
    pub fn p3_exact_rule(&self) -> QuadratureRule {
        self.gauss_rule(&self.p3_points_per_dim())
            .expect("p3 point counts are positive and match the dimension")
    }

    /// Values of `Phi` at every node of `rule`.
    pub fn tabulate(&self, rule: &QuadratureRule) -> NodeTable {
        let k = self.len();
        let mut values = vec![0.0; rule.len() * k];
        for (m, (x, _)) in rule.iter().enumerate() {
            self.evaluate_into(x, &mut values[m * k..(m + 1) * k]);
        }
        NodeTable {
            k,
            weights: rule.weights().to_vec(),
            values,
        }
    }
}

/// Smallest Gauss rule exact to degree `3p`: `2n - 1 >= 3p`.
pub fn p3_points(max_degree: usize) -> usize {
    (3 * max_degree + 2) / 2
}

/// Basis values at quadrature nodes, row `m` holding `Phi(xi_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTable {
    k: usize,
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl NodeTable {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn phi(&self, m: usize) -> &[f64] {
        &self.values[m * self.k..(m + 1) * self.k]
    }

    pub fn weight(&self, m: usize) -> f64 {
        self.weights[m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.k)
    }

    /// Smallest value of the expansion `z` over the nodes.
    pub fn min_value(&self, z: &[f64]) -> f64 {
        self.rows()
            .map(|phi| crate::pce::dot(z, phi))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Discrete projection `z_k = sum_m f(xi_m) phi_k(xi_m) tau_m`.
pub fn pce_project(
    f: impl Fn(&[f64]) -> f64,
    basis: &OrthonormalBasis,
    rule: &QuadratureRule,
) -> PceVector {
    let table = basis.tabulate(rule);
    project_tabulated(f, rule, &table)
}

pub(crate) fn project_tabulated(
    f: impl Fn(&[f64]) -> f64,
    rule: &QuadratureRule,
    table: &NodeTable,
) -> PceVector {
    let mut out = vec![0.0; table.k()];
    for (m, (x, w)) in rule.iter().enumerate() {
        let fw = f(x) * w;
        for (o, p) in out.iter_mut().zip(table.phi(m)) {
            *o += fw * p;
        }
    }
    PceVector::from(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn uniform(k: usize) -> OrthonormalBasis {
        OrthonormalBasis::one_dimensional(BetaParams::UNIFORM, k).unwrap()
    }

    #[test]
    fn tensor_index_set_sizes() {
        assert_eq!(MultiIndexSet::tensor(&[3, 3]).unwrap().len(), 16);
        let single = MultiIndexSet::tensor(&[0]).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single.get(0), &[0]);
        let line = MultiIndexSet::tensor(&[3]).unwrap();
        let got: Vec<_> = line.iter().map(|nu| nu[0]).collect();
        assert_eq!(got, vec![0, 1, 2, 3]);
        assert!(MultiIndexSet::tensor(&[]).is_err());
    }

    #[test]
    fn graded_lexicographic_order() {
        let set = MultiIndexSet::tensor(&[2, 1]).unwrap();
        let got: Vec<Vec<usize>> = set.iter().map(|v| v.to_vec()).collect();
        assert_eq!(
            got,
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![1, 0],
                vec![1, 1],
                vec![2, 0],
                vec![2, 1]
            ]
        );
    }

    #[test]
    fn index_set_rejects_duplicates_and_missing_zero() {
        assert!(MultiIndexSet::from_indices(1, vec![vec![0], vec![0]]).is_err());
        assert!(MultiIndexSet::from_indices(1, vec![vec![1]]).is_err());
    }

    #[test]
    fn invalid_beta_parameters_are_rejected() {
        assert!(BetaParams::new(-1.0, 0.0).is_err());
        assert!(BetaParams::new(0.0, f64::NAN).is_err());
        assert!(DistributionSpec::new(vec![]).is_err());
    }

    #[test]
    fn uniform_second_basis_function_is_sqrt3_x() {
        let b = uniform(2);
        let phi = b.evaluate(&[0.5]).unwrap();
        assert_abs_diff_eq!(phi[1], 0.866_025_403_784_438_6, epsilon = 1e-14);
        assert_eq!(b.evaluate(&[0.0]).unwrap().to_vec(), vec![1.0, 0.0]);
        let at_one = b.evaluate(&[1.0]).unwrap();
        assert_abs_diff_eq!(at_one[1], 3f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn first_basis_function_is_one() {
        let dist = DistributionSpec::new(vec![
            BetaParams::new(1.0, 3.0).unwrap(),
            BetaParams::UNIFORM,
        ])
        .unwrap();
        let b = OrthonormalBasis::new(dist, MultiIndexSet::tensor(&[3, 3]).unwrap()).unwrap();
        for xi in [[-0.9, 0.2], [0.0, 0.0], [0.7, -1.0]] {
            assert_eq!(b.evaluate(&xi).unwrap()[0], 1.0);
        }
        assert!(b.evaluate(&[0.1]).is_err());
    }

    #[test]
    fn orthogonality_with_ten_point_rule() {
        let b = uniform(3);
        let rule = b.gauss_rule(&[10]).unwrap();
        let ip = rule.integrate(|x| {
            let phi = b.evaluate(x).unwrap();
            phi[1] * phi[2]
        });
        assert_abs_diff_eq!(ip, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn p3_rule_sizes_follow_one_dimensional_bound() {
        assert_eq!(uniform(4).p3_exact_rule().len(), 5);
        assert_eq!(uniform(8).p3_exact_rule().len(), 11);
        assert_eq!(uniform(1).p3_exact_rule().len(), 1);
        for k in 1usize..12 {
            let bound = (3 * k).div_ceil(2) - 1;
            assert_eq!(uniform(k).p3_exact_rule().len(), bound.max(1));
        }
    }

    #[test]
    fn k2_rule_nodes_are_plus_minus_inverse_sqrt3() {
        let rule = uniform(2).p3_exact_rule();
        assert_eq!(rule.len(), 2);
        assert_abs_diff_eq!(rule.node(0)[0], -1.0 / 3f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(rule.node(1)[0], 1.0 / 3f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn beta_rule_matches_analytic_mean() {
        // (alpha, beta) = (1, 3): mean (beta - alpha) / (alpha + beta + 2) = 1/3
        let b = OrthonormalBasis::one_dimensional(BetaParams::new(1.0, 3.0).unwrap(), 3).unwrap();
        let rule = b.p3_exact_rule();
        assert_abs_diff_eq!(rule.integrate(|x| x[0]), 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(rule.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn projection_examples() {
        let b = uniform(4);
        let rule = b.p3_exact_rule();
        let c = pce_project(|_| 2.5, &b, &rule);
        assert_abs_diff_eq!(c[0], 2.5, epsilon = 1e-14);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-14));

        let e3 = pce_project(|x| b.evaluate(x).unwrap()[2], &b, &rule);
        for (i, v) in e3.iter().enumerate() {
            assert_abs_diff_eq!(*v, if i == 2 { 1.0 } else { 0.0 }, epsilon = 1e-12);
        }

        // 0.1 (xi + 1): <f, 1> = 0.1, <f, sqrt3 xi> = 0.1 sqrt3 E[xi^2] = 0.1 / sqrt3
        let lin = pce_project(|x| 0.1 * (x[0] + 1.0), &b, &rule);
        assert_abs_diff_eq!(lin[0], 0.1, epsilon = 1e-14);
        assert_abs_diff_eq!(lin[1], 0.1 / 3f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(lin[2], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(lin[3], 0.0, epsilon = 1e-14);
    }
}
