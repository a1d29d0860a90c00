use crate::basis::{NodeTable, OrthonormalBasis, QuadratureRule};
use crate::galerkin::TripleProductTensor;

/// A basis together with its p3-exact rule, the basis values at the rule's
/// nodes and the triple-product tensor. Everything the solver needs about
/// the stochastic variable.
#[derive(Debug, Clone)]
pub struct StochasticSpace {
    basis: OrthonormalBasis,
    rule: QuadratureRule,
    table: NodeTable,
    tensor: TripleProductTensor,
}

impl StochasticSpace {
    pub fn new(basis: OrthonormalBasis) -> Self {
        let rule = basis.p3_exact_rule();
        let table = basis.tabulate(&rule);
        let tensor = TripleProductTensor::new(&basis);
        Self {
            basis,
            rule,
            table,
            tensor,
        }
    }

    /// The one-term space of a deterministic problem.
    pub fn deterministic() -> Self {
        Self::new(
            OrthonormalBasis::one_dimensional(crate::basis::BetaParams::UNIFORM, 1)
                .expect("one-term basis is valid"),
        )
    }

    pub fn k(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &OrthonormalBasis {
        &self.basis
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn table(&self) -> &NodeTable {
        &self.table
    }

    pub fn tensor(&self) -> &TripleProductTensor {
        &self.tensor
    }

    pub fn project(&self, f: impl Fn(&[f64]) -> f64) -> crate::PceVector {
        crate::basis::project_tabulated(f, &self.rule, &self.table)
    }
}
