//! Matrices tagged with domain and codomain block spaces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::Exponent;
use crate::matrix::Matrix;
use crate::space::BlockSpace;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    matrix: Matrix,
    domain: BlockSpace,
    codomain: BlockSpace,
}

impl BlockOperator {
    pub fn new(matrix: Matrix, domain: BlockSpace, codomain: BlockSpace) -> Result<Self> {
        if matrix.cols() != domain.total_dim() || matrix.rows() != codomain.total_dim() {
            return Err(Error::Dimension(format!(
                "{}x{} matrix between spaces of dimension {} and {}",
                matrix.rows(),
                matrix.cols(),
                domain.total_dim(),
                codomain.total_dim()
            )));
        }
        Ok(BlockOperator { matrix, domain, codomain })
    }

    /// `matrix` as an operator `ℓp(cols) → ℓq(rows)`.
    pub fn plain(matrix: Matrix, p: Exponent, q: Exponent) -> Result<Self> {
        let domain = BlockSpace::plain(p, matrix.cols())?;
        let codomain = BlockSpace::plain(q, matrix.rows())?;
        BlockOperator::new(matrix, domain, codomain)
    }

    pub fn identity(space: &BlockSpace) -> Self {
        let n = space.total_dim();
        BlockOperator { matrix: Matrix::identity(n), domain: space.clone(), codomain: space.clone() }
    }

    pub fn zero(domain: BlockSpace, codomain: BlockSpace) -> Self {
        let matrix = Matrix::zeros(codomain.total_dim(), domain.total_dim());
        BlockOperator { matrix, domain, codomain }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn domain(&self) -> &BlockSpace {
        &self.domain
    }

    pub fn codomain(&self) -> &BlockSpace {
        &self.codomain
    }

    pub fn with_spaces(&self, domain: BlockSpace, codomain: BlockSpace) -> Result<Self> {
        BlockOperator::new(self.matrix.clone(), domain, codomain)
    }

    pub fn scaled(&self, s: f64) -> Self {
        BlockOperator {
            matrix: self.matrix.scaled(s),
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
        }
    }

    /// `self + other`; the spaces must agree.
    pub fn add(&self, other: &BlockOperator) -> Result<Self> {
        if !self.domain.equivalent(&other.domain) || !self.codomain.equivalent(&other.codomain) {
            return Err(Error::Composition("sum of operators between different spaces".into()));
        }
        BlockOperator::new(self.matrix.add(&other.matrix)?, self.domain.clone(), self.codomain.clone())
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.matrix.cols() {
            return Err(Error::Dimension(format!(
                "operator on dimension {} applied to a vector of length {}",
                self.matrix.cols(),
                x.len()
            )));
        }
        Ok(self.matrix.mul_vec(x))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &BlockOperator) -> Result<Self> {
        if !inner.codomain.equivalent(&self.domain) {
            return Err(Error::Composition(format!(
                "codomain {:?} does not match domain {:?}",
                inner.codomain, self.domain
            )));
        }
        BlockOperator::new(
            self.matrix.matmul(&inner.matrix)?,
            inner.domain.clone(),
            self.codomain.clone(),
        )
    }

    pub fn direct_sum(&self, other: &BlockOperator) -> Result<Self> {
        BlockOperator::new(
            Matrix::block_diagonal(&[self.matrix.clone(), other.matrix.clone()])?,
            self.domain.direct_sum(&other.domain)?,
            self.codomain.direct_sum(&other.codomain)?,
        )
    }

    /// Transpose between the dual spaces.
    pub fn adjoint(&self) -> Self {
        BlockOperator {
            matrix: self.matrix.transpose(),
            domain: self.codomain.dual(),
            codomain: self.domain.dual(),
        }
    }

    /// Restriction `F_j ∘ T ∘ E_i` from domain block `i` to codomain block `j`,
    /// as an operator between plain spaces.
    pub fn block(&self, codomain_block: usize, domain_block: usize) -> Result<Self> {
        if domain_block >= self.domain.block_count() || codomain_block >= self.codomain.block_count() {
            return Err(Error::Dimension("block index out of range".into()));
        }
        let rr = self.codomain.block_range(codomain_block);
        let cr = self.domain.block_range(domain_block);
        let p = self.domain.blocks()[domain_block].exponent;
        let q = self.codomain.blocks()[codomain_block].exponent;
        BlockOperator::plain(self.matrix.submatrix(rr, cr), p, q)
    }

    /// True when both spaces have the same number of blocks (at least two)
    /// and every off-diagonal block vanishes.
    pub fn is_block_diagonal(&self) -> bool {
        let nb = self.domain.block_count();
        if nb < 2 || nb != self.codomain.block_count() {
            return false;
        }
        let rows = self.codomain.block_ranges();
        let cols = self.domain.block_ranges();
        for (bi, rr) in rows.iter().enumerate() {
            for (bj, cr) in cols.iter().enumerate() {
                if bi == bj {
                    continue;
                }
                for i in rr.clone() {
                    if self.matrix.row(i)[cr.clone()].iter().any(|v| *v != 0.0) {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn to_doc(&self) -> OperatorDoc {
        OperatorDoc {
            rows: self.matrix.rows(),
            cols: self.matrix.cols(),
            data: self.matrix.data().to_vec(),
            domain: Some(self.domain.clone()),
            codomain: Some(self.codomain.clone()),
        }
    }
}

/// Serialized operator: `{rows, cols, data (row-major), domain, codomain}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorDoc {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<BlockSpace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codomain: Option<BlockSpace>,
}

impl OperatorDoc {
    /// Builds the operator; missing spaces fall back to plain `ℓp` / `ℓq`.
    pub fn into_operator(self, p: Option<Exponent>, q: Option<Exponent>) -> Result<BlockOperator> {
        let matrix = Matrix::new(self.rows, self.cols, self.data)?;
        let domain = match (self.domain, p) {
            (_, Some(p)) => BlockSpace::plain(p, matrix.cols())?,
            (Some(d), None) => d,
            (None, None) => return Err(Error::Config("operator domain not given".into())),
        };
        let codomain = match (self.codomain, q) {
            (_, Some(q)) => BlockSpace::plain(q, matrix.rows())?,
            (Some(c), None) => c,
            (None, None) => return Err(Error::Config("operator codomain not given".into())),
        };
        BlockOperator::new(matrix, domain, codomain)
    }
}

impl From<&BlockOperator> for OperatorDoc {
    fn from(op: &BlockOperator) -> Self {
        op.to_doc()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(p: f64) -> Exponent {
        Exponent::new(p).unwrap()
    }

    fn sample() -> BlockOperator {
        let m = Matrix::from_rows(&[vec![1.0, 2.0, 0.0], vec![0.0, -1.0, 3.0]]).unwrap();
        BlockOperator::plain(m, e(1.5), e(3.0)).unwrap()
    }

    #[test]
    fn compose_with_identity() {
        let t = sample();
        let id = BlockOperator::identity(t.domain());
        assert_eq!(t.compose(&id).unwrap(), t);
    }

    #[test]
    fn compose_space_mismatch() {
        let t = sample();
        let other = BlockOperator::identity(&BlockSpace::plain(e(2.0), 3).unwrap());
        assert!(matches!(t.compose(&other), Err(Error::Composition(_))));
    }

    #[test]
    fn adjoint_involution() {
        let t = sample();
        assert_eq!(t.adjoint().adjoint(), t);
        assert!(t.adjoint().domain().equivalent(&BlockSpace::plain(e(1.5), 2).unwrap()));
    }

    #[test]
    fn direct_sum_of_scalars() {
        let a = BlockOperator::plain(Matrix::new(1, 1, vec![2.0]).unwrap(), e(2.0), e(2.0)).unwrap();
        let b = BlockOperator::plain(Matrix::new(1, 1, vec![-5.0]).unwrap(), e(2.0), e(2.0)).unwrap();
        let s = a.direct_sum(&b).unwrap();
        assert_eq!(s.matrix().data(), &[2.0, 0.0, 0.0, -5.0]);
        assert_eq!(s.domain().block_count(), 2);
        assert!(s.is_block_diagonal());
    }

    #[test]
    fn apply_checks_length() {
        assert!(matches!(sample().apply(&[1.0]), Err(Error::Dimension(_))));
        assert_eq!(sample().apply(&[1.0, 1.0, 1.0]).unwrap(), vec![3.0, 2.0]);
    }

    #[test]
    fn doc_round_trip() {
        let t = sample();
        let s = serde_json::to_string(&t.to_doc()).unwrap();
        let doc: OperatorDoc = serde_json::from_str(&s).unwrap();
        assert_eq!(doc.into_operator(None, None).unwrap(), t);
    }
}
