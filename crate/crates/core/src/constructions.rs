//! Concrete operators at finite truncation: Sylvester–Hadamard blocks, formal
//! identities, `T(p,q)` on `ℓ₂(n)`-block sums, and the Rademacher operators
//! `S` and `T`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::khintchine::KhintchineSystem;
use crate::lp::Exponent;
use crate::matrix::Matrix;
use crate::operator::BlockOperator;
use crate::space::BlockSpace;

pub const DEFAULT_DIM_CAP: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockDimRule {
    /// `d_n = n`
    Linear,
    /// `d_n = 2ⁿ`
    Hadamard,
    /// `d_n = 2ⁿ` on one side, `n` on the other
    Khintchine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationPlan {
    pub n_max: usize,
    pub rule: BlockDimRule,
    pub cap: usize,
}

impl TruncationPlan {
    pub fn new(n_max: usize, rule: BlockDimRule) -> Result<Self> {
        TruncationPlan { n_max, rule, cap: DEFAULT_DIM_CAP }.validated()
    }

    pub fn with_cap(n_max: usize, rule: BlockDimRule, cap: usize) -> Result<Self> {
        TruncationPlan { n_max, rule, cap }.validated()
    }

    fn validated(self) -> Result<Self> {
        if self.n_max < 1 {
            return Err(Error::Config("n_max must be at least 1".into()));
        }
        if self.n_max >= 40 || self.total_dim() > self.cap {
            return Err(Error::Capacity(format!(
                "n_max = {} exceeds the dimension cap {}",
                self.n_max, self.cap
            )));
        }
        Ok(self)
    }

    /// Block dimensions `d_1, …, d_{n_max}` (the larger side for Khintchine plans).
    pub fn block_dims(&self) -> Vec<usize> {
        (1..=self.n_max)
            .map(|n| match self.rule {
                BlockDimRule::Linear => n,
                BlockDimRule::Hadamard | BlockDimRule::Khintchine => 1usize << n,
            })
            .collect()
    }

    pub fn head_dims(&self) -> Vec<usize> {
        (1..=self.n_max).collect()
    }

    pub fn total_dim(&self) -> usize {
        match self.rule {
            BlockDimRule::Linear => self.n_max * (self.n_max + 1) / 2,
            _ => (1usize << (self.n_max + 1)) - 2,
        }
    }

    fn require(&self, rule: BlockDimRule) -> Result<()> {
        if self.rule != rule {
            return Err(Error::Config(format!("plan has rule {:?}, expected {rule:?}", self.rule)));
        }
        Ok(())
    }
}

/// Sylvester sign matrix `H_n` with entries `±1`, built by the recursion
/// `H_{n+1} = [[H_n, H_n], [H_n, −H_n]]`.
pub fn sylvester_signs(n: u32, cap: usize) -> Result<Vec<Vec<i8>>> {
    if n >= 31 || (1usize << n) > cap {
        return Err(Error::Capacity(format!("2^{n} exceeds the dimension cap {cap}")));
    }
    let mut h: Vec<Vec<i8>> = vec![vec![1]];
    for _ in 0..n {
        let mut next = Vec::with_capacity(2 * h.len());
        for row in &h {
            let mut r = row.clone();
            r.extend_from_slice(row);
            next.push(r);
        }
        for row in &h {
            let mut r = row.clone();
            r.extend(row.iter().map(|v| -v));
            next.push(r);
        }
        h = next;
    }
    Ok(h)
}

/// Exact check of `H Hᵀ = N·I` for a `±1` matrix, by packed-bit popcounts:
/// `⟨h_i, h_k⟩ = N − 2·|{j : h_ij ≠ h_kj}|`.
pub fn is_scaled_orthogonal(h: &[Vec<i8>]) -> bool {
    let n = h.len();
    if h.iter().any(|r| r.len() != n || r.iter().any(|v| *v != 1 && *v != -1)) {
        return false;
    }
    let words = n.div_ceil(64);
    let packed: Vec<Vec<u64>> = h
        .iter()
        .map(|r| {
            let mut w = vec![0u64; words];
            for (j, v) in r.iter().enumerate() {
                if *v < 0 {
                    w[j / 64] |= 1 << (j % 64);
                }
            }
            w
        })
        .collect();
    for i in 0..n {
        for k in i + 1..n {
            let diff: u32 = packed[i].iter().zip(&packed[k]).map(|(a, b)| (a ^ b).count_ones()).sum();
            if 2 * diff as usize != n {
                return false;
            }
        }
    }
    true
}

pub fn hadamard(n: u32) -> Result<Matrix> {
    let h = sylvester_signs(n, DEFAULT_DIM_CAP)?;
    Ok(Matrix::from_fn(h.len(), h.len(), |i, j| h[i][j] as f64))
}

fn check_hadamard_exponents(p: Exponent, q: Exponent) -> Result<()> {
    let (a, b) = (p.reciprocal(), q.reciprocal());
    if !(a < 1.0 && a > 0.5 && b < 0.5 && b > 0.0) {
        return Err(Error::Domain(format!("need 1 < p < 2 < q < ∞, got p = {p}, q = {q}")));
    }
    Ok(())
}

/// `2^{−n/min(p′,q)}`
pub fn hadamard_scale(n: u32, p: Exponent, q: Exponent) -> f64 {
    let inv = p.dual().reciprocal().max(q.reciprocal());
    2f64.powf(-(n as f64) * inv)
}

/// `U_n = 2^{−n/min(p′,q)} H_n : ℓp(2ⁿ) → ℓq(2ⁿ)`.
pub fn scaled_hadamard_block(n: u32, p: Exponent, q: Exponent) -> Result<BlockOperator> {
    check_hadamard_exponents(p, q)?;
    let h = hadamard(n)?;
    BlockOperator::plain(h.scaled(hadamard_scale(n, p, q)), p, q)
}

/// `U = ⊕_{n ≤ n_max} U_n : (⊕ ℓp(2ⁿ))_p → (⊕ ℓq(2ⁿ))_q`.
pub fn build_u(p: Exponent, q: Exponent, plan: &TruncationPlan) -> Result<BlockOperator> {
    plan.require(BlockDimRule::Hadamard)?;
    check_hadamard_exponents(p, q)?;
    let blocks: Vec<Matrix> = (1..=plan.n_max as u32)
        .map(|n| Ok(scaled_hadamard_block(n, p, q)?.matrix().clone()))
        .collect::<Result<_>>()?;
    let dims = plan.block_dims();
    BlockOperator::new(
        Matrix::block_diagonal(&blocks)?,
        BlockSpace::uniform(p, p, &dims)?,
        BlockSpace::uniform(q, q, &dims)?,
    )
}

/// The formal identity `ℓp(m) → ℓq(m)`, `p ≤ q`.
pub fn formal_identity_section(p: Exponent, q: Exponent, m: usize) -> Result<BlockOperator> {
    if p.reciprocal() < q.reciprocal() - 1e-12 {
        return Err(Error::Domain(format!("formal identity needs p ≤ q, got {p} > {q}")));
    }
    BlockOperator::plain(Matrix::identity(m), p, q)
}

/// `I′(p,q) : (⊕ ℓ₂(n))_p → (⊕ ℓ₂(n))_q`, the identity between `ℓ₂(n)`-block
/// sums; this block-space representation stands in for `T(p,q)`.
pub fn build_tpq(p: Exponent, q: Exponent, plan: &TruncationPlan) -> Result<BlockOperator> {
    plan.require(BlockDimRule::Linear)?;
    let dims = plan.block_dims();
    let domain = BlockSpace::uniform(p, Exponent::TWO, &dims)?;
    let codomain = BlockSpace::uniform(q, Exponent::TWO, &dims)?;
    BlockOperator::new(Matrix::identity(domain.total_dim()), domain, codomain)
}

fn check_systems(systems: &[KhintchineSystem], plan: &TruncationPlan, exponent: Exponent) -> Result<()> {
    if systems.len() != plan.n_max {
        return Err(Error::Config(format!("{} systems for n_max = {}", systems.len(), plan.n_max)));
    }
    for (i, s) in systems.iter().enumerate() {
        if s.n() != i + 1 || !s.p().approx_eq(exponent) {
            return Err(Error::Config(format!(
                "system {} is ({}, {}), expected ({}, {exponent})",
                i,
                s.n(),
                s.p(),
                i + 1
            )));
        }
    }
    Ok(())
}

/// `S : (⊕ ℓp(2ⁿ))_p → (⊕ ℓq(n))_q`, block `n` being `x ↦ (⟨x*_{(n,i)}, x⟩)_i`.
pub fn build_s(p: Exponent, q: Exponent, plan: &TruncationPlan, systems: &[KhintchineSystem]) -> Result<BlockOperator> {
    plan.require(BlockDimRule::Khintchine)?;
    check_systems(systems, plan, p)?;
    let blocks: Vec<Matrix> = systems.iter().map(|s| s.duals().clone()).collect();
    BlockOperator::new(
        Matrix::block_diagonal(&blocks)?,
        BlockSpace::uniform(p, p, &plan.block_dims())?,
        BlockSpace::uniform(q, q, &plan.head_dims())?,
    )
}

/// `T : (⊕ ℓp(n))_p → (⊕ ℓq(2ⁿ))_q`, block `n` sending `e_i` to `y_{(n,i)}`.
pub fn build_t(p: Exponent, q: Exponent, plan: &TruncationPlan, systems: &[KhintchineSystem]) -> Result<BlockOperator> {
    plan.require(BlockDimRule::Khintchine)?;
    check_systems(systems, plan, q)?;
    let blocks: Vec<Matrix> = systems.iter().map(|s| s.vectors().transpose()).collect();
    BlockOperator::new(
        Matrix::block_diagonal(&blocks)?,
        BlockSpace::uniform(p, p, &plan.head_dims())?,
        BlockSpace::uniform(q, q, &plan.block_dims())?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opnorm::{opnorm_bracket, PowerIterConfig};

    fn e(p: f64) -> Exponent {
        Exponent::new(p).unwrap()
    }

    #[test]
    fn small_hadamards() {
        assert_eq!(hadamard(0).unwrap().data(), &[1.0]);
        assert_eq!(hadamard(1).unwrap().data(), &[1.0, 1.0, 1.0, -1.0]);
        let h3 = hadamard(3).unwrap();
        let g = h3.matmul(&h3.transpose()).unwrap();
        assert_eq!(g, Matrix::identity(8).scaled(8.0));
        assert!(matches!(hadamard(14), Err(Error::Capacity(_))));
    }

    #[test]
    fn orthogonality_check_rejects_non_hadamard() {
        let mut h = sylvester_signs(3, 64).unwrap();
        assert!(is_scaled_orthogonal(&h));
        h[2][5] = -h[2][5];
        assert!(!is_scaled_orthogonal(&h));
    }

    #[test]
    fn hadamard_scales() {
        assert!((hadamard_scale(3, e(4.0 / 3.0), e(3.0)) - 0.5).abs() < 1e-15);
        assert_eq!(hadamard_scale(0, e(1.5), e(4.0)), 1.0);
        assert!(scaled_hadamard_block(2, e(2.0), e(3.0)).is_err());
        assert!(scaled_hadamard_block(2, e(1.5), Exponent::INFINITY).is_err());
    }

    #[test]
    fn scaled_block_has_norm_at_most_one() {
        let b = opnorm_bracket(&scaled_hadamard_block(2, e(1.5), e(4.0)).unwrap(), &PowerIterConfig::default()).unwrap();
        assert!(b.upper <= 1.0 + 1e-9, "{b:?}");
    }

    #[test]
    fn u_shape_and_norm() {
        let plan = TruncationPlan::new(3, BlockDimRule::Hadamard).unwrap();
        let u = build_u(e(1.5), e(3.0), &plan).unwrap();
        assert_eq!(u.matrix().shape(), (14, 14));
        assert!(u.is_block_diagonal());
        let one = build_u(e(1.5), e(3.0), &TruncationPlan::new(1, BlockDimRule::Hadamard).unwrap()).unwrap();
        assert_eq!(one.matrix(), scaled_hadamard_block(1, e(1.5), e(3.0)).unwrap().matrix());
        let plan = TruncationPlan::new(4, BlockDimRule::Hadamard).unwrap();
        let b = opnorm_bracket(&build_u(e(1.5), e(4.0), &plan).unwrap(), &PowerIterConfig::default()).unwrap();
        assert!(b.upper <= 1.0 + 1e-9, "{b:?}");
    }

    #[test]
    fn formal_identity() {
        let i = formal_identity_section(e(1.5), e(3.0), 5).unwrap();
        let b = opnorm_bracket(&i, &PowerIterConfig::default()).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-12 && (b.upper - 1.0).abs() < 1e-9);
        let ones = vec![1.0; 5];
        let r = crate::opnorm::ratio(&i, &ones);
        assert!((r - 5f64.powf(1.0 / 3.0 - 1.0 / 1.5)).abs() < 1e-12);
        assert!(formal_identity_section(e(3.0), e(1.5), 2).is_err());
    }

    #[test]
    fn tpq_shape() {
        let plan = TruncationPlan::new(3, BlockDimRule::Linear).unwrap();
        let t = build_tpq(e(1.5), e(3.0), &plan).unwrap();
        assert_eq!(t.matrix(), &Matrix::identity(6));
        let x = t.domain().unit_vector(3);
        assert_eq!(t.codomain().norm(&t.apply(&x).unwrap()).unwrap(), 1.0);
        assert!(build_tpq(e(1.5), e(3.0), &TruncationPlan::new(3, BlockDimRule::Hadamard).unwrap()).is_err());
    }

    #[test]
    fn plan_caps() {
        assert!(matches!(TruncationPlan::new(13, BlockDimRule::Hadamard), Err(Error::Capacity(_))));
        assert!(TruncationPlan::new(0, BlockDimRule::Linear).is_err());
        assert_eq!(TruncationPlan::new(8, BlockDimRule::Khintchine).unwrap().total_dim(), 510);
    }
}
