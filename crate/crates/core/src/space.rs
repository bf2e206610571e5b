//! Finite truncations of `ℓp`-sums `(⊕ ℓ_{p_n}(d_n))_p`.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{self, Exponent};

/// One summand `ℓ_exponent(dim)` of a [`BlockSpace`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub exponent: Exponent,
    pub dim: usize,
}

impl Block {
    pub fn new(exponent: Exponent, dim: usize) -> Self {
        Block { exponent, dim }
    }
}

/// An `ℓ_outer`-sum of finitely many finite-dimensional `ℓ_r` blocks.
///
/// Equality of spaces for composition purposes is [`BlockSpace::equivalent`],
/// which compares canonical forms: a single block forgets its outer exponent,
/// one-dimensional blocks adopt the outer exponent, and adjacent blocks whose
/// inner exponent equals the outer one are merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBlockSpace")]
pub struct BlockSpace {
    outer: Exponent,
    blocks: Vec<Block>,
}

#[derive(Deserialize)]
struct RawBlockSpace {
    outer: Exponent,
    blocks: Vec<Block>,
}

impl TryFrom<RawBlockSpace> for BlockSpace {
    type Error = Error;

    fn try_from(raw: RawBlockSpace) -> Result<Self> {
        BlockSpace::new(raw.outer, raw.blocks)
    }
}

impl BlockSpace {
    pub fn new(outer: Exponent, blocks: Vec<Block>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Dimension("block space without blocks".into()));
        }
        if let Some(b) = blocks.iter().find(|b| b.dim == 0) {
            return Err(Error::Dimension(format!("zero-dimensional block ℓ_{}", b.exponent)));
        }
        Ok(BlockSpace { outer, blocks })
    }

    /// Plain `ℓp(d)`.
    pub fn plain(p: Exponent, dim: usize) -> Result<Self> {
        BlockSpace::new(p, vec![Block::new(p, dim)])
    }

    /// `(⊕ ℓ_inner(d))_outer` over the given dims.
    pub fn uniform(outer: Exponent, inner: Exponent, dims: &[usize]) -> Result<Self> {
        BlockSpace::new(outer, dims.iter().map(|&d| Block::new(inner, d)).collect())
    }

    pub fn outer(&self) -> Exponent {
        self.outer
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).sum()
    }

    /// Coordinate range of block `i` (0-based).
    pub fn block_range(&self, i: usize) -> Range<usize> {
        let start: usize = self.blocks[..i].iter().map(|b| b.dim).sum();
        start..start + self.blocks[i].dim
    }

    pub fn block_ranges(&self) -> Vec<Range<usize>> {
        let mut start = 0;
        self.blocks
            .iter()
            .map(|b| {
                let r = start..start + b.dim;
                start += b.dim;
                r
            })
            .collect()
    }

    /// The dual space: every exponent replaced by its conjugate.
    pub fn dual(&self) -> BlockSpace {
        BlockSpace {
            outer: self.outer.dual(),
            blocks: self
                .blocks
                .iter()
                .map(|b| Block::new(b.exponent.dual(), b.dim))
                .collect(),
        }
    }

    /// Endpoint exponents replaced by `1 + eps` / `1/eps`.
    pub fn perturbed(&self, eps: f64) -> BlockSpace {
        BlockSpace {
            outer: self.outer.perturbed(eps),
            blocks: self
                .blocks
                .iter()
                .map(|b| Block::new(b.exponent.perturbed(eps), b.dim))
                .collect(),
        }
    }

    pub fn has_endpoint_exponent(&self) -> bool {
        let c = self.canonical();
        c.outer.is_endpoint() || c.blocks.iter().any(|b| b.exponent.is_endpoint())
    }

    pub fn canonical(&self) -> BlockSpace {
        let outer = self.outer;
        let mut merged: Vec<Block> = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let e = if b.dim == 1 { outer } else { b.exponent };
            match merged.last_mut() {
                Some(last) if last.exponent.approx_eq(outer) && e.approx_eq(outer) => {
                    last.dim += b.dim;
                }
                _ => merged.push(Block::new(e, b.dim)),
            }
        }
        if merged.len() == 1 {
            BlockSpace { outer: merged[0].exponent, blocks: merged }
        } else {
            BlockSpace { outer, blocks: merged }
        }
    }

    /// `Some((p, d))` when the space is isometrically plain `ℓp(d)`.
    pub fn as_plain(&self) -> Option<(Exponent, usize)> {
        let c = self.canonical();
        (c.blocks.len() == 1).then(|| (c.blocks[0].exponent, c.blocks[0].dim))
    }

    pub fn equivalent(&self, other: &BlockSpace) -> bool {
        if self.total_dim() == 1 && other.total_dim() == 1 {
            return true;
        }
        let a = self.canonical();
        let b = other.canonical();
        a.outer.approx_eq(b.outer)
            && a.blocks.len() == b.blocks.len()
            && a
                .blocks
                .iter()
                .zip(&b.blocks)
                .all(|(x, y)| x.dim == y.dim && x.exponent.approx_eq(y.exponent))
    }

    /// Direct sum: concatenation of block lists under a common outer exponent.
    pub fn direct_sum(&self, other: &BlockSpace) -> Result<BlockSpace> {
        // a single block carries no outer structure, so it adopts the other side's
        let outer = if self.outer.approx_eq(other.outer) || other.blocks.len() == 1 {
            self.outer
        } else if self.blocks.len() == 1 {
            other.outer
        } else {
            return Err(Error::Composition(format!(
                "outer exponents {} and {} cannot be summed",
                self.outer, other.outer
            )));
        };
        let mut blocks = self.blocks.clone();
        blocks.extend_from_slice(&other.blocks);
        BlockSpace::new(outer, blocks)
    }

    /// The mixed norm of `x`.
    pub fn norm(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.total_dim() {
            return Err(Error::Dimension(format!(
                "vector of length {} in a space of dimension {}",
                x.len(),
                self.total_dim()
            )));
        }
        Ok(self.norm_unchecked(x))
    }

    pub(crate) fn norm_unchecked(&self, x: &[f64]) -> f64 {
        if self.blocks.len() == 1 {
            return lp::norm(x, self.blocks[0].exponent);
        }
        let inner: Vec<f64> = self
            .block_ranges()
            .into_iter()
            .zip(&self.blocks)
            .map(|(r, b)| lp::norm(&x[r], b.exponent))
            .collect();
        lp::norm(&inner, self.outer)
    }

    /// Norming functional of `x` in the dual space; zero maps to zero.
    ///
    /// Blockwise this is `c_j · J_{p_j}(x_j)` with `c = J_outer(‖x_j‖)`.
    pub(crate) fn duality_map_unchecked(&self, x: &[f64]) -> Vec<f64> {
        if self.blocks.len() == 1 {
            return lp::duality_map_unchecked(x, self.blocks[0].exponent);
        }
        let ranges = self.block_ranges();
        let inner: Vec<f64> = ranges
            .iter()
            .zip(&self.blocks)
            .map(|(r, b)| lp::norm(&x[r.clone()], b.exponent))
            .collect();
        let weights = lp::duality_map_unchecked(&inner, self.outer);
        let mut y = vec![0.0; x.len()];
        for ((r, b), w) in ranges.into_iter().zip(&self.blocks).zip(weights) {
            if w == 0.0 {
                continue;
            }
            let local = lp::duality_map_unchecked(&x[r.clone()], b.exponent);
            for (yi, li) in y[r].iter_mut().zip(local) {
                *yi = w * li;
            }
        }
        y
    }

    pub fn duality_map(&self, x: &[f64]) -> Result<Vec<f64>> {
        if self.norm(x)? == 0.0 {
            return Err(Error::DegenerateInput("duality map of the zero vector".into()));
        }
        Ok(self.duality_map_unchecked(x))
    }

    /// Unit vector `e_j` of the space (0-based).
    pub fn unit_vector(&self, j: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.total_dim()];
        e[j] = 1.0;
        e
    }
}

/// The mixed norm of `x` in `space`; alias of [`BlockSpace::norm`].
pub fn block_norm(x: &[f64], space: &BlockSpace) -> Result<f64> {
    space.norm(x)
}

/// Norm of a block-diagonal operator whose blocks have norms `block_norms`,
/// acting from an `ℓ_from`-sum into an `ℓ_to`-sum.
///
/// For `from ≤ to` this is the maximum block norm; otherwise the
/// `ℓ_r`-norm of the block norms with `1/r = 1/to − 1/from`.
pub fn diagonal_sum_norm(block_norms: &[f64], from: Exponent, to: Exponent) -> f64 {
    let gap = to.reciprocal() - from.reciprocal();
    if gap <= 1e-15 {
        block_norms.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else {
        let r = Exponent::from_reciprocal(gap.min(1.0)).unwrap_or(Exponent::ONE);
        lp::norm(block_norms, r)
    }
}

/// Operator norm of the formal identity `from → ℓ_a(total_dim)`.
pub fn identity_norm_to_plain(from: &BlockSpace, a: Exponent) -> f64 {
    let norms: Vec<f64> = from
        .blocks()
        .iter()
        .map(|b| (b.dim as f64).powf((a.reciprocal() - b.exponent.reciprocal()).max(0.0)))
        .collect();
    if from.block_count() == 1 {
        return norms[0];
    }
    diagonal_sum_norm(&norms, from.outer(), a)
}

/// Operator norm of the formal identity `ℓ_b(total_dim) → to`.
pub fn identity_norm_from_plain(b: Exponent, to: &BlockSpace) -> f64 {
    let norms: Vec<f64> = to
        .blocks()
        .iter()
        .map(|blk| (blk.dim as f64).powf((blk.exponent.reciprocal() - b.reciprocal()).max(0.0)))
        .collect();
    if to.block_count() == 1 {
        return norms[0];
    }
    diagonal_sum_norm(&norms, b, to.outer())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(p: f64) -> Exponent {
        Exponent::new(p).unwrap()
    }

    #[test]
    fn block_norm_examples() {
        let single = BlockSpace::plain(e(3.0), 3).unwrap();
        let x = [1.0, -2.0, 0.5];
        assert_eq!(block_norm(&x, &single).unwrap(), lp::lp_norm(&x, e(3.0)).unwrap());

        let two = BlockSpace::uniform(e(2.0), e(2.0), &[1, 1]).unwrap();
        assert!((block_norm(&[3.0, 4.0], &two).unwrap() - 5.0).abs() < 1e-15);

        let sup = BlockSpace::uniform(Exponent::INFINITY, e(2.0), &[2, 2]).unwrap();
        assert_eq!(block_norm(&[1.0, 0.0, 0.0, 2.0], &sup).unwrap(), 2.0);
    }

    #[test]
    fn length_mismatch() {
        let s = BlockSpace::plain(e(2.0), 3).unwrap();
        assert!(matches!(s.norm(&[1.0]), Err(Error::Dimension(_))));
        assert!(BlockSpace::new(e(2.0), vec![]).is_err());
        assert!(BlockSpace::plain(e(2.0), 0).is_err());
    }

    #[test]
    fn canonical_forms() {
        let a = BlockSpace::uniform(e(1.5), e(1.5), &[2, 4, 8]).unwrap();
        assert_eq!(a.as_plain(), Some((e(1.5), 14)));
        let b = BlockSpace::uniform(e(3.0), e(2.0), &[1]).unwrap();
        assert!(b.equivalent(&BlockSpace::plain(e(2.0), 1).unwrap()));
        let c = BlockSpace::uniform(e(2.0), e(5.0), &[1, 1]).unwrap();
        assert_eq!(c.as_plain(), Some((e(2.0), 2)));
        let d = BlockSpace::uniform(e(3.0), e(2.0), &[1, 2, 3]).unwrap();
        assert_eq!(d.as_plain(), None);
        assert!(!d.equivalent(&BlockSpace::plain(e(3.0), 6).unwrap()));
    }

    #[test]
    fn duality_map_is_norming() {
        let s = BlockSpace::new(
            e(1.5),
            vec![Block::new(e(3.0), 2), Block::new(Exponent::ONE, 3), Block::new(Exponent::INFINITY, 2)],
        )
        .unwrap();
        let x = [0.3, -1.2, 0.0, 2.0, -0.5, 0.7, 0.1];
        let y = s.duality_map(&x).unwrap();
        assert!((lp::dot(&y, &x) - s.norm(&x).unwrap()).abs() < 1e-12);
        assert!((s.dual().norm(&y).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_norms() {
        // ℓ_2(4) → ℓ_1(4) has norm 2
        let l2 = BlockSpace::plain(e(2.0), 4).unwrap();
        assert!((identity_norm_to_plain(&l2, Exponent::ONE) - 2.0).abs() < 1e-14);
        assert!((identity_norm_from_plain(Exponent::ONE, &l2) - 1.0).abs() < 1e-14);
        // (ℓ2(2) ⊕ ℓ2(2))_∞ → ℓ2(4): blocks of norm 1, ℓ_2 of (1,1) = √2
        let s = BlockSpace::uniform(Exponent::INFINITY, e(2.0), &[2, 2]).unwrap();
        assert!((identity_norm_to_plain(&s, e(2.0)) - 2f64.sqrt()).abs() < 1e-14);
    }
}
