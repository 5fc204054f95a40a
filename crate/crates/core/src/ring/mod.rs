//! Finite unital rings presented as ordered products of blocks `M_k(Z/p^e)`.
//!
//! Elements are tuples of block matrices. Ideals that are direct factors are
//! described by [`BlockSet`]s; their unity is the central idempotent
//! [`ProductRing::idempotent`]. Units of such an ideal are represented as ring
//! elements vanishing outside the ideal.

mod embedding;
mod matrix;

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use embedding::{inner_conjugator, BlockEmbedding};
pub use matrix::{inv_mod, is_prime, BlockMatrix, BlockType};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("ring mismatch: {0}")]
    RingMismatch(String),
    #[error("block {0} entry is not a unit")]
    NotAUnit(usize),
    #[error("element does not vanish outside the support (block {0})")]
    OutsideSupport(usize),
    #[error("block iso between blocks of different shape ({0} -> {1})")]
    ShapeMismatch(usize, usize),
}

/// A finite ring `R_0 x ... x R_{m-1}` with every `R_i = M_k(Z/p^e)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProductRing {
    blocks: Vec<BlockType>,
}

impl ProductRing {
    /// An empty list is allowed only for the zero ring produced by restrictions.
    pub fn new(blocks: Vec<BlockType>) -> Self {
        ProductRing { blocks }
    }

    pub fn blocks(&self) -> &[BlockType] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, i: usize) -> BlockType {
        self.blocks[i]
    }

    pub fn all_blocks(&self) -> BlockSet {
        BlockSet::full(self.blocks.len())
    }

    pub fn zero(&self) -> RingElement {
        RingElement {
            blocks: self.blocks.iter().map(|&b| BlockMatrix::zero(b)).collect(),
        }
    }

    pub fn one(&self) -> RingElement {
        self.idempotent(&self.all_blocks())
    }

    /// Central idempotent `1_S`: identity on the members of `s`, zero elsewhere.
    pub fn idempotent(&self, s: &BlockSet) -> RingElement {
        RingElement {
            blocks: self
                .blocks
                .iter()
                .enumerate()
                .map(|(i, &b)| {
                    if s.contains(i) {
                        BlockMatrix::identity(b)
                    } else {
                        BlockMatrix::zero(b)
                    }
                })
                .collect(),
        }
    }

    /// Places `m` at block `i`, zero elsewhere.
    pub fn embed_block(&self, i: usize, m: BlockMatrix) -> RingElement {
        let mut x = self.zero();
        x.blocks[i] = m;
        x
    }

    pub fn from_blocks(&self, blocks: Vec<BlockMatrix>) -> Result<RingElement, RingError> {
        let x = RingElement { blocks };
        self.check(&x)?;
        Ok(x)
    }

    pub fn scalar(&self, c: u64) -> RingElement {
        RingElement {
            blocks: self.blocks.iter().map(|&b| BlockMatrix::scalar(b, c)).collect(),
        }
    }

    pub fn check(&self, x: &RingElement) -> Result<(), RingError> {
        if x.blocks.len() != self.blocks.len() {
            return Err(RingError::RingMismatch(format!(
                "{} blocks, expected {}",
                x.blocks.len(),
                self.blocks.len()
            )));
        }
        for (i, (m, b)) in x.blocks.iter().zip(&self.blocks).enumerate() {
            if m.shape() != *b {
                return Err(RingError::RingMismatch(format!("block {i} has shape {:?}, expected {b:?}", m.shape())));
            }
        }
        Ok(())
    }

    pub fn try_add(&self, x: &RingElement, y: &RingElement) -> Result<RingElement, RingError> {
        self.check(x)?;
        self.check(y)?;
        Ok(x + y)
    }

    pub fn try_mul(&self, x: &RingElement, y: &RingElement) -> Result<RingElement, RingError> {
        self.check(x)?;
        self.check(y)?;
        Ok(x * y)
    }

    pub fn try_neg(&self, x: &RingElement) -> Result<RingElement, RingError> {
        self.check(x)?;
        Ok(-x)
    }

    /// Additive generators of the ideal `1_S A`: matrix units at each member
    /// block, together with their `p`-power multiples.
    pub fn spanning_set(&self, s: &BlockSet) -> Vec<RingElement> {
        let mut out = Vec::new();
        for i in s.iter() {
            let b = self.blocks[i];
            for r in 0..b.k {
                for c in 0..b.k {
                    let mut pw = 1u64;
                    for _ in 0..b.e {
                        out.push(self.embed_block(i, BlockMatrix::unit(b, r, c, pw)));
                        pw *= b.p;
                    }
                }
            }
        }
        out
    }

    /// Number of elements of `1_S A`, if representable.
    pub fn ideal_cardinality(&self, s: &BlockSet) -> Option<u128> {
        s.iter()
            .try_fold(1u128, |acc, i| acc.checked_mul(self.blocks[i].cardinality()?))
    }

    pub fn log_cardinality(&self) -> f64 {
        self.blocks.iter().map(|b| b.log_cardinality()).sum()
    }

    /// All elements of `1_S A` (product order over blocks). Caller bounds the size.
    pub fn enumerate_ideal(&self, s: &BlockSet) -> Vec<RingElement> {
        let mut acc = vec![self.zero()];
        for i in s.iter() {
            let mats: Vec<_> = BlockMatrix::enumerate(self.blocks[i]).collect();
            let mut next = Vec::with_capacity(acc.len() * mats.len());
            for x in &acc {
                for m in &mats {
                    let mut y = x.clone();
                    y.blocks[i] = m.clone();
                    next.push(y);
                }
            }
            acc = next;
        }
        acc
    }

    /// Uniformly random element of `1_S A`.
    pub fn random_element<R: Rng + ?Sized>(&self, s: &BlockSet, rng: &mut R) -> RingElement {
        let mut x = self.zero();
        for i in s.iter() {
            let b = self.blocks[i];
            let m = b.modulus();
            let entries: Vec<i64> = (0..b.k * b.k).map(|_| rng.gen_range(0..m) as i64).collect();
            x.blocks[i] = BlockMatrix::from_entries(b, &entries).expect("shape");
        }
        x
    }

    /// Every element of `1_S A` when there are at most `bound` of them;
    /// otherwise the additive spanning set, its pairwise products, and
    /// `random` uniformly random elements.
    pub fn sample_ideal<R: Rng + ?Sized>(&self, s: &BlockSet, bound: u128, random: usize, rng: &mut R) -> Vec<RingElement> {
        if self.ideal_cardinality(s).is_some_and(|c| c <= bound) {
            return self.enumerate_ideal(s);
        }
        let span = self.spanning_set(s);
        let mut out = vec![self.zero(), self.idempotent(s)];
        for a in &span {
            for b in &span {
                out.push(a * b);
            }
        }
        out.extend(span);
        out.extend((0..random).map(|_| self.random_element(s, rng)));
        out
    }

    /// The sub-product on the listed blocks, in the given order.
    pub fn sub_ring(&self, blocks: &[usize]) -> ProductRing {
        ProductRing::new(blocks.iter().map(|&i| self.blocks[i]).collect())
    }

    /// Concatenation `self x other`.
    pub fn product(&self, other: &ProductRing) -> ProductRing {
        let mut blocks = self.blocks.clone();
        blocks.extend_from_slice(&other.blocks);
        ProductRing::new(blocks)
    }
}

/// A set of block indices, naming the ideal `1_S A`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct BlockSet(BTreeSet<usize>);

impl fmt::Debug for BlockSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

impl BlockSet {
    pub fn empty() -> Self {
        BlockSet(BTreeSet::new())
    }

    pub fn full(m: usize) -> Self {
        BlockSet((0..m).collect())
    }

    pub fn singleton(i: usize) -> Self {
        BlockSet([i].into_iter().collect())
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(&i)
    }

    pub fn insert(&mut self, i: usize) {
        self.0.insert(i);
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn intersection(&self, other: &BlockSet) -> BlockSet {
        BlockSet(self.0.intersection(&other.0).copied().collect())
    }

    pub fn union(&self, other: &BlockSet) -> BlockSet {
        BlockSet(self.0.union(&other.0).copied().collect())
    }

    pub fn difference(&self, other: &BlockSet) -> BlockSet {
        BlockSet(self.0.difference(&other.0).copied().collect())
    }

    pub fn is_subset(&self, other: &BlockSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.iter().next_back().copied()
    }
}

impl FromIterator<usize> for BlockSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        BlockSet(iter.into_iter().collect())
    }
}

/// An element of a [`ProductRing`]: one matrix per block.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingElement {
    blocks: Vec<BlockMatrix>,
}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{b:?}")?;
        }
        write!(f, ")")
    }
}

impl RingElement {
    pub fn blocks(&self) -> &[BlockMatrix] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &BlockMatrix {
        &self.blocks[i]
    }

    pub fn set_block(&mut self, i: usize, m: BlockMatrix) {
        assert_eq!(self.blocks[i].shape(), m.shape(), "block shape mismatch");
        self.blocks[i] = m;
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(|b| b.is_zero())
    }

    /// Blocks with a nonzero entry.
    pub fn support(&self) -> BlockSet {
        self.blocks
            .iter()
            .enumerate()
            .filter(|(_, b)| !b.is_zero())
            .map(|(i, _)| i)
            .collect()
    }

    /// Projection onto block `g`: the entry at `g`, zero elsewhere.
    pub fn pr(&self, g: usize) -> RingElement {
        RingElement {
            blocks: self
                .blocks
                .iter()
                .enumerate()
                .map(|(i, b)| if i == g { b.clone() } else { BlockMatrix::zero(b.shape()) })
                .collect(),
        }
    }

    /// `x * 1_S`.
    pub fn restrict_to(&self, s: &BlockSet) -> RingElement {
        RingElement {
            blocks: self
                .blocks
                .iter()
                .enumerate()
                .map(|(i, b)| if s.contains(i) { b.clone() } else { BlockMatrix::zero(b.shape()) })
                .collect(),
        }
    }

    pub fn vanishes_outside(&self, s: &BlockSet) -> bool {
        self.blocks.iter().enumerate().all(|(i, b)| s.contains(i) || b.is_zero())
    }

    /// Inverse inside the ideal `1_S A`: `y` with `xy = yx = 1_S`.
    pub fn try_invert(&self, support: &BlockSet) -> Result<RingElement, RingError> {
        let mut out = self.clone();
        for (i, b) in self.blocks.iter().enumerate() {
            if support.contains(i) {
                out.blocks[i] = b.inverse().ok_or(RingError::NotAUnit(i))?;
            } else if !b.is_zero() {
                return Err(RingError::OutsideSupport(i));
            }
        }
        Ok(out)
    }

    /// Inverse as a unit of the whole ring.
    pub fn inverse(&self) -> Result<RingElement, RingError> {
        self.try_invert(&BlockSet::full(self.blocks.len()))
    }

    /// Canonical extension of a partial element supported on `s`:
    /// `x + 1 - 1_S`, i.e. identity on every block outside `s`.
    pub fn extend(&self, s: &BlockSet) -> RingElement {
        RingElement {
            blocks: self
                .blocks
                .iter()
                .enumerate()
                .map(|(i, b)| if s.contains(i) { b.clone() } else { BlockMatrix::identity(b.shape()) })
                .collect(),
        }
    }

    pub fn is_central_idempotent_of(&self, s: &BlockSet) -> bool {
        self.blocks.iter().enumerate().all(|(i, b)| {
            if s.contains(i) {
                b.is_identity()
            } else {
                b.is_zero()
            }
        })
    }

    /// Block-wise integer multiple.
    pub fn scale(&self, c: u64) -> RingElement {
        RingElement {
            blocks: self.blocks.iter().map(|b| b.scale(c)).collect(),
        }
    }

    fn zip_with(&self, other: &RingElement, f: impl Fn(&BlockMatrix, &BlockMatrix) -> BlockMatrix) -> RingElement {
        assert_eq!(self.blocks.len(), other.blocks.len(), "ring element block count mismatch");
        RingElement {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| {
                assert_eq!(a.shape(), b.shape(), "block shape mismatch");
                f(a, b)
            }).collect(),
        }
    }
}

impl Add for &RingElement {
    type Output = RingElement;
    fn add(self, rhs: &RingElement) -> RingElement {
        self.zip_with(rhs, |a, b| a.add(b))
    }
}

impl Sub for &RingElement {
    type Output = RingElement;
    fn sub(self, rhs: &RingElement) -> RingElement {
        self.zip_with(rhs, |a, b| a.sub(b))
    }
}

impl Mul for &RingElement {
    type Output = RingElement;
    fn mul(self, rhs: &RingElement) -> RingElement {
        self.zip_with(rhs, |a, b| a.mul(b))
    }
}

impl Neg for &RingElement {
    type Output = RingElement;
    fn neg(self) -> RingElement {
        RingElement {
            blocks: self.blocks.iter().map(|b| b.neg()).collect(),
        }
    }
}

/// Isomorphism between two blocks of equal shape: `a -> u a u^-1`.
///
/// Every ring isomorphism between full matrix rings over `Z/p^e` is inner up to
/// the entrywise identification, so this representation is complete for the
/// supported block repertoire. For `k = 1` the conjugator is stored as `1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockIso {
    pub source: usize,
    pub target: usize,
    conjugator: BlockMatrix,
    conjugator_inv: BlockMatrix,
}

impl BlockIso {
    pub fn new(ring: &ProductRing, source: usize, target: usize, conjugator: BlockMatrix) -> Result<Self, RingError> {
        let (s, t) = (ring.block(source), ring.block(target));
        if s != t || conjugator.shape() != t {
            return Err(RingError::ShapeMismatch(source, target));
        }
        let conjugator = if t.k == 1 { BlockMatrix::identity(t) } else { conjugator };
        let conjugator_inv = conjugator.inverse().ok_or(RingError::NotAUnit(target))?;
        Ok(BlockIso {
            source,
            target,
            conjugator,
            conjugator_inv,
        })
    }

    pub fn identity(ring: &ProductRing, block: usize) -> Self {
        let id = BlockMatrix::identity(ring.block(block));
        BlockIso {
            source: block,
            target: block,
            conjugator: id.clone(),
            conjugator_inv: id,
        }
    }

    pub fn conjugator(&self) -> &BlockMatrix {
        &self.conjugator
    }

    pub fn apply(&self, m: &BlockMatrix) -> BlockMatrix {
        self.conjugator.mul(m).mul(&self.conjugator_inv)
    }

    pub fn apply_inverse(&self, m: &BlockMatrix) -> BlockMatrix {
        self.conjugator_inv.mul(m).mul(&self.conjugator)
    }

    /// `m -> c (u m u^-1) c^-1`, i.e. post-composition with conjugation by `c`.
    pub fn conjugated_by(&self, c: &BlockMatrix) -> BlockIso {
        let conjugator = if c.shape().k == 1 { self.conjugator.clone() } else { c.mul(&self.conjugator) };
        let conjugator_inv = conjugator.inverse().expect("product of units");
        BlockIso {
            source: self.source,
            target: self.target,
            conjugator,
            conjugator_inv,
        }
    }

    pub fn inverse(&self) -> BlockIso {
        BlockIso {
            source: self.target,
            target: self.source,
            conjugator: self.conjugator_inv.clone(),
            conjugator_inv: self.conjugator.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(p: u64) -> BlockType {
        BlockType::new(1, p, 1)
    }

    #[test]
    fn zero_is_additive_identity() {
        let r = ProductRing::new(vec![z(5), BlockType::new(2, 3, 1)]);
        for x in r.spanning_set(&r.all_blocks()) {
            assert_eq!(&r.zero() + &x, x);
        }
    }

    #[test]
    fn multiplication_in_z5() {
        let r = ProductRing::new(vec![z(5)]);
        assert_eq!(&r.scalar(2) * &r.scalar(3), r.scalar(1));
    }

    #[test]
    fn try_invert_cases() {
        let r = ProductRing::new(vec![z(5)]);
        assert_eq!(r.scalar(2).try_invert(&r.all_blocks()).unwrap(), r.scalar(3));
        let z4 = ProductRing::new(vec![BlockType::new(1, 2, 2)]);
        assert_eq!(z4.scalar(2).try_invert(&z4.all_blocks()), Err(RingError::NotAUnit(0)));
        let r2 = ProductRing::new(vec![z(2), z(3), z(5)]);
        for s in [BlockSet::empty(), BlockSet::singleton(1), r2.all_blocks()] {
            let e = r2.idempotent(&s);
            assert_eq!(e.try_invert(&s).unwrap(), e);
        }
    }

    #[test]
    fn projection_reads_off_entry() {
        let r = ProductRing::new(vec![z(2), z(2), z(2)]);
        let x = r.from_blocks(vec![BlockMatrix::scalar(z(2), 1), BlockMatrix::zero(z(2)), BlockMatrix::scalar(z(2), 1)]).unwrap();
        assert!(x.pr(1).is_zero());
        assert_eq!(r.one().pr(0), r.idempotent(&BlockSet::singleton(0)));
        let sum = (0..3).fold(r.zero(), |acc, g| &acc + &x.pr(g));
        assert_eq!(sum, x);
    }

    #[test]
    fn idempotents() {
        let r = ProductRing::new(vec![z(2), z(2)]);
        assert!(r.idempotent(&BlockSet::empty()).is_zero());
        assert_eq!(r.idempotent(&r.all_blocks()), r.one());
        let e0 = r.idempotent(&BlockSet::singleton(0));
        assert_eq!(e0.block(0).get(0, 0), 1);
        assert_eq!(e0.block(1).get(0, 0), 0);
    }

    #[test]
    fn idempotent_product_is_intersection() {
        let r = ProductRing::new(vec![z(2), z(3), z(5), z(7)]);
        let sets: Vec<BlockSet> = (0u32..16).map(|mask| (0..4).filter(|i| mask >> i & 1 == 1).collect()).collect();
        for s in &sets {
            for t in &sets {
                assert_eq!(&r.idempotent(s) * &r.idempotent(t), r.idempotent(&s.intersection(t)));
            }
        }
    }

    #[test]
    fn mismatched_rings_are_rejected() {
        let a = ProductRing::new(vec![z(5)]);
        let b = ProductRing::new(vec![z(3)]);
        assert!(matches!(a.try_mul(&a.one(), &b.one()), Err(RingError::RingMismatch(_))));
        assert!(a.try_add(&a.one(), &a.one()).is_ok());
    }

    #[test]
    fn block_iso_is_bijective_and_unital() {
        let t = BlockType::new(2, 2, 1);
        let r = ProductRing::new(vec![t, t]);
        let u = BlockMatrix::from_rows(t, &[vec![1, 1], vec![0, 1]]).unwrap();
        let iso = BlockIso::new(&r, 0, 1, u).unwrap();
        let all: Vec<_> = BlockMatrix::enumerate(t).collect();
        let images: BTreeSet<_> = all.iter().map(|m| iso.apply(m)).collect();
        assert_eq!(images.len(), all.len());
        assert!(iso.apply(&BlockMatrix::identity(t)).is_identity());
        for a in &all {
            assert_eq!(iso.apply_inverse(&iso.apply(a)), *a);
            for b in &all {
                assert_eq!(iso.apply(&a.mul(b)), iso.apply(a).mul(&iso.apply(b)));
            }
        }
        assert!(BlockIso::new(&ProductRing::new(vec![t, z(2)]), 0, 1, BlockMatrix::identity(t)).is_err());
    }
}
