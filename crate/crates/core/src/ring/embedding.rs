//! Ring monomorphisms between products of blocks that send each block onto a
//! block by a conjugation.

use super::{BlockMatrix, BlockSet, BlockType, ProductRing, RingElement, RingError};

/// Finds `c` with `c E_ij c^-1 = images(i, j)` for all matrix units `E_ij`.
///
/// Returns `None` when the images are not those of an inner automorphism.
pub fn inner_conjugator(shape: BlockType, images: impl Fn(usize, usize) -> BlockMatrix) -> Option<BlockMatrix> {
    let k = shape.k;
    let m = shape.modulus();
    let m11 = images(0, 0);
    if m11.shape() != shape {
        return None;
    }
    // A column of the rank one idempotent `M_11` with a unit entry spans its image.
    let col = (0..k).find(|&j| (0..k).any(|i| !m11.get(i, j).is_multiple_of(shape.p)))?;
    let v: Vec<u64> = (0..k).map(|i| m11.get(i, col)).collect();
    let mut entries = vec![0i64; k * k];
    for c in 0..k {
        let mk1 = images(c, 0);
        for r in 0..k {
            let s = (0..k).fold(0u128, |acc, t| (acc + mk1.get(r, t) as u128 * v[t] as u128) % m as u128);
            entries[r * k + c] = s as i64;
        }
    }
    let conj = BlockMatrix::from_entries(shape, &entries)?;
    let inv = conj.inverse()?;
    for i in 0..k {
        for j in 0..k {
            if conj.mul(&BlockMatrix::unit(shape, i, j, 1)).mul(&inv) != images(i, j) {
                return None;
            }
        }
    }
    Some(conj)
}

/// Block `i` of the source goes to block `images[i].0` of the target by
/// `a -> c a c^-1`; distinct source blocks go to distinct target blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockEmbedding {
    source: ProductRing,
    target: ProductRing,
    images: Vec<(usize, BlockMatrix, BlockMatrix)>,
}

impl BlockEmbedding {
    pub fn new(source: &ProductRing, target: &ProductRing, images: Vec<(usize, BlockMatrix)>) -> Result<Self, RingError> {
        if images.len() != source.num_blocks() {
            return Err(RingError::RingMismatch(format!(
                "{} block images for {} blocks",
                images.len(),
                source.num_blocks()
            )));
        }
        let mut used = BlockSet::empty();
        let mut out = Vec::with_capacity(images.len());
        for (i, (t, c)) in images.into_iter().enumerate() {
            if t >= target.num_blocks() || used.contains(t) {
                return Err(RingError::RingMismatch(format!("block {i} has no free target {t}")));
            }
            if source.block(i) != target.block(t) || c.shape() != target.block(t) {
                return Err(RingError::ShapeMismatch(i, t));
            }
            used.insert(t);
            let inv = c.inverse().ok_or(RingError::NotAUnit(t))?;
            out.push((t, c, inv));
        }
        Ok(BlockEmbedding {
            source: source.clone(),
            target: target.clone(),
            images: out,
        })
    }

    /// Block `i` goes to block `targets[i]` with identity conjugators.
    pub fn from_targets(source: &ProductRing, target: &ProductRing, targets: &[usize]) -> Result<Self, RingError> {
        let images = targets
            .iter()
            .enumerate()
            .map(|(i, &t)| (t, BlockMatrix::identity(source.block(i))))
            .collect();
        Self::new(source, target, images)
    }

    pub fn identity(ring: &ProductRing) -> Self {
        let targets: Vec<usize> = (0..ring.num_blocks()).collect();
        Self::from_targets(ring, ring, &targets).expect("identity is an embedding")
    }

    /// Recovers the embedding realised by an additive map, or `None` if the
    /// map does not send each block onto one target block by a conjugation.
    /// Only matrix units are inspected; callers compare on a spanning set.
    pub fn from_map(source: &ProductRing, target: &ProductRing, f: impl Fn(&RingElement) -> RingElement) -> Option<Self> {
        let mut images = Vec::with_capacity(source.num_blocks());
        for i in 0..source.num_blocks() {
            let shape = source.block(i);
            let one = f(&source.idempotent(&BlockSet::singleton(i)));
            let supp = one.support();
            if supp.len() != 1 {
                return None;
            }
            let t = supp.iter().next()?;
            if !one.is_central_idempotent_of(&supp) || target.block(t) != shape {
                return None;
            }
            let units: Vec<Vec<RingElement>> = (0..shape.k)
                .map(|r| (0..shape.k).map(|c| f(&source.embed_block(i, BlockMatrix::unit(shape, r, c, 1)))).collect())
                .collect();
            if units.iter().flatten().any(|u| !u.vanishes_outside(&supp)) {
                return None;
            }
            let conj = inner_conjugator(shape, |r, c| units[r][c].block(t).clone())?;
            images.push((t, conj));
        }
        Self::new(source, target, images).ok()
    }

    pub fn source(&self) -> &ProductRing {
        &self.source
    }

    pub fn target(&self) -> &ProductRing {
        &self.target
    }

    pub fn block_image(&self, i: usize) -> usize {
        self.images[i].0
    }

    pub fn block_preimage(&self, t: usize) -> Option<usize> {
        self.images.iter().position(|(x, _, _)| *x == t)
    }

    pub fn conjugator(&self, i: usize) -> &BlockMatrix {
        &self.images[i].1
    }

    pub fn image_blocks(&self) -> BlockSet {
        self.images.iter().map(|(t, _, _)| *t).collect()
    }

    pub fn map_blocks(&self, s: &BlockSet) -> BlockSet {
        s.iter().map(|i| self.images[i].0).collect()
    }

    /// Source blocks landing in `s`.
    pub fn preimage_blocks(&self, s: &BlockSet) -> BlockSet {
        (0..self.images.len()).filter(|&i| s.contains(self.images[i].0)).collect()
    }

    pub fn is_bijective(&self) -> bool {
        self.images.len() == self.target.num_blocks()
    }

    pub fn apply(&self, x: &RingElement) -> RingElement {
        let mut out = self.target.zero();
        for (i, (t, c, ci)) in self.images.iter().enumerate() {
            out.set_block(*t, c.mul(x.block(i)).mul(ci));
        }
        out
    }

    /// The unique preimage of the part of `y` on the image blocks.
    pub fn apply_inverse(&self, y: &RingElement) -> RingElement {
        let mut out = self.source.zero();
        for (i, (t, c, ci)) in self.images.iter().enumerate() {
            out.set_block(i, ci.mul(y.block(*t)).mul(c));
        }
        out
    }

    /// `other` after `self`.
    pub fn then(&self, other: &BlockEmbedding) -> BlockEmbedding {
        assert_eq!(self.target, other.source, "embeddings do not compose");
        let images = self
            .images
            .iter()
            .map(|(t, c, _)| {
                let (t2, c2, _) = &other.images[*t];
                (*t2, c2.mul(c))
            })
            .collect();
        BlockEmbedding::new(&self.source, &other.target, images).expect("composite of embeddings")
    }

    /// Inverse of a bijective embedding.
    pub fn inverse(&self) -> Option<BlockEmbedding> {
        if !self.is_bijective() {
            return None;
        }
        let mut images = vec![None; self.target.num_blocks()];
        for (i, (t, _, ci)) in self.images.iter().enumerate() {
            images[*t] = Some((i, ci.clone()));
        }
        let images = images.into_iter().collect::<Option<Vec<_>>>()?;
        BlockEmbedding::new(&self.target, &self.source, images).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugator_recovered_from_images() {
        let shape = BlockType::new(2, 3, 1);
        let c = BlockMatrix::from_rows(shape, &[vec![1, 1], vec![0, 2]]).unwrap();
        let ci = c.inverse().unwrap();
        let found = inner_conjugator(shape, |i, j| c.mul(&BlockMatrix::unit(shape, i, j, 1)).mul(&ci)).unwrap();
        let fi = found.inverse().unwrap();
        for x in BlockMatrix::enumerate(shape).take(40) {
            assert_eq!(found.mul(&x).mul(&fi), c.mul(&x).mul(&ci));
        }
    }

    #[test]
    fn transpose_is_not_inner() {
        let shape = BlockType::new(2, 5, 1);
        assert!(inner_conjugator(shape, |i, j| BlockMatrix::unit(shape, j, i, 1)).is_none());
    }

    #[test]
    fn from_map_inverse_and_compose() {
        let a = ProductRing::new(vec![BlockType::new(1, 2, 1), BlockType::new(2, 3, 1)]);
        let b = ProductRing::new(vec![BlockType::new(2, 3, 1), BlockType::new(1, 5, 1), BlockType::new(1, 2, 1)]);
        let c = BlockMatrix::from_rows(BlockType::new(2, 3, 1), &[vec![0, 1], vec![2, 1]]).unwrap();
        let e = BlockEmbedding::new(&a, &b, vec![(2, BlockMatrix::identity(a.block(0))), (0, c)]).unwrap();
        let f = BlockEmbedding::from_map(&a, &b, |x| e.apply(x)).unwrap();
        for x in a.spanning_set(&a.all_blocks()) {
            assert_eq!(f.apply(&x), e.apply(&x));
            assert_eq!(e.apply_inverse(&e.apply(&x)), x);
        }
        assert!(!e.is_bijective());
        assert!(e.inverse().is_none());
        let id = BlockEmbedding::identity(&a);
        assert_eq!(id.then(&e).apply(&a.one()), e.apply(&a.one()));
        assert!(BlockEmbedding::from_map(&a, &b, |x| e.apply(x).scale(2)).is_none());
    }
}
