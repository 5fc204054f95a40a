//! Additive subgroups of finite products of `Z/p^e`, with exact membership.
//!
//! A residue vector splits by prime into modules over the chain rings
//! `Z/p^E`. Each part is kept in an echelon form in which every pivot is a
//! power of `p` and, for each pivot row with valuation `v > 0`, the row
//! multiplied by `p^(E-v)` has been folded back in. That closure makes
//! column-ordered reduction a complete membership test and gives the
//! cardinality as a product of pivot orders.

use std::collections::BTreeMap;

use crate::ring::{inv_mod, BlockMatrix, ProductRing, RingElement};

/// Coordinate moduli of a residue vector, as `(p, e)` pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    coords: Vec<(u64, u32)>,
}

impl Layout {
    pub fn of_ring(ring: &ProductRing) -> Self {
        let mut coords = Vec::new();
        for b in ring.blocks() {
            for _ in 0..b.k * b.k {
                coords.push((b.p, b.e));
            }
        }
        Layout { coords }
    }

    /// `copies` consecutive copies of the ring's layout.
    pub fn repeated(ring: &ProductRing, copies: usize) -> Self {
        let one = Self::of_ring(ring);
        let mut coords = Vec::with_capacity(one.coords.len() * copies);
        for _ in 0..copies {
            coords.extend_from_slice(&one.coords);
        }
        Layout { coords }
    }

    pub fn concat(&self, other: &Layout) -> Layout {
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        Layout { coords }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

/// Flattens an element into its residue vector.
pub fn flatten(x: &RingElement) -> Vec<u64> {
    x.blocks().iter().flat_map(|b| b.entries().iter().copied()).collect()
}

/// Rebuilds an element of `ring` from a residue vector.
pub fn unflatten(ring: &ProductRing, v: &[u64]) -> RingElement {
    let mut pos = 0;
    let mut blocks = Vec::with_capacity(ring.num_blocks());
    for &b in ring.blocks() {
        let n = b.k * b.k;
        let entries: Vec<i64> = v[pos..pos + n].iter().map(|&x| x as i64).collect();
        blocks.push(BlockMatrix::from_entries(b, &entries).expect("layout matches ring"));
        pos += n;
    }
    ring.from_blocks(blocks).expect("layout matches ring")
}

#[derive(Clone, Debug)]
struct PrimePart {
    p: u64,
    top: u32,
    modulus: u64,
    /// Positions in the full vector, with the exponent of each.
    cols: Vec<(usize, u32)>,
    /// Pivot rows: (pivot column, valuation, row).
    basis: Vec<(usize, u32, Vec<u64>)>,
}

impl PrimePart {
    fn valuation(&self, x: u64) -> u32 {
        if x == 0 {
            return self.top;
        }
        let mut v = 0;
        let mut x = x;
        while x.is_multiple_of(self.p) {
            x /= self.p;
            v += 1;
        }
        v
    }

    fn project(&self, full: &[u64]) -> Vec<u64> {
        self.cols
            .iter()
            .map(|&(i, e)| full[i] * self.p.pow(self.top - e) % self.modulus)
            .collect()
    }

    fn mul_sub(&self, row: &mut [u64], f: u64, pivot: &[u64]) {
        let m = self.modulus as u128;
        for (a, b) in row.iter_mut().zip(pivot) {
            let t = (f as u128 * *b as u128) % m;
            *a = ((*a as u128 + m - t) % m) as u64;
        }
    }

    fn reduce(&self, mut v: Vec<u64>) -> Result<Vec<u64>, Vec<u64>> {
        for (col, val, row) in &self.basis {
            let x = v[*col];
            if x == 0 {
                continue;
            }
            let pv = self.p.pow(*val);
            if !x.is_multiple_of(pv) {
                return Err(v);
            }
            self.mul_sub(&mut v, x / pv, row);
        }
        Ok(v)
    }

    fn rebuild(&mut self, mut pool: Vec<Vec<u64>>) {
        let n = self.cols.len();
        let m = self.modulus as u128;
        let mut basis = Vec::new();
        for col in 0..n {
            let best = pool
                .iter()
                .enumerate()
                .filter(|(_, r)| r[col] != 0)
                .min_by_key(|(_, r)| self.valuation(r[col]))
                .map(|(i, _)| i);
            let Some(bi) = best else { continue };
            let mut pivot = pool.swap_remove(bi);
            let v = self.valuation(pivot[col]);
            let pv = self.p.pow(v);
            let unit = inv_mod(pivot[col] / pv, self.modulus).expect("unit part");
            for a in pivot.iter_mut() {
                *a = ((*a as u128 * unit as u128) % m) as u64;
            }
            for r in pool.iter_mut() {
                if r[col] != 0 {
                    let f = r[col] / pv;
                    self.mul_sub(r, f, &pivot);
                }
            }
            if v > 0 {
                let ann = self.p.pow(self.top - v);
                let extra: Vec<u64> = pivot.iter().map(|&a| ((a as u128 * ann as u128) % m) as u64).collect();
                if extra.iter().any(|&a| a != 0) {
                    pool.push(extra);
                }
            }
            pool.retain(|r| r.iter().any(|&a| a != 0));
            basis.push((col, v, pivot));
        }
        self.basis = basis;
    }

    fn insert(&mut self, v: Vec<u64>) -> bool {
        let rem = match self.reduce(v) {
            Ok(r) if r.iter().all(|&a| a == 0) => return false,
            Ok(r) | Err(r) => r,
        };
        let mut pool: Vec<Vec<u64>> = self.basis.drain(..).map(|(_, _, r)| r).collect();
        pool.push(rem);
        self.rebuild(pool);
        true
    }

    fn log_cardinality(&self) -> f64 {
        self.basis
            .iter()
            .map(|(_, v, _)| (self.top - v) as f64 * (self.p as f64).ln())
            .sum()
    }
}

/// The additive span of a set of residue vectors.
#[derive(Clone, Debug)]
pub struct Span {
    layout: Layout,
    parts: Vec<PrimePart>,
}

impl Span {
    pub fn new(layout: Layout) -> Self {
        let mut by_prime: BTreeMap<u64, Vec<(usize, u32)>> = BTreeMap::new();
        for (i, &(p, e)) in layout.coords.iter().enumerate() {
            by_prime.entry(p).or_default().push((i, e));
        }
        let parts = by_prime
            .into_iter()
            .map(|(p, cols)| {
                let top = cols.iter().map(|&(_, e)| e).max().unwrap();
                PrimePart {
                    p,
                    top,
                    modulus: p.pow(top),
                    cols,
                    basis: Vec::new(),
                }
            })
            .collect();
        Span { layout, parts }
    }

    pub fn from_vectors<I: IntoIterator<Item = Vec<u64>>>(layout: Layout, vectors: I) -> Self {
        let mut s = Span::new(layout);
        for v in vectors {
            s.insert(&v);
        }
        s
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Adds a generator; returns whether the span grew.
    pub fn insert(&mut self, v: &[u64]) -> bool {
        assert_eq!(v.len(), self.layout.len(), "vector length does not match layout");
        let mut grew = false;
        for part in &mut self.parts {
            let pv = part.project(v);
            grew |= part.insert(pv);
        }
        grew
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        assert_eq!(v.len(), self.layout.len(), "vector length does not match layout");
        self.parts
            .iter()
            .all(|part| matches!(part.reduce(part.project(v)), Ok(r) if r.iter().all(|&a| a == 0)))
    }

    /// Natural log of the number of elements.
    pub fn log_cardinality(&self) -> f64 {
        self.parts.iter().map(|p| p.log_cardinality()).sum()
    }

    /// Exact number of elements, if it fits in a `u128`.
    pub fn cardinality(&self) -> Option<u128> {
        let mut acc: u128 = 1;
        for part in &self.parts {
            for (_, v, _) in &part.basis {
                for _ in 0..(part.top - v) {
                    acc = acc.checked_mul(part.p as u128)?;
                }
            }
        }
        Some(acc)
    }

    /// Exponents of the order of the span per prime: `|S| = prod p^n_p`.
    pub fn order_exponents(&self) -> BTreeMap<u64, u32> {
        self.parts
            .iter()
            .map(|part| (part.p, part.basis.iter().map(|(_, v, _)| part.top - v).sum()))
            .collect()
    }

    pub fn same_order(&self, other: &Span) -> bool {
        let (a, b) = (self.order_exponents(), other.order_exponents());
        let keys: std::collections::BTreeSet<u64> = a.keys().chain(b.keys()).copied().collect();
        keys.into_iter()
            .all(|p| a.get(&p).copied().unwrap_or(0) == b.get(&p).copied().unwrap_or(0))
    }

    /// `self` contains every basis row of `other` (both over the same layout).
    pub fn contains_span(&self, other: &Span) -> bool {
        other.generators().iter().all(|g| self.contains(g))
    }

    pub fn equals(&self, other: &Span) -> bool {
        self.contains_span(other) && other.contains_span(self)
    }

    /// A generating set for the span, as full residue vectors.
    pub fn generators(&self) -> Vec<Vec<u64>> {
        let mut out = Vec::new();
        for part in &self.parts {
            for (_, _, row) in &part.basis {
                let mut full = vec![0u64; self.layout.len()];
                for (&(i, e), &a) in part.cols.iter().zip(row) {
                    // Coordinates were scaled into Z/p^top by p^(top-e); undo it.
                    // Rows of the span always have entries divisible by that factor.
                    let scale = part.p.pow(part.top - e);
                    debug_assert_eq!(a % scale, 0);
                    full[i] = (a / scale) % part.p.pow(e);
                }
                out.push(full);
            }
        }
        out
    }

    /// For a span living in a concatenated layout `first ++ second` that is the
    /// graph of an additive map, evaluates the map at `x` (given in the first
    /// layout). Returns `None` if `x` is not in the projection onto the first part.
    pub fn graph_apply(&self, first_len: usize, x: &[u64]) -> Option<Vec<u64>> {
        let mut full = x.to_vec();
        full.resize(self.layout.len(), 0);
        let mut out = vec![0u64; self.layout.len() - first_len];
        for part in &self.parts {
            let mut v = part.project(&full);
            for (col, val, row) in &part.basis {
                if part.cols[*col].0 >= first_len {
                    break;
                }
                let a = v[*col];
                if a == 0 {
                    continue;
                }
                let pv = part.p.pow(*val);
                if a % pv != 0 {
                    return None;
                }
                part.mul_sub(&mut v, a / pv, row);
            }
            for (&(i, e), &a) in part.cols.iter().zip(&v) {
                if i < first_len {
                    if a != 0 {
                        return None;
                    }
                } else {
                    let scale = part.p.pow(part.top - e);
                    let modulus = part.p.pow(e);
                    let val = (a / scale) % modulus;
                    out[i - first_len] = (modulus - val) % modulus;
                }
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::BlockType;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn enumerate_span(layout: &[(u64, u32)], gens: &[Vec<u64>]) -> BTreeSet<Vec<u64>> {
        let mut seen: BTreeSet<Vec<u64>> = [vec![0; layout.len()]].into_iter().collect();
        let mut frontier: Vec<Vec<u64>> = seen.iter().cloned().collect();
        while let Some(x) = frontier.pop() {
            for g in gens {
                let y: Vec<u64> = x
                    .iter()
                    .zip(g)
                    .zip(layout)
                    .map(|((a, b), &(p, e))| (a + b) % p.pow(e))
                    .collect();
                if seen.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        seen
    }

    fn layout_strategy() -> impl Strategy<Value = Vec<(u64, u32)>> {
        prop::collection::vec(prop_oneof![Just((2u64, 1u32)), Just((2, 2)), Just((2, 3)), Just((3, 1)), Just((3, 2)), Just((5, 1))], 1..5)
    }

    proptest! {
        #[test]
        fn span_matches_brute_force(
            layout in layout_strategy(),
            raw in prop::collection::vec(prop::collection::vec(0u64..1000, 5), 0..4),
            probes in prop::collection::vec(prop::collection::vec(0u64..1000, 5), 8),
        ) {
            let reduce = |v: &Vec<u64>| -> Vec<u64> {
                layout.iter().enumerate().map(|(i, &(p, e))| v[i] % p.pow(e)).collect()
            };
            let gens: Vec<Vec<u64>> = raw.iter().map(reduce).collect();
            let brute = enumerate_span(&layout, &gens);
            let span = Span::from_vectors(Layout { coords: layout.clone() }, gens.clone());
            prop_assert_eq!(span.cardinality(), Some(brute.len() as u128));
            for v in brute.iter().take(50) {
                prop_assert!(span.contains(v));
            }
            for p in &probes {
                let v = reduce(p);
                prop_assert_eq!(span.contains(&v), brute.contains(&v));
            }
            let regen = Span::from_vectors(Layout { coords: layout.clone() }, span.generators());
            prop_assert!(regen.equals(&span));
        }
    }

    #[test]
    fn graph_of_doubling() {
        // Graph of x -> 2x from Z/4 to Z/4.
        let layout = Layout { coords: vec![(2, 2), (2, 2)] };
        let span = Span::from_vectors(layout, vec![vec![1, 2]]);
        assert_eq!(span.graph_apply(1, &[3]), Some(vec![2]));
        assert_eq!(span.graph_apply(1, &[1]), Some(vec![2]));
    }

    #[test]
    fn graph_across_primes() {
        // Z/2 x Z/3 -> Z/3 x Z/2 swapping the factors.
        let layout = Layout { coords: vec![(2, 1), (3, 1), (3, 1), (2, 1)] };
        let span = Span::from_vectors(layout, vec![vec![1, 0, 0, 1], vec![0, 1, 1, 0]]);
        assert_eq!(span.graph_apply(2, &[1, 2]), Some(vec![2, 1]));
    }

    #[test]
    fn flatten_roundtrip() {
        let r = ProductRing::new(vec![BlockType::new(2, 3, 1), BlockType::new(1, 2, 2)]);
        for x in r.spanning_set(&r.all_blocks()) {
            assert_eq!(unflatten(&r, &flatten(&x)), x);
        }
        let full = Span::from_vectors(Layout::of_ring(&r), r.spanning_set(&r.all_blocks()).iter().map(flatten));
        assert_eq!(full.cardinality(), Some(81 * 4));
    }
}
