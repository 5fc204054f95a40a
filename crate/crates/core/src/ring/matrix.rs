//! Square matrices over `Z/p^e`, the entries of one block of a product ring.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Shape of an indecomposable block: the full ring of `k x k` matrices over `Z/p^e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockType {
    pub k: usize,
    pub p: u64,
    pub e: u32,
}

impl BlockType {
    pub fn new(k: usize, p: u64, e: u32) -> Self {
        BlockType { k, p, e }
    }

    /// `p^e`.
    pub fn modulus(&self) -> u64 {
        self.p.pow(self.e)
    }

    /// Number of elements of the block, if it fits in a `u128`.
    pub fn cardinality(&self) -> Option<u128> {
        let m = self.modulus() as u128;
        let mut acc: u128 = 1;
        for _ in 0..self.k * self.k {
            acc = acc.checked_mul(m)?;
        }
        Some(acc)
    }

    /// Natural logarithm of the block's cardinality.
    pub fn log_cardinality(&self) -> f64 {
        (self.k * self.k) as f64 * self.e as f64 * (self.p as f64).ln()
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// A `k x k` matrix with entries reduced modulo `p^e`, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockMatrix {
    shape: BlockType,
    data: Vec<u64>,
}

impl fmt::Debug for BlockMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.shape.k == 1 {
            return write!(f, "{}", self.data[0]);
        }
        write!(f, "[")?;
        for i in 0..self.shape.k {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{:?}", &self.data[i * self.shape.k..(i + 1) * self.shape.k])?;
        }
        write!(f, "]")
    }
}

impl BlockMatrix {
    pub fn zero(shape: BlockType) -> Self {
        BlockMatrix {
            shape,
            data: vec![0; shape.k * shape.k],
        }
    }

    pub fn identity(shape: BlockType) -> Self {
        Self::scalar(shape, 1)
    }

    pub fn scalar(shape: BlockType, c: u64) -> Self {
        let mut m = Self::zero(shape);
        let c = c % shape.modulus();
        for i in 0..shape.k {
            m.data[i * shape.k + i] = c;
        }
        m
    }

    /// Matrix unit `c * e_{ij}`.
    pub fn unit(shape: BlockType, i: usize, j: usize, c: u64) -> Self {
        let mut m = Self::zero(shape);
        m.data[i * shape.k + j] = c % shape.modulus();
        m
    }

    /// Builds a matrix from signed row-major entries, reducing them.
    pub fn from_entries(shape: BlockType, entries: &[i64]) -> Option<Self> {
        if entries.len() != shape.k * shape.k {
            return None;
        }
        let m = shape.modulus() as i64;
        Some(BlockMatrix {
            shape,
            data: entries.iter().map(|&x| x.rem_euclid(m) as u64).collect(),
        })
    }

    pub fn from_rows(shape: BlockType, rows: &[Vec<i64>]) -> Option<Self> {
        if rows.len() != shape.k || rows.iter().any(|r| r.len() != shape.k) {
            return None;
        }
        let flat: Vec<i64> = rows.iter().flatten().copied().collect();
        Self::from_entries(shape, &flat)
    }

    pub fn shape(&self) -> BlockType {
        self.shape
    }

    pub fn entries(&self) -> &[u64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.shape.k + j]
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.data.chunks(self.shape.k).map(|r| r.to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.shape)
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.shape, other.shape);
        let m = self.shape.modulus();
        BlockMatrix {
            shape: self.shape,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| (a + b) % m)
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        let m = self.shape.modulus();
        BlockMatrix {
            shape: self.shape,
            data: self.data.iter().map(|&a| (m - a) % m).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: u64) -> Self {
        let m = self.shape.modulus() as u128;
        BlockMatrix {
            shape: self.shape,
            data: self
                .data
                .iter()
                .map(|&a| ((a as u128 * (c as u128 % m)) % m) as u64)
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.shape, other.shape);
        let k = self.shape.k;
        let m = self.shape.modulus() as u128;
        let mut data = vec![0u64; k * k];
        for i in 0..k {
            for j in 0..k {
                let mut acc: u128 = 0;
                for l in 0..k {
                    acc += self.data[i * k + l] as u128 * other.data[l * k + j] as u128;
                }
                data[i * k + j] = (acc % m) as u64;
            }
        }
        BlockMatrix {
            shape: self.shape,
            data,
        }
    }

    /// Determinant by cofactor expansion; blocks are small.
    pub fn det(&self) -> u64 {
        let k = self.shape.k;
        let m = self.shape.modulus() as i128;
        fn rec(data: &[i128], k: usize, m: i128) -> i128 {
            if k == 1 {
                return data[0].rem_euclid(m);
            }
            let mut acc: i128 = 0;
            for col in 0..k {
                let mut minor = Vec::with_capacity((k - 1) * (k - 1));
                for r in 1..k {
                    for c in 0..k {
                        if c != col {
                            minor.push(data[r * k + c]);
                        }
                    }
                }
                let term = data[col] * rec(&minor, k - 1, m) % m;
                if col % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
                acc = acc.rem_euclid(m);
            }
            acc
        }
        let data: Vec<i128> = self.data.iter().map(|&x| x as i128).collect();
        rec(&data, k, m) as u64
    }

    /// Inverse by Gauss-Jordan elimination over the local ring `Z/p^e`.
    ///
    /// A pivot must be a unit (not divisible by `p`); if some column has no
    /// unit entry among the remaining rows the matrix is singular mod `p`.
    pub fn inverse(&self) -> Option<Self> {
        let k = self.shape.k;
        let p = self.shape.p;
        let m = self.shape.modulus();
        let mut a = self.data.clone();
        let mut inv = Self::identity(self.shape).data;
        for col in 0..k {
            let pivot = (col..k).find(|&r| !a[r * k + col].is_multiple_of(p))?;
            if pivot != col {
                for c in 0..k {
                    a.swap(pivot * k + c, col * k + c);
                    inv.swap(pivot * k + c, col * k + c);
                }
            }
            let pinv = inv_mod(a[col * k + col], m)?;
            for c in 0..k {
                a[col * k + c] = mulmod(a[col * k + c], pinv, m);
                inv[col * k + c] = mulmod(inv[col * k + c], pinv, m);
            }
            for r in 0..k {
                if r == col {
                    continue;
                }
                let f = a[r * k + col];
                if f == 0 {
                    continue;
                }
                for c in 0..k {
                    a[r * k + c] = submod(a[r * k + c], mulmod(f, a[col * k + c], m), m);
                    inv[r * k + c] = submod(inv[r * k + c], mulmod(f, inv[col * k + c], m), m);
                }
            }
        }
        Some(BlockMatrix {
            shape: self.shape,
            data: inv,
        })
    }

    /// Every matrix of the block, in lexicographic order of entries.
    pub fn enumerate(shape: BlockType) -> impl Iterator<Item = BlockMatrix> {
        let n = shape.k * shape.k;
        let m = shape.modulus();
        let total = shape.cardinality().unwrap_or(u128::MAX);
        (0..total).map(move |mut idx| {
            let mut data = vec![0u64; n];
            for slot in data.iter_mut().rev() {
                *slot = (idx % m as u128) as u64;
                idx /= m as u128;
            }
            BlockMatrix { shape, data }
        })
    }
}

pub(crate) fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn submod(a: u64, b: u64, m: u64) -> u64 {
    (a + m - b % m) % m
}

/// Inverse of `a` modulo `m` by the extended Euclidean algorithm.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> BlockType {
        BlockType::new(2, 3, 1)
    }

    #[test]
    fn square_of_antidiagonal_mod_3() {
        let s = BlockMatrix::from_rows(f3(), &[vec![0, 1], vec![2, 0]]).unwrap();
        let sq = s.mul(&s);
        assert_eq!(sq.rows(), vec![vec![2, 0], vec![0, 2]]);
    }

    #[test]
    fn inverse_agrees_with_exhaustive_search() {
        for shape in [BlockType::new(1, 5, 1), BlockType::new(1, 2, 2), BlockType::new(2, 2, 1), f3(), BlockType::new(1, 3, 2)] {
            if shape.cardinality().unwrap() > 625 {
                continue;
            }
            let all: Vec<_> = BlockMatrix::enumerate(shape).collect();
            let one = BlockMatrix::identity(shape);
            for a in &all {
                let brute = all.iter().find(|b| a.mul(b) == one && b.mul(a) == one);
                assert_eq!(a.inverse().as_ref(), brute, "{shape:?} {a:?}");
                assert_eq!(brute.is_some(), a.det() % shape.p != 0);
            }
        }
    }

    #[test]
    fn two_is_not_a_unit_mod_4() {
        let z4 = BlockType::new(1, 2, 2);
        assert!(BlockMatrix::scalar(z4, 2).inverse().is_none());
        let z5 = BlockType::new(1, 5, 1);
        assert_eq!(BlockMatrix::scalar(z5, 2).inverse().unwrap(), BlockMatrix::scalar(z5, 3));
    }

    #[test]
    fn euclid_inverse() {
        assert_eq!(inv_mod(3, 5), Some(2));
        assert_eq!(inv_mod(2, 4), None);
        assert_eq!(inv_mod(7, 27), Some(4));
    }

    #[test]
    fn determinant_3x3() {
        let t = BlockType::new(3, 7, 1);
        let a = BlockMatrix::from_entries(t, &[2, 0, 1, 1, 3, 2, 1, 1, 1]).unwrap();
        // 2(3-2) - 0 + 1(1-3) = 0
        assert_eq!(a.det(), 0);
        assert!(a.inverse().is_none());
    }
}
