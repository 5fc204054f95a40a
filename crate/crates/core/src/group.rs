//! Finite groups given by Cayley tables, subgroups, and left transversals.

use std::collections::BTreeSet;

use thiserror::Error;

pub type Elem = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("table is empty or not square")]
    NotSquare,
    #[error("entry {value} at ({row}, {col}) is out of range")]
    OutOfRange { row: usize, col: usize, value: usize },
    #[error("not a Latin square: {kind} {index} repeats {value}")]
    NotLatinSquare { kind: &'static str, index: usize, value: usize },
    #[error("no two-sided identity element")]
    NoIdentity,
    #[error("element {0} has no two-sided inverse")]
    NoInverse(usize),
    #[error("not associative at ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
    #[error("subset is not a subgroup: {0}")]
    NotASubgroup(String),
}

/// A finite group with elements `0..order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    table: Vec<Vec<Elem>>,
    identity: Elem,
    inverses: Vec<Elem>,
}

impl FiniteGroup {
    /// Validates a Cayley table: Latin square, identity, inverses, associativity.
    pub fn from_table(table: Vec<Vec<Elem>>) -> Result<Self, GroupError> {
        let n = table.len();
        if n == 0 || table.iter().any(|r| r.len() != n) {
            return Err(GroupError::NotSquare);
        }
        for (i, row) in table.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v >= n {
                    return Err(GroupError::OutOfRange { row: i, col: j, value: v });
                }
            }
        }
        for i in 0..n {
            let mut seen = vec![false; n];
            for j in 0..n {
                let v = table[i][j];
                if std::mem::replace(&mut seen[v], true) {
                    return Err(GroupError::NotLatinSquare { kind: "row", index: i, value: v });
                }
            }
            let mut seen = vec![false; n];
            for j in 0..n {
                let v = table[j][i];
                if std::mem::replace(&mut seen[v], true) {
                    return Err(GroupError::NotLatinSquare { kind: "column", index: i, value: v });
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or(GroupError::NoIdentity)?;
        let mut inverses = Vec::with_capacity(n);
        for g in 0..n {
            let inv = (0..n)
                .find(|&h| table[g][h] == identity && table[h][g] == identity)
                .ok_or(GroupError::NoInverse(g))?;
            inverses.push(inv);
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(GroupError::NotAssociative(a, b, c));
                    }
                }
            }
        }
        Ok(FiniteGroup { table, identity, inverses })
    }

    /// `Z/n` under addition.
    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
        Self::from_table(table).expect("cyclic group")
    }

    /// Symmetric group on three letters; element 0 is the identity.
    pub fn symmetric3() -> Self {
        let perms = permutations3();
        let idx = |p: [usize; 3]| perms.iter().position(|&q| q == p).unwrap();
        let table = perms
            .iter()
            .map(|a| {
                perms
                    .iter()
                    .map(|b| idx([a[b[0]], a[b[1]], a[b[2]]]))
                    .collect()
            })
            .collect();
        Self::from_table(table).expect("S3")
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> Elem {
        self.identity
    }

    pub fn mul(&self, g: Elem, h: Elem) -> Elem {
        self.table[g][h]
    }

    pub fn inv(&self, g: Elem) -> Elem {
        self.inverses[g]
    }

    pub fn inverses(&self) -> &[Elem] {
        &self.inverses
    }

    pub fn table(&self) -> &[Vec<Elem>] {
        &self.table
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.order()
    }

    /// Product of a word of elements.
    pub fn prod(&self, word: &[Elem]) -> Elem {
        word.iter().fold(self.identity, |acc, &g| self.mul(acc, g))
    }

    pub fn trivial_subgroup(&self) -> Subgroup {
        Subgroup {
            members: [self.identity].into_iter().collect(),
        }
    }

    pub fn whole(&self) -> Subgroup {
        Subgroup {
            members: self.elements().collect(),
        }
    }

    /// Validates that `members` is a subgroup.
    pub fn subgroup(&self, members: impl IntoIterator<Item = Elem>) -> Result<Subgroup, GroupError> {
        let members: BTreeSet<Elem> = members.into_iter().collect();
        if !members.contains(&self.identity) {
            return Err(GroupError::NotASubgroup("missing identity".into()));
        }
        for &a in &members {
            if a >= self.order() {
                return Err(GroupError::NotASubgroup(format!("{a} out of range")));
            }
            if !members.contains(&self.inv(a)) {
                return Err(GroupError::NotASubgroup(format!("inverse of {a} missing")));
            }
            for &b in &members {
                if !members.contains(&self.mul(a, b)) {
                    return Err(GroupError::NotASubgroup(format!("{a}*{b} missing")));
                }
            }
        }
        Ok(Subgroup { members })
    }

    /// Subgroup generated by the given elements.
    pub fn generated(&self, gens: &[Elem]) -> Subgroup {
        let mut members: BTreeSet<Elem> = [self.identity].into_iter().collect();
        let mut frontier = vec![self.identity];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = self.mul(x, g);
                if members.insert(y) {
                    frontier.push(y);
                }
            }
        }
        Subgroup { members }
    }
}

fn permutations3() -> Vec<[usize; 3]> {
    vec![[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    members: BTreeSet<Elem>,
}

impl Subgroup {
    pub fn contains(&self, g: Elem) -> bool {
        self.members.contains(&g)
    }

    pub fn members(&self) -> impl Iterator<Item = Elem> + '_ {
        self.members.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// How the representative of each non-identity left coset is picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepChoice {
    #[default]
    MinIndex,
    MaxIndex,
}

/// A left transversal of `H` with the identity as representative of `H` itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transversal {
    subgroup: Subgroup,
    reps: Vec<Elem>,
    bar: Vec<Elem>,
}

impl Transversal {
    pub fn new(group: &FiniteGroup, h: &Subgroup) -> Self {
        Self::with_choice(group, h, RepChoice::MinIndex)
    }

    pub fn with_choice(group: &FiniteGroup, h: &Subgroup, choice: RepChoice) -> Self {
        let n = group.order();
        let mut bar = vec![usize::MAX; n];
        let mut reps = vec![group.identity()];
        for x in h.members() {
            bar[x] = group.identity();
        }
        for x in group.elements() {
            if bar[x] != usize::MAX {
                continue;
            }
            let coset: Vec<Elem> = h.members().map(|m| group.mul(x, m)).collect();
            let rep = match choice {
                RepChoice::MinIndex => *coset.iter().min().unwrap(),
                RepChoice::MaxIndex => *coset.iter().max().unwrap(),
            };
            reps.push(rep);
            for y in coset {
                bar[y] = rep;
            }
        }
        Transversal {
            subgroup: h.clone(),
            reps,
            bar,
        }
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.subgroup
    }

    pub fn reps(&self) -> &[Elem] {
        &self.reps
    }

    /// Representative of the coset `xH`.
    pub fn bar(&self, x: Elem) -> Elem {
        self.bar[x]
    }

    pub fn bar_table(&self) -> &[Elem] {
        &self.bar
    }

    pub fn contains(&self, g: Elem) -> bool {
        self.bar[g] == g
    }
}

pub fn left_transversal(group: &FiniteGroup, h: &Subgroup) -> Transversal {
    Transversal::new(group, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_group() {
        let g = FiniteGroup::from_table(vec![vec![0]]).unwrap();
        assert_eq!(g.order(), 1);
        assert_eq!(g.identity(), 0);
    }

    #[test]
    fn cyclic_three() {
        let g = FiniteGroup::from_table(vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]]).unwrap();
        assert_eq!(g.inverses(), &[0, 2, 1]);
    }

    #[test]
    fn rejects_repeated_row() {
        let err = FiniteGroup::from_table(vec![vec![0, 1], vec![1, 1]]).unwrap_err();
        assert!(matches!(err, GroupError::NotLatinSquare { .. }));
    }

    #[test]
    fn rejects_non_associative_loop() {
        // A Latin square with identity 0 that is not a group (order-5 loop).
        let t = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(matches!(FiniteGroup::from_table(t), Err(GroupError::NotAssociative(..))));
    }

    #[test]
    fn rejects_missing_identity() {
        let t = vec![vec![1, 0, 2], vec![0, 2, 1], vec![2, 1, 0]];
        assert_eq!(FiniteGroup::from_table(t), Err(GroupError::NoIdentity));
    }

    #[test]
    fn transversal_of_extremes() {
        let c3 = FiniteGroup::cyclic(3);
        let t = left_transversal(&c3, &c3.trivial_subgroup());
        assert_eq!(t.reps(), &[0, 1, 2]);
        assert_eq!(t.bar_table(), &[0, 1, 2]);
        let t = left_transversal(&c3, &c3.whole());
        assert_eq!(t.reps(), &[0]);
        assert_eq!(t.bar_table(), &[0, 0, 0]);
    }

    #[test]
    fn s3_transposition_cosets() {
        let s3 = FiniteGroup::symmetric3();
        let h = s3.generated(&[1]);
        assert_eq!(h.len(), 2);
        let t = left_transversal(&s3, &h);
        assert_eq!(t.reps().len(), 3);
        // exhaustive coset enumeration
        for x in s3.elements() {
            let b = t.bar(x);
            assert!(t.reps().contains(&b));
            assert!(h.contains(s3.mul(s3.inv(b), x)));
        }
    }

    #[test]
    fn bar_properties_all_subgroups_of_s3() {
        let s3 = FiniteGroup::symmetric3();
        for gens in [vec![], vec![1], vec![2], vec![3], vec![4], vec![1, 2]] {
            let h = s3.generated(&gens);
            for choice in [RepChoice::MinIndex, RepChoice::MaxIndex] {
                let t = Transversal::with_choice(&s3, &h, choice);
                assert_eq!(t.reps()[0], s3.identity());
                assert_eq!(t.reps().len() * h.len(), s3.order());
                assert_eq!(t.bar(s3.identity()), s3.identity());
                for x in s3.elements() {
                    assert_eq!(t.bar(t.bar(x)), t.bar(x));
                    for m in h.members() {
                        assert_eq!(t.bar(s3.mul(x, m)), t.bar(x));
                    }
                }
            }
        }
    }
}
