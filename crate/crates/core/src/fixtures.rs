//! Bundled example actions and single-mutation negatives.
//!
//! Every positive fixture passes the exhaustive axiom verifier; the unit
//! tests of this module check that, and that each negative fails the named
//! check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::action::{PartialIso, TwistedGlobalAction, TwistedPartialAction};
use crate::corestriction::{apply_epsilon, EquivalenceWitness};
use crate::group::FiniteGroup;
use crate::ring::{BlockMatrix, BlockSet, BlockType, ProductRing, RingElement};

fn set(items: &[usize]) -> BlockSet {
    items.iter().copied().collect()
}

fn m2f3() -> BlockType {
    BlockType::new(2, 3, 1)
}

fn mat(rows: &[[i64; 2]; 2]) -> BlockMatrix {
    BlockMatrix::from_rows(m2f3(), &[rows[0].to_vec(), rows[1].to_vec()]).unwrap()
}

/// Twist `w[g,h] = 1_g 1_{gh}`.
fn idempotent_twist(g: &FiniteGroup, ring: &ProductRing, d: &[BlockSet]) -> Vec<Vec<RingElement>> {
    g.elements()
        .map(|x| g.elements().map(|y| ring.idempotent(&d[x].intersection(&d[g.mul(x, y)]))).collect())
        .collect()
}

/// `C_3` shifting the blocks of `Z_2^3` cyclically (`i -> i + g`), untwisted.
pub fn shift_global_z2_cubed() -> TwistedGlobalAction {
    let ring = ProductRing::new(vec![BlockType::new(1, 2, 1); 3]);
    let perms: Vec<Vec<usize>> = (0..3).map(|g| (0..3).map(|i| (i + g) % 3).collect()).collect();
    TwistedGlobalAction::new(TwistedPartialAction::permutation_action(FiniteGroup::cyclic(3), ring, &perms).unwrap()).unwrap()
}

/// Untwisted transitive partial action of `C_3` on `Z_2 x Z_2`:
/// `D_1 = {1}`, `D_2 = {0}`, `alpha_1` moves block 0 to block 1.
pub fn fix_a() -> TwistedPartialAction {
    let g = FiniteGroup::cyclic(3);
    let ring = ProductRing::new(vec![BlockType::new(1, 2, 1); 2]);
    let d = vec![set(&[0, 1]), set(&[1]), set(&[0])];
    let alpha = vec![
        PartialIso::identity(&ring, &d[0]),
        PartialIso::permutation(&ring, &[(0, 1)]).unwrap(),
        PartialIso::permutation(&ring, &[(1, 0)]).unwrap(),
    ];
    let w = idempotent_twist(&g, &ring, &d);
    TwistedPartialAction::new(g, ring, d, alpha, w).unwrap()
}

/// Global action of `C_2` on `Z_5` with trivial `alpha` and `w[g,g] = 2`.
pub fn fix_b() -> TwistedPartialAction {
    let g = FiniteGroup::cyclic(2);
    let ring = ProductRing::new(vec![BlockType::new(1, 5, 1)]);
    let t = TwistedPartialAction::trivial(g, ring.clone());
    t.with_twist(1, 1, ring.scalar(2))
}

/// `C_2` on `Z_5 x Z_5` with `D_g = {0}`, identity `alpha_g` and `w[g,g] = (2, 0)`.
pub fn fix_c() -> TwistedPartialAction {
    let g = FiniteGroup::cyclic(2);
    let ring = ProductRing::new(vec![BlockType::new(1, 5, 1); 2]);
    let d = vec![set(&[0, 1]), set(&[0])];
    let alpha = vec![PartialIso::identity(&ring, &d[0]), PartialIso::identity(&ring, &d[1])];
    let mut w = idempotent_twist(&g, &ring, &d);
    w[1][1] = ring.embed_block(0, BlockMatrix::scalar(ring.block(0), 2));
    TwistedPartialAction::new(g, ring, d, alpha, w).unwrap()
}

/// `C_2` on `Z_5^3` swapping blocks 1 and 2 with `u[g,g] = (2, 1, 1)`.
pub fn swap_global_z5_cubed() -> TwistedGlobalAction {
    let ring = ProductRing::new(vec![BlockType::new(1, 5, 1); 3]);
    let t = TwistedPartialAction::permutation_action(FiniteGroup::cyclic(2), ring.clone(), &[vec![0, 1, 2], vec![0, 2, 1]]).unwrap();
    let mut u = ring.one();
    u.set_block(0, BlockMatrix::scalar(ring.block(0), 2));
    TwistedGlobalAction::new(t.with_twist(1, 1, u)).unwrap()
}

/// `C_6` acting on `Z_2 x Z_2 x Z_5`: through `C_6 -> C_3` as [`fix_a`] on the
/// first two blocks and through `C_6 -> C_2` as [`fix_b`] on the last one.
pub fn fix_d() -> TwistedPartialAction {
    let g = FiniteGroup::cyclic(6);
    let (a, b) = (fix_a(), fix_b());
    let ring = a.ring().product(b.ring());
    let d: Vec<BlockSet> = g
        .elements()
        .map(|x| {
            let mut s = a.domain(x % 3).clone();
            s.insert(2);
            s
        })
        .collect();
    let alpha = g
        .elements()
        .map(|x| {
            let mut maps: Vec<(usize, usize, BlockMatrix)> = a
                .alpha(x % 3)
                .block_isos()
                .iter()
                .map(|i| (i.source, i.target, i.conjugator().clone()))
                .collect();
            maps.push((2, 2, BlockMatrix::identity(ring.block(2))));
            PartialIso::new(&ring, maps).unwrap()
        })
        .collect();
    let w = g
        .elements()
        .map(|x| {
            g.elements()
                .map(|y| {
                    let wa = a.w(x % 3, y % 3);
                    let wb = b.w(x % 2, y % 2);
                    ring.from_blocks(vec![wa.block(0).clone(), wa.block(1).clone(), wb.block(0).clone()]).unwrap()
                })
                .collect()
        })
        .collect();
    TwistedPartialAction::new(g, ring, d, alpha, w).unwrap()
}

/// `C_2` on `M_2(F_3)`: `alpha_g` is conjugation by `[[0,1],[2,0]]`, `w[g,g] = 2I`.
pub fn fix_e() -> TwistedPartialAction {
    let g = FiniteGroup::cyclic(2);
    let ring = ProductRing::new(vec![m2f3()]);
    let s = mat(&[[0, 1], [2, 0]]);
    let t = TwistedPartialAction::trivial(g, ring.clone());
    t.with_alpha(1, PartialIso::new(&ring, vec![(0, 0, s)]).unwrap())
        .with_twist(1, 1, ring.scalar(2))
}

/// `C_2` on `M_2(F_3)`: `alpha_g` is conjugation by `t = [[1,1],[0,1]]` and
/// `w[g,g] = t^2`, a non-central twist.
pub fn fix_f() -> TwistedPartialAction {
    let g = FiniteGroup::cyclic(2);
    let ring = ProductRing::new(vec![m2f3()]);
    let t = mat(&[[1, 1], [0, 1]]);
    let tt = t.mul(&t);
    TwistedPartialAction::trivial(g, ring.clone())
        .with_alpha(1, PartialIso::new(&ring, vec![(0, 0, t)]).unwrap())
        .with_twist(1, 1, ring.embed_block(0, tt))
}

/// [`fix_e`] with `alpha_g` replaced by conjugation by `[[1,1],[0,1]]`, keeping
/// `w[g,g] = 2I`; `alpha_g^2` is no longer inner by the twist.
pub fn fix_e_alpha_mutated() -> TwistedPartialAction {
    let e = fix_e();
    let ring = e.ring().clone();
    e.with_alpha(1, PartialIso::new(&ring, vec![(0, 0, mat(&[[1, 1], [0, 1]]))]).unwrap())
}

/// Partial version of [`fix_f`] on `M_2(F_3)^2` with `D_g` the first block.
pub fn fix_g() -> TwistedPartialAction {
    let g = FiniteGroup::cyclic(2);
    let ring = ProductRing::new(vec![m2f3(); 2]);
    let t = mat(&[[1, 1], [0, 1]]);
    let tt = t.mul(&t);
    let d = vec![set(&[0, 1]), set(&[0])];
    let alpha = vec![PartialIso::identity(&ring, &d[0]), PartialIso::new(&ring, vec![(0, 0, t)]).unwrap()];
    let mut w = idempotent_twist(&g, &ring, &d);
    w[1][1] = ring.embed_block(0, tt);
    TwistedPartialAction::new(g, ring, d, alpha, w).unwrap()
}

/// Random unit of `1_S A`.
pub fn random_unit<R: Rng>(ring: &ProductRing, s: &BlockSet, rng: &mut R) -> RingElement {
    loop {
        let x = ring.random_element(s, rng);
        if x.try_invert(s).is_ok() {
            return x;
        }
    }
}

/// Seeded random unit family `x -> eps_x` of `D_x`, with `eps_1 = 1`.
pub fn random_witness(t: &TwistedPartialAction, seed: u64) -> EquivalenceWitness {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = t.group();
    let eps = g
        .elements()
        .map(|x| if x == g.identity() { t.one(x) } else { random_unit(t.ring(), t.domain(x), &mut rng) })
        .collect();
    EquivalenceWitness::new(t, eps).unwrap()
}

/// `S_3` permuting the blocks of `Z_5^3`, twisted by a seeded random unit family.
pub fn s3_global_twisted() -> TwistedGlobalAction {
    let g = FiniteGroup::symmetric3();
    let ring = ProductRing::new(vec![BlockType::new(1, 5, 1); 3]);
    let perms: Vec<Vec<usize>> = g.elements().map(|x| (0..3).map(|i| s3_image(&g, x, i)).collect()).collect();
    let base = TwistedPartialAction::permutation_action(g.clone(), ring.clone(), &perms).unwrap();
    let eps = random_witness(&base, 2024);
    TwistedGlobalAction::new(apply_epsilon(&base, &eps).unwrap()).unwrap()
}

/// Image of letter `i` under the permutation numbered `x` in [`FiniteGroup::symmetric3`].
fn s3_image(g: &FiniteGroup, x: usize, i: usize) -> usize {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];
    debug_assert_eq!(g.order(), 6);
    PERMS[x][i]
}

/// Restriction of [`s3_global_twisted`] to its first two blocks; the
/// stabilizer of a block has order 2.
pub fn s3_partial() -> TwistedPartialAction {
    crate::action::restrict(&s3_global_twisted(), &set(&[0, 1])).unwrap()
}

/// A positive fixture with its name.
pub fn positives() -> Vec<(&'static str, TwistedPartialAction)> {
    vec![
        ("fix-a", fix_a()),
        ("fix-b", fix_b()),
        ("fix-c", fix_c()),
        ("fix-d", fix_d()),
        ("fix-e", fix_e()),
        ("fix-f", fix_f()),
        ("fix-g", fix_g()),
        ("s3-partial", s3_partial()),
    ]
}

/// A mutated action and the checks it must fail.
pub struct Negative {
    pub name: &'static str,
    pub action: TwistedPartialAction,
    pub fails: &'static [&'static str],
}

/// Single mutations of passing actions, each breaking a named check.
pub fn negatives() -> Vec<Negative> {
    let mut out = Vec::new();
    let c = fix_c();
    out.push(Negative {
        name: "fix-c/zero-twist",
        action: c.with_twist(1, 1, c.ring().zero()),
        fails: &["twist-invertible", "composition"],
    });
    let mut outside = c.w(1, 1).clone();
    outside.set_block(1, BlockMatrix::scalar(c.ring().block(1), 1));
    out.push(Negative {
        name: "fix-c/twist-outside-domain",
        action: c.with_twist(1, 1, outside),
        fails: &["structure"],
    });
    let e = fix_e();
    out.push(Negative {
        name: "fix-e/identity-acts",
        action: e.with_alpha(0, e.alpha(1).clone()),
        fails: &["unit-identity"],
    });
    out.push(Negative {
        name: "fix-e/non-central-twist",
        action: e.with_twist(1, 1, e.ring().embed_block(0, mat(&[[1, 1], [0, 1]]))),
        fails: &["composition"],
    });
    out.push(Negative {
        name: "fix-e/alpha-mutated",
        action: fix_e_alpha_mutated(),
        fails: &["composition"],
    });
    let b = fix_b();
    out.push(Negative {
        name: "fix-b/unnormalized",
        action: b.with_twist(0, 1, b.ring().scalar(2)),
        fails: &["normalization"],
    });
    let a = fix_a();
    out.push(Negative {
        name: "fix-a/domain-grown",
        action: a.with_domain(1, set(&[0, 1])),
        fails: &["structure"],
    });
    out.push(Negative {
        name: "fix-a/twist-zeroed",
        action: a.with_twist(1, 2, a.ring().zero()),
        fails: &["twist-invertible"],
    });
    // C_3 on Z_5, trivial alpha, w[1,1] = 2: the cocycle identity fails at (1,1,2).
    let c3 = TwistedPartialAction::trivial(FiniteGroup::cyclic(3), ProductRing::new(vec![BlockType::new(1, 5, 1)]));
    out.push(Negative {
        name: "c3-z5/non-cocycle",
        action: c3.with_twist(1, 1, c3.ring().scalar(2)),
        fails: &["cocycle", "cocycle-elementwise"],
    });
    // C_3 on Z_2^3 with D_1 = {0,1}, D_2 = {1,2}, alpha_1: 1 -> 0, 2 -> 1.
    let g3 = FiniteGroup::cyclic(3);
    let r3 = ProductRing::new(vec![BlockType::new(1, 2, 1); 3]);
    let d = vec![set(&[0, 1, 2]), set(&[0, 1]), set(&[1, 2])];
    let alpha = vec![
        PartialIso::identity(&r3, &d[0]),
        PartialIso::permutation(&r3, &[(1, 0), (2, 1)]).unwrap(),
        PartialIso::permutation(&r3, &[(0, 1), (1, 2)]).unwrap(),
    ];
    let w = idempotent_twist(&g3, &r3, &d);
    out.push(Negative {
        name: "c3-z2/domains-not-transported",
        action: TwistedPartialAction::new(g3, r3, d, alpha, w).unwrap(),
        fails: &["domain-transport", "idempotent-transport"],
    });
    let dd = fix_d();
    let mut wd = dd.w(1, 1).clone();
    wd.set_block(2, BlockMatrix::scalar(dd.ring().block(2), 3));
    out.push(Negative {
        name: "fix-d/twist-changed-on-one-block",
        action: dd.with_twist(1, 1, wd),
        fails: &["cocycle"],
    });
    let f = fix_f();
    out.push(Negative {
        name: "fix-f/twist-dropped",
        action: f.with_twist(1, 1, f.ring().one()),
        fails: &["composition"],
    });
    let gg = fix_g();
    out.push(Negative {
        name: "fix-g/conjugator-dropped",
        action: gg.with_alpha(1, gg.alpha(1).without_conjugators(gg.ring(), &set(&[0]))),
        fails: &["composition"],
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positives_pass() {
        for (name, t) in positives() {
            let r = t.verify_axioms();
            assert!(r.passed(), "{name}\n{}", r.to_text());
        }
        for b in [shift_global_z2_cubed(), swap_global_z5_cubed(), s3_global_twisted()] {
            assert!(b.verify_axioms().passed());
        }
    }

    #[test]
    fn negatives_fail_where_named() {
        let list = negatives();
        assert!(list.len() >= 10);
        for n in list {
            let r = n.action.verify_axioms();
            for c in n.fails {
                let check = r.check(c).unwrap_or_else(|| panic!("{}: no check {c}", n.name));
                assert!(!check.passed(), "{} should fail {c}\n{}", n.name, r.to_text());
                assert!(check.witness.is_some());
            }
        }
    }

    #[test]
    fn fix_e_twist_squares() {
        let s = mat(&[[0, 1], [2, 0]]);
        assert_eq!(s.mul(&s), BlockMatrix::scalar(m2f3(), 2));
    }
}
