//! Twisted partial actions of a finite group on a block-product ring, the
//! exhaustive axiom verifier, and restriction of actions to unital ideals.

use std::ops::Deref;

use serde_json::json;
use thiserror::Error;

use crate::group::{Elem, FiniteGroup};
use crate::report::{Check, Report};
use crate::ring::{BlockEmbedding, BlockIso, BlockMatrix, BlockSet, ProductRing, RingElement, RingError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ActionError {
    #[error("ring error: {0}")]
    Ring(#[from] RingError),
    #[error("block map is not a bijection {domain:?} -> {codomain:?}: {detail}")]
    NotBijective { domain: BlockSet, codomain: BlockSet, detail: String },
    #[error("expected {expected} entries for {what}, got {got}")]
    Arity { what: &'static str, expected: usize, got: usize },
    #[error("action is not global")]
    NotGlobal,
    #[error("block {0} is out of range")]
    BlockOutOfRange(usize),
}

/// A ring isomorphism between two direct-factor ideals, given blockwise.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartialIso {
    domain: BlockSet,
    codomain: BlockSet,
    /// Sorted by source block.
    isos: Vec<BlockIso>,
}

impl PartialIso {
    /// `maps` lists `(source, target, conjugator)`; sources must cover `domain`
    /// and targets `codomain`, each exactly once.
    pub fn new(ring: &ProductRing, maps: Vec<(usize, usize, BlockMatrix)>) -> Result<Self, ActionError> {
        let mut isos = Vec::with_capacity(maps.len());
        for (s, t, c) in maps {
            if s >= ring.num_blocks() {
                return Err(ActionError::BlockOutOfRange(s));
            }
            if t >= ring.num_blocks() {
                return Err(ActionError::BlockOutOfRange(t));
            }
            isos.push(BlockIso::new(ring, s, t, c)?);
        }
        isos.sort_by_key(|i| i.source);
        let domain: BlockSet = isos.iter().map(|i| i.source).collect();
        let codomain: BlockSet = isos.iter().map(|i| i.target).collect();
        if domain.len() != isos.len() || codomain.len() != isos.len() {
            return Err(ActionError::NotBijective {
                domain,
                codomain,
                detail: "repeated source or target block".into(),
            });
        }
        Ok(PartialIso { domain, codomain, isos })
    }

    /// Identity on the ideal `1_S A`.
    pub fn identity(ring: &ProductRing, s: &BlockSet) -> Self {
        PartialIso {
            domain: s.clone(),
            codomain: s.clone(),
            isos: s.iter().map(|i| BlockIso::identity(ring, i)).collect(),
        }
    }

    /// Moves blocks according to `perm` (source -> target) with trivial conjugators.
    pub fn permutation(ring: &ProductRing, perm: &[(usize, usize)]) -> Result<Self, ActionError> {
        Self::new(
            ring,
            perm.iter()
                .map(|&(s, t)| (s, t, BlockMatrix::identity(ring.block(t))))
                .collect(),
        )
    }

    pub fn domain(&self) -> &BlockSet {
        &self.domain
    }

    pub fn codomain(&self) -> &BlockSet {
        &self.codomain
    }

    pub fn block_isos(&self) -> &[BlockIso] {
        &self.isos
    }

    pub fn map_block(&self, src: usize) -> Option<usize> {
        self.isos.iter().find(|i| i.source == src).map(|i| i.target)
    }

    pub fn preimage_block(&self, tgt: usize) -> Option<usize> {
        self.isos.iter().find(|i| i.target == tgt).map(|i| i.source)
    }

    /// Image of the blocks of `s` that lie in the domain.
    pub fn image_blocks(&self, s: &BlockSet) -> BlockSet {
        self.isos
            .iter()
            .filter(|i| s.contains(i.source))
            .map(|i| i.target)
            .collect()
    }

    /// Applies the map to `a * 1_domain`.
    pub fn apply(&self, a: &RingElement) -> RingElement {
        let mut out = a.restrict_to(&BlockSet::empty());
        for iso in &self.isos {
            out.set_block(iso.target, iso.apply(a.block(iso.source)));
        }
        out
    }

    /// Applies the inverse map to `a * 1_codomain`.
    pub fn apply_inverse(&self, a: &RingElement) -> RingElement {
        let mut out = a.restrict_to(&BlockSet::empty());
        for iso in &self.isos {
            out.set_block(iso.source, iso.apply_inverse(a.block(iso.target)));
        }
        out
    }

    pub fn inverse(&self) -> PartialIso {
        let mut isos: Vec<BlockIso> = self.isos.iter().map(|i| i.inverse()).collect();
        isos.sort_by_key(|i| i.source);
        PartialIso {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            isos,
        }
    }

    /// `a -> e * self(a) * e^-1` for a unit `e` of the codomain.
    pub fn conjugated_by(&self, e: &RingElement) -> PartialIso {
        PartialIso {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            isos: self.isos.iter().map(|i| i.conjugated_by(e.block(i.target))).collect(),
        }
    }

    /// `self` with every conjugator at target `t` replaced by the identity when
    /// `t` is in `blocks`. Used to forge negative fixtures.
    pub fn without_conjugators(&self, ring: &ProductRing, blocks: &BlockSet) -> PartialIso {
        PartialIso {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            isos: self
                .isos
                .iter()
                .map(|i| {
                    if blocks.contains(i.target) {
                        BlockIso::new(ring, i.source, i.target, BlockMatrix::identity(ring.block(i.target))).unwrap()
                    } else {
                        i.clone()
                    }
                })
                .collect(),
        }
    }
}

/// The triple `(D, alpha, w)` over a product ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistedPartialAction {
    group: FiniteGroup,
    ring: ProductRing,
    domains: Vec<BlockSet>,
    alpha: Vec<PartialIso>,
    twist: Vec<Vec<RingElement>>,
}

impl TwistedPartialAction {
    /// Checks arities and element shapes only; semantics are checked by
    /// [`TwistedPartialAction::verify_axioms`].
    pub fn new(
        group: FiniteGroup,
        ring: ProductRing,
        domains: Vec<BlockSet>,
        alpha: Vec<PartialIso>,
        twist: Vec<Vec<RingElement>>,
    ) -> Result<Self, ActionError> {
        let n = group.order();
        for (what, got) in [("domains", domains.len()), ("alpha", alpha.len()), ("twist rows", twist.len())] {
            if got != n {
                return Err(ActionError::Arity { what, expected: n, got });
            }
        }
        for d in &domains {
            if let Some(m) = d.max_index() {
                if m >= ring.num_blocks() {
                    return Err(ActionError::BlockOutOfRange(m));
                }
            }
        }
        for row in &twist {
            if row.len() != n {
                return Err(ActionError::Arity { what: "twist columns", expected: n, got: row.len() });
            }
            for w in row {
                ring.check(w)?;
            }
        }
        Ok(TwistedPartialAction { group, ring, domains, alpha, twist })
    }

    /// The trivial global action: every element acts as the identity, no twist.
    pub fn trivial(group: FiniteGroup, ring: ProductRing) -> Self {
        let n = group.order();
        let all = ring.all_blocks();
        TwistedPartialAction {
            domains: vec![all.clone(); n],
            alpha: vec![PartialIso::identity(&ring, &all); n],
            twist: vec![vec![ring.one(); n]; n],
            group,
            ring,
        }
    }

    /// A global action by block permutations `perms[g]` (as source -> target maps), untwisted.
    pub fn permutation_action(group: FiniteGroup, ring: ProductRing, perms: &[Vec<usize>]) -> Result<Self, ActionError> {
        let n = group.order();
        let alpha = perms
            .iter()
            .map(|p| PartialIso::permutation(&ring, &p.iter().enumerate().map(|(s, &t)| (s, t)).collect::<Vec<_>>()))
            .collect::<Result<Vec<_>, _>>()?;
        let all = ring.all_blocks();
        Self::new(group, ring.clone(), vec![all; n], alpha, vec![vec![ring.one(); n]; n])
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn ring(&self) -> &ProductRing {
        &self.ring
    }

    pub fn domain(&self, g: Elem) -> &BlockSet {
        &self.domains[g]
    }

    pub fn domains(&self) -> &[BlockSet] {
        &self.domains
    }

    pub fn alpha(&self, g: Elem) -> &PartialIso {
        &self.alpha[g]
    }

    pub fn alphas(&self) -> &[PartialIso] {
        &self.alpha
    }

    pub fn w(&self, g: Elem, h: Elem) -> &RingElement {
        &self.twist[g][h]
    }

    pub fn twist(&self) -> &[Vec<RingElement>] {
        &self.twist
    }

    /// Unity `1_g` of `D_g`.
    pub fn one(&self, g: Elem) -> RingElement {
        self.ring.idempotent(&self.domains[g])
    }

    /// `D_g D_h` as a block set.
    pub fn dd(&self, g: Elem, h: Elem) -> BlockSet {
        self.domains[g].intersection(&self.domains[h])
    }

    /// Inverse of `w[g,h]` inside `D_g D_gh`.
    pub fn w_inv(&self, g: Elem, h: Elem) -> Result<RingElement, RingError> {
        self.twist[g][h].try_invert(&self.dd(g, self.group.mul(g, h)))
    }

    pub fn is_global(&self) -> bool {
        let all = self.ring.all_blocks();
        self.domains.iter().all(|d| *d == all)
    }

    pub fn with_twist(&self, g: Elem, h: Elem, w: RingElement) -> Self {
        let mut out = self.clone();
        out.twist[g][h] = w;
        out
    }

    pub fn with_alpha(&self, g: Elem, alpha: PartialIso) -> Self {
        let mut out = self.clone();
        out.alpha[g] = alpha;
        out
    }

    pub fn with_domain(&self, g: Elem, d: BlockSet) -> Self {
        let mut out = self.clone();
        out.domains[g] = d;
        out
    }

    /// Exhaustive check of the twisted partial action axioms.
    ///
    /// Equations quantified over ring elements are checked on an additive
    /// spanning set of the relevant ideal; both sides are additive there.
    pub fn verify_axioms(&self) -> Report {
        let g = &self.group;
        let ring = &self.ring;
        let mut report = Report::new("validate");
        let elems: Vec<Elem> = g.elements().collect();

        let mut structure = Check::new("structure", "alpha maps D(g^-1) onto D(g); w supported on D(g)D(gh)");
        for &x in &elems {
            let a = &self.alpha[x];
            structure.record(a.domain() == &self.domains[g.inv(x)] && a.codomain() == &self.domains[x], || {
                json!({"g": x, "domain": a.domain(), "codomain": a.codomain(),
                       "expected_domain": self.domains[g.inv(x)], "expected_codomain": self.domains[x]})
            });
            for &y in &elems {
                let s = self.dd(x, g.mul(x, y));
                structure.record(self.twist[x][y].vanishes_outside(&s), || {
                    json!({"g": x, "h": y, "w": format!("{:?}", self.twist[x][y]), "support": s})
                });
            }
        }
        report.push(structure);

        let mut invertible = Check::new("twist-invertible", "w[g,h] is a unit of D(g)D(gh)");
        for &x in &elems {
            for &y in &elems {
                let r = self.w_inv(x, y);
                invertible.record(r.is_ok(), || json!({"g": x, "h": y, "error": format!("{:?}", r.as_ref().err())}));
            }
        }
        report.push(invertible);

        let mut ideals = Check::new("domains", "each D(g) is idempotent and D(g)D(h) = D(h)D(g)");
        for &x in &elems {
            let ex = self.one(x);
            ideals.record(&ex * &ex == ex, || json!({"g": x}));
            for &y in &elems {
                let ey = self.one(y);
                ideals.record(&ex * &ey == &ey * &ex, || json!({"g": x, "h": y}));
            }
        }
        report.push(ideals);

        let mut unit = Check::new("unit-identity", "D(1) = A and alpha(1) is the identity");
        let e = g.identity();
        unit.record(self.domains[e] == ring.all_blocks(), || json!({"D1": self.domains[e]}));
        for a in ring.spanning_set(&ring.all_blocks()) {
            let img = self.alpha[e].apply(&a);
            unit.record(img == a, || json!({"a": format!("{a:?}"), "alpha_1(a)": format!("{img:?}")}));
        }
        report.push(unit);

        let mut transport = Check::new("domain-transport", "alpha(g)(D(g^-1)D(h)) = D(g)D(gh)");
        for &x in &elems {
            for &y in &elems {
                let src = self.dd(g.inv(x), y);
                let img = self.alpha[x].image_blocks(&src);
                let expect = self.dd(x, g.mul(x, y));
                transport.record(img == expect && src.is_subset(self.alpha[x].domain()), || {
                    json!({"g": x, "h": y, "image": img, "expected": expect})
                });
            }
        }
        report.push(transport);

        let mut composition = Check::new("composition", "alpha(g)alpha(h)(a) = w[g,h] alpha(gh)(a) w[g,h]^-1 on D(h^-1)D(h^-1 g^-1)");
        for &x in &elems {
            for &y in &elems {
                let xy = g.mul(x, y);
                let s = self.dd(g.inv(y), g.inv(xy));
                let winv = self.w_inv(x, y).unwrap_or_else(|_| ring.zero());
                for a in ring.spanning_set(&s) {
                    let lhs = self.alpha[x].apply(&self.alpha[y].apply(&a));
                    let rhs = &(&self.twist[x][y] * &self.alpha[xy].apply(&a)) * &winv;
                    composition.record(lhs == rhs, || {
                        json!({"g": x, "h": y, "a": format!("{a:?}"), "lhs": format!("{lhs:?}"), "rhs": format!("{rhs:?}")})
                    });
                }
            }
        }
        report.push(composition);

        let mut normalization = Check::new("normalization", "w[1,g] = w[g,1] = 1_g");
        for &x in &elems {
            let ex = self.one(x);
            normalization.record(self.twist[e][x] == ex, || json!({"pair": [e, x], "w": format!("{:?}", self.twist[e][x])}));
            normalization.record(self.twist[x][e] == ex, || json!({"pair": [x, e], "w": format!("{:?}", self.twist[x][e])}));
        }
        report.push(normalization);

        let mut cocycle = Check::new("cocycle", "alpha(x)(1_{x^-1} w[y,z]) w[x,yz] = w[x,y] w[xy,z]");
        let mut cocycle_elementwise = Check::new(
            "cocycle-elementwise",
            "alpha(g)(a w[h,t]) w[g,ht] = alpha(g)(a) w[g,h] w[gh,t] on D(g^-1)D(h)D(ht)",
        );
        for &x in &elems {
            for &y in &elems {
                for &z in &elems {
                    let (xy, yz) = (g.mul(x, y), g.mul(y, z));
                    let lhs = &self.alpha[x].apply(&(&self.one(g.inv(x)) * &self.twist[y][z])) * &self.twist[x][yz];
                    let rhs = &self.twist[x][y] * &self.twist[xy][z];
                    cocycle.record(lhs == rhs, || {
                        json!({"x": x, "y": y, "z": z, "lhs": format!("{lhs:?}"), "rhs": format!("{rhs:?}")})
                    });
                    let s = self.domains[g.inv(x)].intersection(&self.domains[y]).intersection(&self.domains[yz]);
                    for a in ring.spanning_set(&s) {
                        let l = &self.alpha[x].apply(&(&a * &self.twist[y][z])) * &self.twist[x][yz];
                        let r = &(&self.alpha[x].apply(&a) * &self.twist[x][y]) * &self.twist[xy][z];
                        cocycle_elementwise.record(l == r, || json!({"g": x, "h": y, "t": z, "a": format!("{a:?}")}));
                    }
                }
            }
        }
        report.push(cocycle);
        report.push(cocycle_elementwise);

        let mut idem = Check::new("idempotent-transport", "alpha(g)(1_{g^-1} 1_h) = 1_g 1_gh");
        for &x in &elems {
            for &y in &elems {
                let lhs = self.alpha[x].apply(&(&self.one(g.inv(x)) * &self.one(y)));
                let rhs = &self.one(x) * &self.one(g.mul(x, y));
                idem.record(lhs == rhs, || json!({"g": x, "h": y}));
            }
        }
        report.push(idem);
        report
    }

    /// Runs the axiom verifier and wraps the action on success.
    pub fn verified(self) -> Result<VerifiedAction, Report> {
        let report = self.verify_axioms();
        if report.passed() {
            Ok(VerifiedAction(self))
        } else {
            Err(report)
        }
    }

    /// Restriction to the ideal `1_S A`, re-indexed onto the blocks of `S` in
    /// increasing order: `D'_x = S cap alpha_x(S cap D_{x^-1})`,
    /// `w'[x,y] = w[x,y] 1'_x 1'_{xy}`.
    pub fn restrict_to_blocks(&self, s: &BlockSet) -> Result<TwistedPartialAction, ActionError> {
        if let Some(m) = s.max_index() {
            if m >= self.ring.num_blocks() {
                return Err(ActionError::BlockOutOfRange(m));
            }
        }
        let g = &self.group;
        let blocks: Vec<usize> = s.iter().collect();
        let index = |b: usize| blocks.iter().position(|&x| x == b).unwrap();
        let sub = self.ring.sub_ring(&blocks);
        let new_d: Vec<BlockSet> = g
            .elements()
            .map(|x| {
                let src = s.intersection(&self.domains[g.inv(x)]);
                s.intersection(&self.alpha[x].image_blocks(&src))
            })
            .collect();
        let mut alpha = Vec::with_capacity(g.order());
        for x in g.elements() {
            let dom = &new_d[g.inv(x)];
            let maps = self.alpha[x]
                .block_isos()
                .iter()
                .filter(|i| dom.contains(i.source))
                .map(|i| (index(i.source), index(i.target), i.conjugator().clone()))
                .collect();
            alpha.push(PartialIso::new(&sub, maps)?);
        }
        let reindexed_d: Vec<BlockSet> = new_d.iter().map(|d| d.iter().map(index).collect()).collect();
        let twist = g
            .elements()
            .map(|x| {
                g.elements()
                    .map(|y| {
                        let supp = new_d[x].intersection(&new_d[g.mul(x, y)]);
                        select_blocks(&sub, &self.twist[x][y].restrict_to(&supp), &blocks)
                    })
                    .collect()
            })
            .collect();
        TwistedPartialAction::new(g.clone(), sub, reindexed_d, alpha, twist)
    }

    /// Re-indexes the ring blocks: new block `i` is old block `order[i]`.
    pub fn permute_blocks(&self, order: &[usize]) -> Result<TwistedPartialAction, ActionError> {
        let s: BlockSet = order.iter().copied().collect();
        if s.len() != self.ring.num_blocks() || order.len() != s.len() {
            return Err(ActionError::Arity { what: "block order", expected: self.ring.num_blocks(), got: order.len() });
        }
        let full = self.restrict_to_blocks(&s)?;
        // restrict_to_blocks orders by index; now apply the permutation.
        let pos = |b: usize| order.iter().position(|&x| x == b).unwrap();
        let ring = self.ring.sub_ring(order);
        let map_set = |d: &BlockSet| -> BlockSet { d.iter().map(pos).collect() };
        let domains = full.domains.iter().map(map_set).collect();
        let alpha = full
            .alpha
            .iter()
            .map(|a| {
                PartialIso::new(
                    &ring,
                    a.block_isos().iter().map(|i| (pos(i.source), pos(i.target), i.conjugator().clone())).collect(),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        let twist = full
            .twist
            .iter()
            .map(|row| row.iter().map(|w| select_blocks(&ring, w, order)).collect())
            .collect();
        TwistedPartialAction::new(self.group.clone(), ring, domains, alpha, twist)
    }
}

/// The action on `iso.source()` corresponding to `t` under the ring
/// isomorphism `iso : R -> t.ring()`: `D_x = iso^-1(D'_x)`,
/// `alpha_x = iso^-1 alpha'_x iso`, `w = iso^-1(w')`.
pub fn pull_back(t: &TwistedPartialAction, iso: &BlockEmbedding) -> Result<TwistedPartialAction, ActionError> {
    if iso.target() != t.ring() || !iso.is_bijective() {
        return Err(ActionError::Ring(RingError::RingMismatch("pull back needs an isomorphism onto the action's ring".into())));
    }
    let ring = iso.source().clone();
    let g = t.group();
    let domains: Vec<BlockSet> = t.domains().iter().map(|d| iso.preimage_blocks(d)).collect();
    let alpha = t
        .alphas()
        .iter()
        .map(|a| {
            let maps = a
                .block_isos()
                .iter()
                .map(|bi| {
                    let j = iso.block_preimage(bi.source).expect("bijective");
                    let k = iso.block_preimage(bi.target).expect("bijective");
                    let ck_inv = iso.conjugator(k).inverse().expect("conjugators are units");
                    (j, k, ck_inv.mul(bi.conjugator()).mul(iso.conjugator(j)))
                })
                .collect();
            PartialIso::new(&ring, maps)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let twist = g
        .elements()
        .map(|x| g.elements().map(|y| iso.apply_inverse(t.w(x, y))).collect())
        .collect();
    TwistedPartialAction::new(g.clone(), ring, domains, alpha, twist)
}

/// The action on `iso.target()` corresponding to `t` under `iso : t.ring() -> R`.
pub fn push_forward(t: &TwistedPartialAction, iso: &BlockEmbedding) -> Result<TwistedPartialAction, ActionError> {
    let inv = iso
        .inverse()
        .ok_or_else(|| ActionError::Ring(RingError::RingMismatch("push forward needs an isomorphism".into())))?;
    pull_back(t, &inv)
}

/// The entries of `x` at the listed blocks, as an element of `sub`.
pub fn select_blocks(sub: &ProductRing, x: &RingElement, blocks: &[usize]) -> RingElement {
    sub.from_blocks(blocks.iter().map(|&b| x.block(b).clone()).collect())
        .expect("sub ring matches selected blocks")
}

/// Places an element of a sub-product back into the full ring at `blocks`.
pub fn lift_blocks(full: &ProductRing, x: &RingElement, blocks: &[usize]) -> RingElement {
    let mut out = full.zero();
    for (i, &b) in blocks.iter().enumerate() {
        out.set_block(b, x.block(i).clone());
    }
    out
}

/// An action whose axioms have been verified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifiedAction(TwistedPartialAction);

impl VerifiedAction {
    pub fn into_inner(self) -> TwistedPartialAction {
        self.0
    }

    /// For outputs of constructions whose axioms follow from verified inputs;
    /// callers re-verify in tests.
    pub(crate) fn trusted(tpa: TwistedPartialAction) -> Self {
        VerifiedAction(tpa)
    }
}

impl Deref for VerifiedAction {
    type Target = TwistedPartialAction;
    fn deref(&self) -> &TwistedPartialAction {
        &self.0
    }
}

/// A twisted action with every `D_g = A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistedGlobalAction(TwistedPartialAction);

impl TwistedGlobalAction {
    pub fn new(tpa: TwistedPartialAction) -> Result<Self, ActionError> {
        if tpa.is_global() {
            Ok(TwistedGlobalAction(tpa))
        } else {
            Err(ActionError::NotGlobal)
        }
    }

    pub fn as_partial(&self) -> &TwistedPartialAction {
        &self.0
    }
}

impl Deref for TwistedGlobalAction {
    type Target = TwistedPartialAction;
    fn deref(&self) -> &TwistedPartialAction {
        &self.0
    }
}

/// Restriction of a global action to the unital ideal `1_S B`.
pub fn restrict(global: &TwistedGlobalAction, ideal: &BlockSet) -> Result<TwistedPartialAction, ActionError> {
    global.restrict_to_blocks(ideal)
}

pub fn is_global(tpa: &TwistedPartialAction) -> bool {
    tpa.is_global()
}
