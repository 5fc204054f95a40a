//! The extended twist: units `wt[x,y]` of the whole ring that restrict to the
//! partial twist and satisfy the extended 2-cocycle identity.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::GlobalizationError;
use crate::action::{lift_blocks, select_blocks, TwistedPartialAction, VerifiedAction};
use crate::corestriction::{corestrict, theta_product, w_prime_factor, EquivalenceWitness};
use crate::group::{Elem, RepChoice};
use crate::orbit::{decompose_orbits, restrict_to_orbit, TransitiveStructure};
use crate::report::{Check, Report};
use crate::ring::RingElement;

/// How the transversal and base block of each orbit are picked.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TwistOptions {
    pub choice: RepChoice,
    /// The base block of an orbit is its block at this position (mod the orbit size).
    pub base_offset: usize,
}

/// Data of one orbit, in the coordinates of the orbit's sub-ring.
#[derive(Clone, Debug)]
pub struct OrbitTwist {
    blocks: Vec<usize>,
    structure: TransitiveStructure,
    eps: EquivalenceWitness,
    w_hat: Vec<Vec<RingElement>>,
}

impl OrbitTwist {
    /// Blocks of the full ring making up the orbit, in increasing order.
    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn structure(&self) -> &TransitiveStructure {
        &self.structure
    }

    /// Base block as a block of the full ring.
    pub fn base_block(&self) -> usize {
        self.blocks[self.structure.base_block()]
    }

    /// The corestriction units `eps_x` of the orbit.
    pub fn eps(&self) -> &EquivalenceWitness {
        &self.eps
    }

    /// `prod_{g in Lambda'} theta_{g^-1}(w[g^-1 x s, s^-1 y t])`, a unit of the orbit.
    pub fn w_hat(&self, x: Elem, y: Elem) -> &RingElement {
        &self.w_hat[x][y]
    }

    pub fn w_hat_table(&self) -> &[Vec<RingElement>] {
        &self.w_hat
    }
}

/// `wt[x,y]`, a unit of `A` for every pair, with the per-orbit intermediates.
#[derive(Clone, Debug)]
pub struct ExtendedTwist {
    action: TwistedPartialAction,
    wt: Vec<Vec<RingElement>>,
    orbits: Vec<OrbitTwist>,
}

impl ExtendedTwist {
    pub fn action(&self) -> &TwistedPartialAction {
        &self.action
    }

    pub fn get(&self, x: Elem, y: Elem) -> &RingElement {
        &self.wt[x][y]
    }

    pub fn table(&self) -> &[Vec<RingElement>] {
        &self.wt
    }

    pub fn orbits(&self) -> &[OrbitTwist] {
        &self.orbits
    }

    /// The same twist with one value replaced; the orbit data is kept.
    pub fn with_value(&self, x: Elem, y: Elem, v: RingElement) -> Self {
        let mut out = self.clone();
        out.wt[x][y] = v;
        out
    }

    /// Replaces one `w_hat` value of an orbit.
    pub fn with_w_hat(&self, orbit: usize, x: Elem, y: Elem, v: RingElement) -> Self {
        let mut out = self.clone();
        out.orbits[orbit].w_hat[x][y] = v;
        out
    }
}

/// `tilde-alpha_x(a) = alpha_x(a 1_{x^-1}) + 1 - 1_x`: multiplicative and
/// unital on all of `A`, though not additive.
pub fn tilde_alpha(t: &TwistedPartialAction, x: Elem, a: &RingElement) -> RingElement {
    let g = t.group();
    t.alpha(x).apply(&(a * &t.one(g.inv(x)))).extend(t.domain(x))
}

/// `tilde-eps_x = eps_x + 1 - 1_x`.
pub fn tilde_eps(t: &TwistedPartialAction, eps: &EquivalenceWitness, x: Elem) -> RingElement {
    eps.eps(x).extend(t.domain(x))
}

pub fn build_extended_twist(tpa: &VerifiedAction) -> Result<ExtendedTwist, GlobalizationError> {
    build_extended_twist_with(tpa, TwistOptions::default())
}

/// Builds `wt[x,y] = tilde-alpha_x(tilde-eps_y) tilde-eps_x w_hat[x,y] tilde-eps_{xy}^-1`
/// on each orbit and recombines blockwise, then checks the result.
pub fn build_extended_twist_with(tpa: &VerifiedAction, opts: TwistOptions) -> Result<ExtendedTwist, GlobalizationError> {
    let g = tpa.group();
    let ring = tpa.ring();
    let n = g.order();
    let mut wt = vec![vec![ring.zero(); n]; n];
    let mut orbits = Vec::new();
    for orbit in decompose_orbits(tpa).orbits() {
        let (sub, blocks) = restrict_to_orbit(tpa, orbit)?;
        let base = opts.base_offset % blocks.len();
        let ts = TransitiveStructure::with_choice(&sub, base, opts.choice)?;
        let eps = corestrict(&ts)?.epsilon;
        let reps = ts.reps().to_vec();
        let w_hat: Vec<Vec<RingElement>> = g
            .elements()
            .map(|x| g.elements().map(|y| theta_product(&ts, &reps, |r| w_prime_factor(&ts, x, y, r))).collect())
            .collect();
        for x in g.elements() {
            for y in g.elements() {
                let xy = g.mul(x, y);
                let last = tilde_eps(&sub, &eps, xy).inverse().map_err(|e| GlobalizationError::Invariant(e.to_string()))?;
                let local = &(&(&tilde_alpha(&sub, x, &tilde_eps(&sub, &eps, y)) * &tilde_eps(&sub, &eps, x)) * &w_hat[x][y]) * &last;
                wt[x][y] = &wt[x][y] + &lift_blocks(ring, &local, &blocks);
            }
        }
        orbits.push(OrbitTwist { blocks, structure: ts, eps, w_hat });
    }
    let twist = ExtendedTwist { action: (**tpa).clone(), wt, orbits };
    let report = verify_extended_cocycle(tpa, &twist);
    if !report.passed() {
        return Err(GlobalizationError::Invariant(report.to_text()));
    }
    Ok(twist)
}

/// Units, normalization, restriction `wt[x,y] 1_x 1_{xy} = w[x,y]` and the
/// extended cocycle identity over all triples.
pub fn verify_extended_cocycle(tpa: &TwistedPartialAction, wt: &ExtendedTwist) -> Report {
    let g = tpa.group();
    let ring = tpa.ring();
    let mut report = Report::new("extended-twist");
    let mut inverses = vec![vec![None; g.order()]; g.order()];

    let mut units = Check::new("extended-units", "wt[x,y] is a unit of A");
    for x in g.elements() {
        for y in g.elements() {
            let v = wt.get(x, y);
            let inv = ring.check(v).ok().and_then(|_| v.inverse().ok());
            units.record(inv.is_some(), || json!({"x": x, "y": y, "value": format!("{v:?}")}));
            inverses[x][y] = inv;
        }
    }
    report.push(units);

    let mut norm = Check::new("extended-normalization", "wt[1,x] = wt[x,1] = 1");
    let one = ring.one();
    for x in g.elements() {
        for (a, b) in [(g.identity(), x), (x, g.identity())] {
            norm.record(*wt.get(a, b) == one, || json!({"x": a, "y": b, "value": format!("{:?}", wt.get(a, b))}));
        }
    }
    report.push(norm);

    let mut restr = Check::new("extended-restriction", "wt[x,y] 1_x 1_{xy} = w[x,y]");
    for x in g.elements() {
        for y in g.elements() {
            let cut = wt.get(x, y).restrict_to(&tpa.dd(x, g.mul(x, y)));
            restr.record(&cut == tpa.w(x, y), || {
                json!({"x": x, "y": y, "restricted": format!("{cut:?}"), "w": format!("{:?}", tpa.w(x, y))})
            });
        }
    }
    report.push(restr);

    let mut cocycle = Check::new("extended-cocycle", "alpha_x(wt[y,z] 1_{x^-1}) wt[x,yz] = 1_x wt[x,y] wt[xy,z]");
    for x in g.elements() {
        for y in g.elements() {
            for z in g.elements() {
                let lhs = &tpa.alpha(x).apply(&(wt.get(y, z) * &tpa.one(g.inv(x)))) * wt.get(x, g.mul(y, z));
                let rhs = &(&tpa.one(x) * wt.get(x, y)) * wt.get(g.mul(x, y), z);
                cocycle.record(lhs == rhs, || {
                    json!({"x": x, "y": y, "z": z, "lhs": format!("{lhs:?}"), "rhs": format!("{rhs:?}")})
                });
            }
        }
    }
    report.push(cocycle);
    report
}

/// Per orbit: the composition law
/// `alpha_x(1_{x^-1} tilde-alpha_y(a)) = 1_x wt[x,y] tilde-alpha_{xy}(a) wt[x,y]^-1`
/// over sampled `a`, the cocycle law
/// `eps_x^-1 alpha_x(1_{x^-1} w_hat[y,z]) eps_x w_hat[x,yz] = 1_x w_hat[x,y] w_hat[xy,z]`
/// over all triples, and multiplicativity of `tilde-alpha`.
pub fn verify_twolaws(tpa: &VerifiedAction, wt: &ExtendedTwist, bound: u128, seed: u64) -> Result<Report, GlobalizationError> {
    let g = tpa.group();
    let mut report = Report::new("twolaws");
    for (i, orbit) in wt.orbits().iter().enumerate() {
        let set = orbit.blocks.iter().copied().collect();
        let (sub, blocks) = restrict_to_orbit(tpa, &set)?;
        let ring = sub.ring();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i as u64);
        let elems = ring.sample_ideal(&ring.all_blocks(), bound, 32, &mut rng);
        let local = |x: Elem, y: Elem| select_blocks(ring, wt.get(x, y), &blocks);
        let mut part = Report::new("twolaws");

        let mut comp = Check::new("composition", "alpha_x(1_{x^-1} ta_y(a)) = 1_x wt[x,y] ta_{xy}(a) wt[x,y]^-1");
        for x in g.elements() {
            for y in g.elements() {
                let w = local(x, y);
                let Ok(w_inv) = w.inverse() else {
                    comp.fail(json!({"x": x, "y": y, "reason": "wt[x,y] is not a unit"}));
                    continue;
                };
                for a in &elems {
                    let lhs = sub.alpha(x).apply(&(&sub.one(g.inv(x)) * &tilde_alpha(&sub, y, a)));
                    let rhs = &(&(&sub.one(x) * &w) * &tilde_alpha(&sub, g.mul(x, y), a)) * &w_inv;
                    comp.record(lhs == rhs, || {
                        json!({"x": x, "y": y, "a": format!("{a:?}"), "lhs": format!("{lhs:?}"), "rhs": format!("{rhs:?}")})
                    });
                }
            }
        }
        part.push(comp);

        let mut cocycle = Check::new(
            "cocycle2",
            "eps_x^-1 alpha_x(1_{x^-1} w_hat[y,z]) eps_x w_hat[x,yz] = 1_x w_hat[x,y] w_hat[xy,z]",
        );
        for x in g.elements() {
            for y in g.elements() {
                for z in g.elements() {
                    let moved = sub.alpha(x).apply(&(&sub.one(g.inv(x)) * orbit.w_hat(y, z)));
                    let lhs = &(&(orbit.eps.eps_inv(x) * &moved) * orbit.eps.eps(x)) * orbit.w_hat(x, g.mul(y, z));
                    let rhs = &(&sub.one(x) * orbit.w_hat(x, y)) * orbit.w_hat(g.mul(x, y), z);
                    cocycle.record(lhs == rhs, || {
                        json!({"x": x, "y": y, "z": z, "lhs": format!("{lhs:?}"), "rhs": format!("{rhs:?}")})
                    });
                }
            }
        }
        part.push(cocycle);

        let mut mult = Check::new("tilde-multiplicative", "ta_x(ab) = ta_x(a) ta_x(b) and ta_x(1) = 1");
        let few: Vec<&RingElement> = elems.iter().take(64).collect();
        for x in g.elements() {
            mult.record(tilde_alpha(&sub, x, &ring.one()) == ring.one(), || json!({"x": x, "reason": "not unital"}));
            for a in &few {
                for b in &few {
                    let lhs = tilde_alpha(&sub, x, &(*a * *b));
                    let rhs = &tilde_alpha(&sub, x, a) * &tilde_alpha(&sub, x, b);
                    mult.record(lhs == rhs, || json!({"x": x, "a": format!("{a:?}"), "b": format!("{b:?}")}));
                }
            }
        }
        part.push(mult);
        report.extend_prefixed(&format!("orbit{i}/"), part);
    }
    Ok(report)
}

/// Every table of units of `A` satisfying the restriction identity and the
/// extended cocycle identity, found by exhaustive search. Returns `None` when
/// the search space exceeds `limit` tables.
pub fn search_extensions(tpa: &TwistedPartialAction, limit: u128) -> Option<Vec<Vec<Vec<RingElement>>>> {
    let g = tpa.group();
    let ring = tpa.ring();
    let n = g.order();
    let all = ring.all_blocks();
    let count = ring.ideal_cardinality(&all)?;
    if count > 1 << 20 {
        return None;
    }
    let units: Vec<RingElement> = ring.enumerate_ideal(&all).into_iter().filter(|u| u.inverse().is_ok()).collect();
    let pairs: Vec<(Elem, Elem)> = g.elements().flat_map(|x| g.elements().map(move |y| (x, y))).collect();
    let candidates: Vec<Vec<&RingElement>> = pairs
        .iter()
        .map(|&(x, y)| {
            let cut = tpa.dd(x, g.mul(x, y));
            units.iter().filter(|u| &u.restrict_to(&cut) == tpa.w(x, y)).collect()
        })
        .collect();
    let mut space: u128 = 1;
    for c in &candidates {
        space = space.checked_mul(c.len() as u128)?;
        if space > limit {
            return None;
        }
    }
    let holds = |wt: &[Vec<RingElement>]| {
        g.elements().all(|x| {
            g.elements().all(|y| {
                g.elements().all(|z| {
                    let lhs = &tpa.alpha(x).apply(&(&wt[y][z] * &tpa.one(g.inv(x)))) * &wt[x][g.mul(y, z)];
                    lhs == &(&tpa.one(x) * &wt[x][y]) * &wt[g.mul(x, y)][z]
                })
            })
        })
    };
    let mut solutions = Vec::new();
    let mut idx = vec![0usize; pairs.len()];
    if candidates.iter().any(|c| c.is_empty()) {
        return Some(solutions);
    }
    loop {
        let mut wt = vec![vec![ring.zero(); n]; n];
        for (p, &(x, y)) in pairs.iter().enumerate() {
            wt[x][y] = candidates[p][idx[p]].clone();
        }
        if holds(&wt) {
            solutions.push(wt);
        }
        let mut p = 0;
        loop {
            if p == idx.len() {
                return Some(solutions);
            }
            idx[p] += 1;
            if idx[p] < candidates[p].len() {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
    }
}
