//! Equivalence of twisted partial actions over a common ring, the unit-family
//! transform, and the corestriction of a transitive action.

use serde_json::json;
use thiserror::Error;

use crate::action::{ActionError, TwistedPartialAction, VerifiedAction};
use crate::group::Elem;
use crate::orbit::{decompose_orbits, restrict_to_orbit, OrbitError, TransitiveStructure};
use crate::report::{Check, Report};
use crate::ring::{RingElement, RingError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorestrictionError {
    #[error("epsilon at {0} is not a unit of D({0}): {1}")]
    InvalidWitness(Elem, RingError),
    #[error("witness has {got} entries, group has order {expected}")]
    WitnessArity { expected: usize, got: usize },
    #[error("actions do not share group, ring and domains: {0}")]
    DomainMismatch(String),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error("constructed data failed verification:\n{0}")]
    Verification(String),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
}

/// A family `x -> eps_x` of units of `D_x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceWitness {
    eps: Vec<RingElement>,
    inv: Vec<RingElement>,
}

impl EquivalenceWitness {
    pub fn new(tpa: &TwistedPartialAction, eps: Vec<RingElement>) -> Result<Self, CorestrictionError> {
        let n = tpa.group().order();
        if eps.len() != n {
            return Err(CorestrictionError::WitnessArity { expected: n, got: eps.len() });
        }
        let mut inv = Vec::with_capacity(n);
        for (x, e) in eps.iter().enumerate() {
            tpa.ring().check(e).map_err(|err| CorestrictionError::InvalidWitness(x, err))?;
            inv.push(e.try_invert(tpa.domain(x)).map_err(|err| CorestrictionError::InvalidWitness(x, err))?);
        }
        Ok(EquivalenceWitness { eps, inv })
    }

    /// `eps_x = 1_x` for every `x`.
    pub fn identity(tpa: &TwistedPartialAction) -> Self {
        let eps: Vec<RingElement> = tpa.group().elements().map(|x| tpa.one(x)).collect();
        EquivalenceWitness { inv: eps.clone(), eps }
    }

    pub fn eps(&self, x: Elem) -> &RingElement {
        &self.eps[x]
    }

    pub fn eps_inv(&self, x: Elem) -> &RingElement {
        &self.inv[x]
    }

    pub fn values(&self) -> &[RingElement] {
        &self.eps
    }

    /// Witness of the reverse direction: `x -> eps_x^-1`.
    pub fn inverse(&self) -> Self {
        EquivalenceWitness { eps: self.inv.clone(), inv: self.eps.clone() }
    }

    /// `x -> other_x * self_x`: first transform by `self`, then by `other`.
    pub fn then(&self, other: &EquivalenceWitness) -> Self {
        EquivalenceWitness {
            eps: self.eps.iter().zip(&other.eps).map(|(a, b)| b * a).collect(),
            inv: self.inv.iter().zip(&other.inv).map(|(a, b)| a * b).collect(),
        }
    }
}

/// `alpha'_x(a) = eps_x alpha_x(a) eps_x^-1`,
/// `w'[x,y] = eps_x alpha_x(eps_y 1_{x^-1}) w[x,y] eps_{xy}^-1`.
pub fn apply_epsilon(tpa: &TwistedPartialAction, eps: &EquivalenceWitness) -> Result<TwistedPartialAction, CorestrictionError> {
    let g = tpa.group();
    if eps.eps.len() != g.order() {
        return Err(CorestrictionError::WitnessArity { expected: g.order(), got: eps.eps.len() });
    }
    let alpha = g.elements().map(|x| tpa.alpha(x).conjugated_by(eps.eps(x))).collect();
    let twist = g
        .elements()
        .map(|x| {
            g.elements()
                .map(|y| {
                    let moved = tpa.alpha(x).apply(&(eps.eps(y) * &tpa.one(g.inv(x))));
                    (&(&(eps.eps(x) * &moved) * tpa.w(x, y)) * eps.eps_inv(g.mul(x, y)))
                        .restrict_to(&tpa.dd(x, g.mul(x, y)))
                })
                .collect()
        })
        .collect();
    Ok(TwistedPartialAction::new(
        g.clone(),
        tpa.ring().clone(),
        tpa.domains().to_vec(),
        alpha,
        twist,
    )?)
}

/// Checks that `eps` carries `t1` to `t2`.
pub fn check_equivalent(
    t1: &TwistedPartialAction,
    t2: &TwistedPartialAction,
    eps: &EquivalenceWitness,
) -> Result<Report, CorestrictionError> {
    if t1.group() != t2.group() {
        return Err(CorestrictionError::DomainMismatch("groups differ".into()));
    }
    if t1.ring() != t2.ring() {
        return Err(CorestrictionError::DomainMismatch("rings differ".into()));
    }
    if t1.domains() != t2.domains() {
        return Err(CorestrictionError::DomainMismatch("domains differ".into()));
    }
    let g = t1.group();
    let ring = t1.ring();
    let mut report = Report::new("equivalent");
    let mut alpha = Check::new("alpha-transport", "alpha2(x)(a) = eps_x alpha1(x)(a) eps_x^-1 on D(x^-1)");
    for x in g.elements() {
        for a in ring.spanning_set(t1.domain(g.inv(x))) {
            let lhs = t2.alpha(x).apply(&a);
            let rhs = &(eps.eps(x) * &t1.alpha(x).apply(&a)) * eps.eps_inv(x);
            alpha.record(lhs == rhs, || json!({"x": x, "a": format!("{a:?}"), "lhs": format!("{lhs:?}"), "rhs": format!("{rhs:?}")}));
        }
    }
    report.push(alpha);
    let mut twist = Check::new("twist-transport", "w2[x,y] = eps_x alpha1(x)(eps_y 1_{x^-1}) w1[x,y] eps_{xy}^-1");
    for x in g.elements() {
        for y in g.elements() {
            let moved = t1.alpha(x).apply(&(eps.eps(y) * &t1.one(g.inv(x))));
            let rhs = &(&(eps.eps(x) * &moved) * t1.w(x, y)) * eps.eps_inv(g.mul(x, y));
            let lhs = t2.w(x, y);
            twist.record(*lhs == rhs, || json!({"x": x, "y": y, "lhs": format!("{lhs:?}"), "rhs": format!("{rhs:?}")}));
        }
    }
    report.push(twist);
    Ok(report)
}

/// Output of [`corestrict`].
#[derive(Clone, Debug)]
pub struct Corestriction {
    /// The transitive action `alpha'`.
    pub action: VerifiedAction,
    /// `eps_x` as defined by the product formula.
    pub epsilon: EquivalenceWitness,
    /// `w'[x,y]` as defined by the product formula.
    pub w_prime: Vec<Vec<RingElement>>,
    /// Carries the input action to `action`; equal to `epsilon` inverted.
    pub witness: EquivalenceWitness,
}

/// The product `prod_{g in reps} theta_{g^-1}(f(g))` over the listed transversal elements.
pub(crate) fn theta_product(ts: &TransitiveStructure, reps: &[Elem], f: impl Fn(Elem) -> RingElement) -> RingElement {
    let g = ts.action().group();
    let mut acc = ts.action().ring().one();
    for &r in reps {
        acc = &acc * &ts.theta(g.inv(r), &f(r));
    }
    acc
}

/// Inner argument of the `w'` products: `w[g^-1 x s, s^-1 y t]` with
/// `s = bar(x^-1 g)`, `t = bar(y^-1 x^-1 g)`.
pub(crate) fn w_prime_factor(ts: &TransitiveStructure, x: Elem, y: Elem, r: Elem) -> RingElement {
    let t = ts.action();
    let g = t.group();
    let s = ts.bar(g.prod(&[g.inv(x), r]));
    let u = ts.bar(g.prod(&[g.inv(y), g.inv(x), r]));
    t.w(g.prod(&[g.inv(r), x, s]), g.prod(&[g.inv(s), y, u])).clone()
}

/// `w[g^-1, x] * w[g^-1 x s, s^-1]^-1` with `s = bar(x^-1 g)`.
fn epsilon_factor(ts: &TransitiveStructure, x: Elem, r: Elem) -> RingElement {
    let t = ts.action();
    let g = t.group();
    let s = ts.bar(g.prod(&[g.inv(x), r]));
    let (a, b) = (g.prod(&[g.inv(r), x, s]), g.inv(s));
    let inv = t.w_inv(a, b).expect("twist of a verified action is invertible");
    t.w(g.inv(r), x) * &inv
}

/// Corestriction of a transitive action along its transversal.
///
/// `eps_x = 1_x prod_{g in Lambda} theta_{g^-1}(w[g^-1,x] w[g^-1 x s, s^-1]^-1)` and
/// `w'[x,y] = 1_x 1_{xy} prod_{g in Lambda} theta_{g^-1}(w[g^-1 x s, s^-1 y t])`
/// satisfy `w[x,y] = alpha_x(eps_y 1_{x^-1}) eps_x w'[x,y] eps_{xy}^-1`; the
/// resulting action is `alpha'_x = eps_x^-1 alpha_x eps_x` with twist `w'`.
pub fn corestrict(ts: &TransitiveStructure) -> Result<Corestriction, CorestrictionError> {
    let t = ts.action();
    let g = t.group();
    let lambda = ts.lambda().to_vec();
    let eps_values: Vec<RingElement> = g
        .elements()
        .map(|x| &t.one(x) * &theta_product(ts, &lambda, |r| epsilon_factor(ts, x, r)))
        .collect();
    let epsilon = EquivalenceWitness::new(t, eps_values)?;
    let w_prime: Vec<Vec<RingElement>> = g
        .elements()
        .map(|x| {
            g.elements()
                .map(|y| {
                    let e = &t.one(x) * &t.one(g.mul(x, y));
                    &e * &theta_product(ts, &lambda, |r| w_prime_factor(ts, x, y, r))
                })
                .collect()
        })
        .collect();
    let witness = epsilon.inverse();
    let action = apply_epsilon(t, &witness)?;

    let mut problems = Report::new("corestrict");
    problems.push(check_equiv_identity(t, &epsilon, &w_prime));
    let mut same = Check::new("twist-formula", "transformed twist equals the product formula");
    for x in g.elements() {
        for y in g.elements() {
            same.record(action.w(x, y) == &w_prime[x][y], || {
                json!({"x": x, "y": y, "transformed": format!("{:?}", action.w(x, y)), "formula": format!("{:?}", w_prime[x][y])})
            });
        }
    }
    problems.push(same);
    problems.extend(action.verify_axioms());
    if !problems.passed() {
        return Err(CorestrictionError::Verification(problems.to_text()));
    }
    Ok(Corestriction { action: VerifiedAction::trusted(action), epsilon, w_prime, witness })
}

/// Corestricts every orbit of `t` along its default transversal and checks
/// the equivalence identity and the axioms of each result.
pub fn corestriction_report(t: &VerifiedAction) -> Result<Report, CorestrictionError> {
    let mut report = Report::new("corestrict");
    for (i, orbit) in decompose_orbits(t).orbits().iter().enumerate() {
        let (sub, _) = restrict_to_orbit(t, orbit)?;
        let ts = TransitiveStructure::build(&sub, 0)?;
        let cor = corestrict(&ts)?;
        let mut part = Report::new("corestrict");
        part.push(check_equiv_identity(&sub, &cor.epsilon, &cor.w_prime));
        part.extend_prefixed("axioms/", cor.action.verify_axioms());
        let mut twin = check_equivalent(&sub, &cor.action, &cor.witness)?;
        twin.command = "corestrict".into();
        part.extend(twin);
        report.extend_prefixed(&format!("orbit{i}/"), part);
    }
    Ok(report)
}

/// `w[x,y] = alpha_x(eps_y 1_{x^-1}) eps_x w'[x,y] eps_{xy}^-1` for all pairs.
pub fn check_equiv_identity(t: &TwistedPartialAction, eps: &EquivalenceWitness, w_prime: &[Vec<RingElement>]) -> Check {
    let g = t.group();
    let mut c = Check::new("corestriction-identity", "w[x,y] = alpha_x(eps_y 1_{x^-1}) eps_x w'[x,y] eps_{xy}^-1");
    for x in g.elements() {
        for y in g.elements() {
            let moved = t.alpha(x).apply(&(eps.eps(y) * &t.one(g.inv(x))));
            let rhs = &(&(&moved * eps.eps(x)) * &w_prime[x][y]) * eps.eps_inv(g.mul(x, y));
            c.record(t.w(x, y) == &rhs, || json!({"x": x, "y": y, "w": format!("{:?}", t.w(x, y)), "rhs": format!("{rhs:?}")}));
        }
    }
    c
}
