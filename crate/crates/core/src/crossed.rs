//! The crossed product `A *_alpha G = sum_g D_g delta_g` with multiplication
//! `(a delta_g)(b delta_h) = alpha_g(alpha_g^-1(a) b) w[g,h] delta_gh`.

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::action::TwistedPartialAction;
use crate::group::Elem;
use crate::report::{Check, Report};
use crate::ring::RingElement;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CrossedError {
    #[error("crossed element does not belong to this action: {0}")]
    ActionMismatch(String),
}

/// `sum_g c_g delta_g`, one coefficient per group element.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CrossedElement {
    coeffs: Vec<RingElement>,
}

impl CrossedElement {
    pub fn zero(t: &TwistedPartialAction) -> Self {
        CrossedElement { coeffs: vec![t.ring().zero(); t.group().order()] }
    }

    /// `1_A delta_1`.
    pub fn one(t: &TwistedPartialAction) -> Self {
        Self::monomial(t, t.group().identity(), t.ring().one())
    }

    /// `a delta_g`; `a` is cut down to `D_g`.
    pub fn monomial(t: &TwistedPartialAction, g: Elem, a: RingElement) -> Self {
        let mut x = Self::zero(t);
        x.coeffs[g] = a.restrict_to(t.domain(g));
        x
    }

    pub fn from_coeffs(t: &TwistedPartialAction, coeffs: Vec<RingElement>) -> Result<Self, CrossedError> {
        let x = CrossedElement { coeffs };
        check(t, &x)?;
        Ok(x)
    }

    pub fn coeff(&self, g: Elem) -> &RingElement {
        &self.coeffs[g]
    }

    pub fn coeffs(&self) -> &[RingElement] {
        &self.coeffs
    }

    pub fn add(&self, other: &CrossedElement) -> CrossedElement {
        CrossedElement { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect() }
    }
}

fn check(t: &TwistedPartialAction, x: &CrossedElement) -> Result<(), CrossedError> {
    if x.coeffs.len() != t.group().order() {
        return Err(CrossedError::ActionMismatch(format!("{} coefficients for a group of order {}", x.coeffs.len(), t.group().order())));
    }
    for (g, c) in x.coeffs.iter().enumerate() {
        t.ring().check(c).map_err(|e| CrossedError::ActionMismatch(e.to_string()))?;
        if !c.vanishes_outside(t.domain(g)) {
            return Err(CrossedError::ActionMismatch(format!("coefficient at {g} leaves D({g})")));
        }
    }
    Ok(())
}

/// Product of two monomials `(a delta_g)(b delta_h)`, as the coefficient at `gh`.
pub fn monomial_product(t: &TwistedPartialAction, g: Elem, a: &RingElement, h: Elem, b: &RingElement) -> RingElement {
    let al = t.alpha(g);
    &al.apply(&(&al.apply_inverse(a) * b)) * t.w(g, h)
}

pub fn cp_mul(t: &TwistedPartialAction, x: &CrossedElement, y: &CrossedElement) -> Result<CrossedElement, CrossedError> {
    check(t, x)?;
    check(t, y)?;
    Ok(mul_unchecked(t, x, y))
}

fn mul_unchecked(t: &TwistedPartialAction, x: &CrossedElement, y: &CrossedElement) -> CrossedElement {
    let grp = t.group();
    let mut out = CrossedElement::zero(t);
    for (g, a) in x.coeffs.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (h, b) in y.coeffs.iter().enumerate() {
            if b.is_zero() {
                continue;
            }
            let gh = grp.mul(g, h);
            out.coeffs[gh] = &out.coeffs[gh] + &monomial_product(t, g, a, h, b);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// All elements when the crossed product has at most `2^16` of them.
    Exhaustive,
    /// Additive generators `a delta_g`.
    #[default]
    Spanning,
}

/// Additive generators `a delta_g` with `a` running over a spanning set of `D_g`.
pub fn spanning_elements(t: &TwistedPartialAction) -> Vec<CrossedElement> {
    t.group()
        .elements()
        .flat_map(|g| {
            t.ring()
                .spanning_set(t.domain(g))
                .into_iter()
                .map(move |a| CrossedElement::monomial(t, g, a))
        })
        .collect()
}

/// Number of elements of `A * G`, if it fits.
pub fn cardinality(t: &TwistedPartialAction) -> Option<u128> {
    t.group()
        .elements()
        .try_fold(1u128, |acc, g| acc.checked_mul(t.ring().ideal_cardinality(t.domain(g))?))
}

pub fn log_cardinality(t: &TwistedPartialAction) -> f64 {
    t.group()
        .elements()
        .map(|g| t.domain(g).iter().map(|b| t.ring().block(b).log_cardinality()).sum::<f64>())
        .sum()
}

/// Every element of `A * G`; callers bound the size.
pub fn all_elements(t: &TwistedPartialAction) -> Vec<CrossedElement> {
    let mut acc = vec![CrossedElement::zero(t)];
    for g in t.group().elements() {
        let ideal = t.ring().enumerate_ideal(t.domain(g));
        let mut next = Vec::with_capacity(acc.len() * ideal.len());
        for x in &acc {
            for a in &ideal {
                let mut y = x.clone();
                y.coeffs[g] = a.clone();
                next.push(y);
            }
        }
        acc = next;
    }
    acc
}

pub const EXHAUSTIVE_LIMIT: u128 = 1 << 16;
const TRIPLE_LIMIT: u128 = 1 << 22;

/// Associativity, distributivity and the unit of `A * G`.
///
/// Spanning mode checks every triple of additive generators. Exhaustive mode,
/// when `|A * G| <= 2^16`, also checks every triple of elements if there are
/// at most `2^22` triples, and otherwise every element against every pair of
/// generators.
pub fn verify_ring_laws(t: &TwistedPartialAction, mode: Mode) -> Report {
    let span = spanning_elements(t);
    let mut report = Report::new("crossed");
    let size = cardinality(t);

    let mut assoc = Check::new("associativity", "(xy)z = x(yz) on triples of generators");
    let mut left = Check::new("left-distributivity", "x(y+z) = xy + xz on triples of generators");
    let mut right = Check::new("right-distributivity", "(x+y)z = xz + yz on triples of generators");
    let mut closed = Check::new("coefficients-in-domains", "products have coefficient at g inside D_g");
    let triples = |a: &[CrossedElement], b: &[CrossedElement], c: &[CrossedElement], assoc: &mut Check, left: &mut Check, right: &mut Check, closed: &mut Check| {
        for x in a {
            for y in b {
                let xy = mul_unchecked(t, x, y);
                closed.record(check(t, &xy).is_ok(), || json!({"x": format!("{x:?}"), "y": format!("{y:?}")}));
                for z in c {
                    let lhs = mul_unchecked(t, &xy, z);
                    let rhs = mul_unchecked(t, x, &mul_unchecked(t, y, z));
                    assoc.record(lhs == rhs, || {
                        json!({"x": format!("{x:?}"), "y": format!("{y:?}"), "z": format!("{z:?}"),
                               "(xy)z": format!("{lhs:?}"), "x(yz)": format!("{rhs:?}")})
                    });
                    let l = mul_unchecked(t, x, &y.add(z));
                    left.record(l == xy.add(&mul_unchecked(t, x, z)), || json!({"x": format!("{x:?}"), "y": format!("{y:?}"), "z": format!("{z:?}")}));
                    let r = mul_unchecked(t, &x.add(y), z);
                    right.record(r == mul_unchecked(t, x, z).add(&mul_unchecked(t, y, z)), || {
                        json!({"x": format!("{x:?}"), "y": format!("{y:?}"), "z": format!("{z:?}")})
                    });
                }
            }
        }
    };
    triples(&span, &span, &span, &mut assoc, &mut left, &mut right, &mut closed);
    let mut exhaustive = None;
    if mode == Mode::Exhaustive {
        match size {
            Some(n) if n <= EXHAUSTIVE_LIMIT => {
                let all = all_elements(t);
                if n.saturating_mul(n).saturating_mul(n) <= TRIPLE_LIMIT {
                    triples(&all, &all, &all, &mut assoc, &mut left, &mut right, &mut closed);
                    exhaustive = Some("all-triples");
                } else {
                    triples(&all, &span, &span, &mut assoc, &mut left, &mut right, &mut closed);
                    triples(&span, &all, &span, &mut assoc, &mut left, &mut right, &mut closed);
                    triples(&span, &span, &all, &mut assoc, &mut left, &mut right, &mut closed);
                    exhaustive = Some("elements-against-generator-pairs");
                }
            }
            _ => exhaustive = Some("too-large-spanning-only"),
        }
    }
    report.push(assoc);
    report.push(left);
    report.push(right);
    report.push(closed);

    let mut unit = Check::new("unit", "1_A delta_1 is a two-sided identity");
    let one = CrossedElement::one(t);
    for x in &span {
        let l = mul_unchecked(t, &one, x);
        let r = mul_unchecked(t, x, &one);
        unit.record(&l == x && &r == x, || json!({"x": format!("{x:?}"), "1x": format!("{l:?}"), "x1": format!("{r:?}")}));
    }
    report.push(unit);
    report.data = Some(json!({
        "log_cardinality": log_cardinality(t),
        "cardinality": size.map(|n| n.to_string()),
        "generators": span.len(),
        "exhaustive": exhaustive,
    }));
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::group::FiniteGroup;
    use crate::ring::{BlockSet, BlockType, ProductRing};

    #[test]
    fn trivial_group_is_the_ring() {
        let r = ProductRing::new(vec![BlockType::new(1, 2, 2), BlockType::new(2, 2, 1)]);
        let t = TwistedPartialAction::trivial(FiniteGroup::cyclic(1), r.clone());
        let els = r.spanning_set(&r.all_blocks());
        for a in &els {
            for b in &els {
                let p = cp_mul(&t, &CrossedElement::monomial(&t, 0, a.clone()), &CrossedElement::monomial(&t, 0, b.clone())).unwrap();
                assert_eq!(p.coeff(0), &(a * b));
            }
        }
        let z4 = TwistedPartialAction::trivial(FiniteGroup::cyclic(1), ProductRing::new(vec![BlockType::new(1, 2, 2)]));
        assert!(verify_ring_laws(&z4, Mode::Exhaustive).passed());
    }

    #[test]
    fn fix_b_delta_squared() {
        let b = fixtures::fix_b();
        let d = CrossedElement::monomial(&b, 1, b.ring().one());
        let p = cp_mul(&b, &d, &d).unwrap();
        assert_eq!(p, CrossedElement::monomial(&b, 0, b.ring().scalar(2)));
    }

    #[test]
    fn fix_a_product_of_idempotent_monomials() {
        let a = fixtures::fix_a();
        let x = CrossedElement::monomial(&a, 1, a.one(1));
        let y = CrossedElement::monomial(&a, 2, a.one(2));
        let p = cp_mul(&a, &x, &y).unwrap();
        assert_eq!(p, CrossedElement::monomial(&a, 0, a.ring().idempotent(&BlockSet::singleton(1))));
    }

    #[test]
    fn group_ring_regression() {
        // Untwisted trivial action of C_3 on Z_2: the group algebra F_2[C_3].
        let g = FiniteGroup::cyclic(3);
        let r = ProductRing::new(vec![BlockType::new(1, 2, 1)]);
        let t = TwistedPartialAction::trivial(g.clone(), r.clone());
        for x in g.elements() {
            for y in g.elements() {
                let p = cp_mul(&t, &CrossedElement::monomial(&t, x, r.one()), &CrossedElement::monomial(&t, y, r.one())).unwrap();
                assert_eq!(p, CrossedElement::monomial(&t, g.mul(x, y), r.one()));
            }
        }
    }

    #[test]
    fn laws_hold_on_fixtures() {
        for (name, t) in fixtures::positives() {
            let r = verify_ring_laws(&t, Mode::Spanning);
            assert!(r.passed(), "{name}\n{}", r.to_text());
        }
        let r = verify_ring_laws(&fixtures::fix_b(), Mode::Exhaustive);
        assert!(r.passed());
        assert_eq!(r.data.as_ref().unwrap()["exhaustive"], "all-triples");
        assert_eq!(r.check("associativity").unwrap().tuples, 15625 + 8);
    }

    #[test]
    fn bilinear_on_random_elements() {
        use rand::SeedableRng;
        let t = fixtures::fix_g();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let rand_el = |rng: &mut rand_chacha::ChaCha8Rng| {
            let coeffs = t.group().elements().map(|g| t.ring().random_element(t.domain(g), rng)).collect();
            CrossedElement::from_coeffs(&t, coeffs).unwrap()
        };
        for _ in 0..20 {
            let (x, y, z) = (rand_el(&mut rng), rand_el(&mut rng), rand_el(&mut rng));
            assert_eq!(cp_mul(&t, &x, &y.add(&z)).unwrap(), cp_mul(&t, &x, &y).unwrap().add(&cp_mul(&t, &x, &z).unwrap()));
            assert_eq!(cp_mul(&t, &cp_mul(&t, &x, &y).unwrap(), &z).unwrap(), cp_mul(&t, &x, &cp_mul(&t, &y, &z).unwrap()).unwrap());
        }
    }

    #[test]
    fn mutated_alpha_breaks_associativity() {
        let e = fixtures::fix_e();
        let bad = fixtures::fix_e_alpha_mutated();
        assert!(verify_ring_laws(&e, Mode::Spanning).passed());
        let r = verify_ring_laws(&bad, Mode::Spanning);
        assert!(!r.check("associativity").unwrap().passed());
        assert!(r.check("associativity").unwrap().witness.is_some());
    }

    #[test]
    fn unnormalized_twist_breaks_unit() {
        let b = fixtures::fix_b();
        let bad = b.with_twist(0, 1, b.ring().scalar(2));
        assert!(!verify_ring_laws(&bad, Mode::Spanning).check("unit").unwrap().passed());
    }

    #[test]
    fn foreign_element_is_rejected() {
        let c = fixtures::fix_c();
        let x = CrossedElement { coeffs: vec![c.ring().one(), c.ring().one()] };
        assert!(cp_mul(&c, &x, &x).is_err());
    }
}
