//! Randomized invariants checked against direct recomputation.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tpa_core::corestriction::{apply_epsilon, check_equivalent};
use tpa_core::crossed::{cp_mul, CrossedElement};
use tpa_core::fixtures;
use tpa_core::io::{parse, to_json, ActionDocument};

fn random_crossed(t: &tpa_core::action::TwistedPartialAction, rng: &mut ChaCha8Rng) -> CrossedElement {
    let coeffs = t.group().elements().map(|g| t.ring().random_element(t.domain(g), rng)).collect();
    CrossedElement::from_coeffs(t, coeffs).unwrap()
}

fn fixture(i: usize) -> tpa_core::action::TwistedPartialAction {
    let all = fixtures::positives();
    all[i % all.len()].1.clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn crossed_product_is_associative(i in 0usize..8, seed in any::<u64>()) {
        let t = fixture(i);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y, z) = (random_crossed(&t, &mut rng), random_crossed(&t, &mut rng), random_crossed(&t, &mut rng));
        let left = cp_mul(&t, &cp_mul(&t, &x, &y).unwrap(), &z).unwrap();
        let right = cp_mul(&t, &x, &cp_mul(&t, &y, &z).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn crossed_product_distributes(i in 0usize..8, seed in any::<u64>()) {
        let t = fixture(i);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y, z) = (random_crossed(&t, &mut rng), random_crossed(&t, &mut rng), random_crossed(&t, &mut rng));
        let lhs = cp_mul(&t, &x, &y.add(&z)).unwrap();
        let rhs = cp_mul(&t, &x, &y).unwrap().add(&cp_mul(&t, &x, &z).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn unit_families_compose(i in 0usize..8, s1 in any::<u64>(), s2 in any::<u64>()) {
        let t = fixture(i);
        let e1 = fixtures::random_witness(&t, s1);
        let e2 = fixtures::random_witness(&t, s2);
        let t1 = apply_epsilon(&t, &e1).unwrap();
        let t12 = apply_epsilon(&t1, &e2).unwrap();
        prop_assert_eq!(&apply_epsilon(&t, &e1.then(&e2)).unwrap(), &t12);
        prop_assert!(t12.verify_axioms().passed());
        prop_assert!(check_equivalent(&t12, &t, &e1.then(&e2).inverse()).unwrap().passed());
    }

    #[test]
    fn transformed_actions_survive_serialization(i in 0usize..8, seed in any::<u64>()) {
        let t = fixture(i);
        let t = apply_epsilon(&t, &fixtures::random_witness(&t, seed)).unwrap();
        let text = to_json(&ActionDocument::from_action(&t));
        let back = parse(&text).unwrap().to_action().unwrap();
        prop_assert_eq!(back, t);
    }
}
