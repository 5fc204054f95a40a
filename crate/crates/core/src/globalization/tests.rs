use super::*;
use crate::fixtures;
use crate::ring::BlockMatrix;

fn verified(t: TwistedPartialAction) -> VerifiedAction {
    t.verified().expect("fixture verifies")
}

#[test]
fn fix_c_twist_is_among_search_solutions() {
    let t = verified(fixtures::fix_c());
    let wt = build_extended_twist(&t).unwrap();
    let report = verify_extended_cocycle(&t, &wt);
    assert!(report.passed(), "{}", report.to_text());
    let solutions = search_extensions(&t, 1 << 20).unwrap();
    assert!(!solutions.is_empty());
    assert!(solutions.iter().any(|s| s.as_slice() == wt.table()));
}

#[test]
fn forged_twist_is_caught() {
    let t = verified(fixtures::fix_c());
    let wt = build_extended_twist(&t).unwrap();
    let solutions = search_extensions(&t, 1 << 20).unwrap();
    let g = t.group();
    let x = (0..g.order()).find(|&x| x != g.identity()).unwrap();
    let current = wt.get(x, x).clone();
    let shape = t.ring().block(1);
    let with_entry = |block: usize, c: u64| {
        let mut v = current.clone();
        v.set_block(block, BlockMatrix::scalar(shape, c));
        v
    };
    // Outside `1_g` the cocycle is silent, so the oracle accepts every unit there.
    for c in 1..shape.modulus() {
        let v = with_entry(1, c);
        let accepted = verify_extended_cocycle(&t, &wt.with_value(x, x, v.clone())).passed();
        assert_eq!(accepted, solutions.iter().any(|s| s[x][x] == v));
    }
    let zero = verify_extended_cocycle(&t, &wt.with_value(x, x, with_entry(1, 0)));
    assert!(!zero.check("extended-units").unwrap().passed());
    let moved = with_entry(0, (current.block(0).get(0, 0) + 1) % shape.modulus());
    let report = verify_extended_cocycle(&t, &wt.with_value(x, x, moved.clone()));
    assert!(!report.check("extended-restriction").unwrap().passed());
    assert!(!solutions.iter().any(|s| s[x][x] == moved));
}

#[test]
fn twist_laws_hold_on_small_fixtures() {
    for t in [fixtures::fix_a(), fixtures::fix_b(), fixtures::fix_c()] {
        let t = verified(t);
        let wt = build_extended_twist(&t).unwrap();
        let report = verify_twolaws(&t, &wt, 1 << 12, 7).unwrap();
        assert!(report.passed(), "{}", report.to_text());
    }
}

#[test]
fn fix_a_envelope_has_eight_elements() {
    let t = verified(fixtures::fix_a());
    let glob = globalize(&t).unwrap();
    assert_eq!(glob.cardinality(), Some(8));
    for x in t.group().elements() {
        for y in t.group().elements() {
            assert_eq!(glob.twist().get(x, y), &t.ring().one());
        }
    }
}

#[test]
fn every_positive_fixture_globalizes() {
    for (name, t) in fixtures::positives() {
        let t = verified(t);
        let glob = globalize(&t).unwrap();
        let report = verify_globalization(&t, &glob);
        assert!(report.passed(), "{name}: {}", report.to_text());
    }
}

#[test]
fn dropped_beta_conjugator_is_caught() {
    for t in [fixtures::fix_f(), fixtures::fix_g()] {
        let t = verified(t);
        let glob = globalize(&t).unwrap();
        let f_ring = glob.functions().ring().clone();
        let caught = t.group().elements().any(|x| {
            let beta = glob.beta(x).without_conjugators(&f_ring, &f_ring.all_blocks());
            !verify_globalization(&t, &glob.with_beta(x, beta)).passed()
        });
        assert!(caught);
    }
}

#[test]
fn forged_u_is_caught() {
    let t = verified(fixtures::fix_c());
    let glob = globalize(&t).unwrap();
    let g = t.group();
    let x = (0..g.order()).find(|&x| x != g.identity()).unwrap();
    let forged = glob.u(x, x).scale(2);
    assert!(!verify_globalization(&t, &glob.with_u(x, x, forged)).passed());
}

#[test]
fn models_verify_and_round_trip() {
    for (name, t) in fixtures::positives() {
        let t = verified(t);
        let glob = globalize(&t).unwrap();
        let unital = unital_structure(&glob);
        assert!(unital.passed(), "{name}: {}", unital.to_text());
        let model = glob.model().unwrap();
        let report = model.verify_model();
        assert!(report.passed(), "{name}: {}", report.to_text());
        let rt = model.roundtrip().unwrap();
        assert!(rt.passed(), "{name}: {}", rt.to_text());
    }
}

#[test]
fn fix_a_model_is_the_cyclic_shift() {
    let glob = globalize(&verified(fixtures::fix_a())).unwrap();
    let model = glob.model().unwrap();
    let shift = fixtures::shift_global_z2_cubed();
    assert_eq!(model.action().ring(), shift.ring());
    for x in 0..3 {
        for i in 0..3 {
            assert_eq!(model.action().alpha(x).map_block(i), shift.alpha(x).map_block(i));
        }
    }
}

#[test]
fn fix_d_has_two_orbit_ideals() {
    let glob = globalize(&verified(fixtures::fix_d())).unwrap();
    let report = unital_structure(&glob);
    assert!(report.passed(), "{}", report.to_text());
    assert_eq!(crate::orbit::decompose_orbits(glob.model().unwrap().action()).len(), 2);
}

#[test]
fn ambient_restrictions_are_models() {
    let shift = fixtures::shift_global_z2_cubed();
    let model = GlobalModel::from_restriction(&shift, &[0, 1].into_iter().collect()).unwrap();
    assert_eq!(model.source(), &fixtures::fix_a());
    assert!(model.verify_model().passed());
    let swap = fixtures::swap_global_z5_cubed();
    let model = GlobalModel::from_restriction(&swap, &[0, 1].into_iter().collect()).unwrap();
    assert!(model.verify_model().passed());
    assert!(model.roundtrip().unwrap().passed());
}
