//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use tpa_core::action::{TwistedPartialAction, VerifiedAction};
use tpa_core::corestriction::{apply_epsilon, check_equiv_identity, corestriction_report, EquivalenceWitness};
use tpa_core::crossed::{verify_ring_laws, Mode};
use tpa_core::equivalence::{try_equivalent, try_isomorphic, IsoFailure};
use tpa_core::fixtures;
use tpa_core::globalization::{
    build_extended_twist, build_extended_twist_with, globalize, globalize_with, search_extensions, unital_structure,
    verify_extended_cocycle, verify_globalization, verify_twolaws, GlobalModel, TwistOptions,
};
use tpa_core::group::RepChoice;
use tpa_core::morita::{build_context, verify_surjectivity};
use tpa_core::orbit::{decompose_orbits, orbit_report, restrict_to_orbit, TransitiveStructure, verify_structure_lemmas, verify_theta_lemmas};
use tpa_core::report::Report;
use tpa_core::ring::{BlockEmbedding, BlockMatrix};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn verified(t: TwistedPartialAction) -> VerifiedAction {
    t.verified().expect("positive fixture verifies")
}

fn passes(name: &str, r: &Report) -> Result<(), String> {
    match r.failures().next() {
        None => Ok(()),
        Some(c) => Err(format!("{name}: {} failed, witness {:?}", c.name, c.witness)),
    }
}

fn fails(name: &str, r: &Report) -> Result<String, String> {
    match r.failures().next() {
        Some(c) if c.witness.is_some() => Ok(c.name.clone()),
        Some(c) => Err(format!("{name}: {} failed without a witness", c.name)),
        None => Err(format!("{name}: negative passed")),
    }
}

fn model(t: TwistedPartialAction) -> GlobalModel {
    globalize(&verified(t)).and_then(|g| g.model()).expect("globalizes")
}

fn axioms() -> Outcome {
    for (name, t) in [("fix-a", fixtures::fix_a()), ("fix-b", fixtures::fix_b()), ("fix-c", fixtures::fix_c()), ("fix-d", fixtures::fix_d()), ("fix-e", fixtures::fix_e())] {
        passes(name, &t.verify_axioms())?;
    }
    let negatives = fixtures::negatives();
    for n in &negatives {
        let r = n.action.verify_axioms();
        let hit = n.fails.iter().find_map(|f| r.check(f).filter(|c| !c.passed()));
        match hit {
            Some(c) if c.witness.is_some() => {}
            Some(c) => return Err(format!("{}: {} failed without a witness", n.name, c.name)),
            None => return Err(format!("{}: none of {:?} failed", n.name, n.fails)),
        }
    }
    ensure!(negatives.len() >= 10, "only {} negatives", negatives.len());
    Ok(format!("5 fixtures pass, {} single mutations fail with witnesses", negatives.len()))
}

fn crossed_laws() -> Outcome {
    for (name, t) in [("fix-a", fixtures::fix_a()), ("fix-b", fixtures::fix_b()), ("fix-c", fixtures::fix_c()), ("fix-e", fixtures::fix_e())] {
        passes(name, &verify_ring_laws(&t, Mode::Spanning))?;
    }
    passes("fix-b exhaustive", &verify_ring_laws(&fixtures::fix_b(), Mode::Exhaustive))?;
    Ok("spanning on A, B, C, E and exhaustive on B".into())
}

fn fix_c_extended_twist() -> Outcome {
    let t = verified(fixtures::fix_c());
    let wt = build_extended_twist(&t).map_err(|e| e.to_string())?;
    passes("fix-c", &verify_extended_cocycle(&t, &wt))?;
    let solutions = search_extensions(&t, 1 << 20).ok_or("search space too large")?;
    ensure!(!solutions.is_empty(), "brute force found no extension");
    ensure!(solutions.iter().any(|s| s.as_slice() == wt.table()), "constructed twist is not a search solution");
    Ok(format!("cocycle and restriction hold; constructed twist is among {} search solutions", solutions.len()))
}

fn two_laws() -> Outcome {
    for (name, t) in [("fix-a", fixtures::fix_a()), ("fix-b", fixtures::fix_b()), ("fix-c", fixtures::fix_c())] {
        let t = verified(t);
        let wt = build_extended_twist(&t).map_err(|e| e.to_string())?;
        passes(name, &verify_twolaws(&t, &wt, 1 << 12, 11).map_err(|e| e.to_string())?)?;
    }
    Ok("composition law and cocycle on A, B, C".into())
}

fn globalization() -> Outcome {
    for (name, t) in [("fix-a", fixtures::fix_a()), ("fix-b", fixtures::fix_b()), ("fix-c", fixtures::fix_c()), ("fix-d", fixtures::fix_d())] {
        let t = verified(t);
        let glob = globalize(&t).map_err(|e| e.to_string())?;
        passes(name, &verify_globalization(&t, &glob))?;
    }
    let t = verified(fixtures::fix_a());
    let glob = globalize(&t).map_err(|e| e.to_string())?;
    ensure!(glob.cardinality() == Some(8), "fix-a: |B| = {:?}", glob.cardinality());
    passes("fix-a unital", &unital_structure(&glob))?;
    let m = glob.model().map_err(|e| e.to_string())?;
    let shift = fixtures::shift_global_z2_cubed();
    ensure!(m.action().ring() == shift.ring(), "fix-a: B is not Z_2^3");
    for x in t.group().elements() {
        for i in 0..3 {
            ensure!(m.action().alpha(x).map_block(i) == shift.alpha(x).map_block(i), "fix-a: beta_{x} is not the shift at block {i}");
        }
    }
    Ok("A, B, C, D verify; fix-a has |B| = 8 and B is Z_2^3 with the cyclic shift".into())
}

fn roundtrip() -> Outcome {
    let positives = fixtures::positives();
    for (name, t) in &positives {
        let r = model(t.clone()).roundtrip().map_err(|e| e.to_string())?;
        passes(name, &r)?;
    }
    Ok(format!("identity witness on all {} positive fixtures", positives.len()))
}

fn corestriction() -> Outcome {
    for (name, t) in [("fix-a", fixtures::fix_a()), ("fix-b", fixtures::fix_b()), ("fix-c", fixtures::fix_c())] {
        let r = corestriction_report(&verified(t)).map_err(|e| e.to_string())?;
        passes(name, &r)?;
    }
    Ok("equivalence identity and axioms of the output on A, B, C".into())
}

fn orbit_sweeps() -> Outcome {
    for (name, t) in [("fix-a", fixtures::fix_a()), ("fix-c", fixtures::fix_c())] {
        passes(name, &orbit_report(&verified(t), 1 << 12, 5).map_err(|e| e.to_string())?)?;
    }
    Ok("structure and theta identities on A and C".into())
}

fn uniqueness() -> Outcome {
    let t = verified(fixtures::fix_c());
    let m1 = model(fixtures::fix_c());
    let opts = TwistOptions { choice: RepChoice::MaxIndex, base_offset: 1 };
    let wt = build_extended_twist_with(&t, opts).map_err(|e| e.to_string())?;
    let m2 = globalize_with(&t, wt).and_then(|g| g.model()).map_err(|e| e.to_string())?;
    let b = m2.action().ring();
    let order: Vec<usize> = (0..b.num_blocks()).rev().collect();
    let relabel = BlockEmbedding::from_targets(b, b, &order).map_err(|e| e.to_string())?;
    let m2 = m2.transport(&relabel).map_err(|e| e.to_string())?;
    let eq = try_equivalent(&m1, &m2).map_err(|e| format!("fix-c: {e}"))?;
    passes("fix-c", &eq.report)?;

    let mb = model(fixtures::fix_b());
    let ring = mb.action().ring();
    let eps = EquivalenceWitness::new(mb.action(), vec![ring.one(), ring.scalar(3)]).map_err(|e| e.to_string())?;
    let variant = mb.coboundary_variant(&eps).map_err(|e| e.to_string())?;
    match try_isomorphic(&mb, &variant) {
        Err(IsoFailure::SameTildeW { x: 1, y: 1 }) => {}
        other => return Err(format!("fix-b: expected the twist precheck to fail at (g,g), got {other:?}")),
    }
    let eq = try_equivalent(&mb, &variant).map_err(|e| format!("fix-b: {e}"))?;
    passes("fix-b", &eq.report)?;
    Ok("fix-c permuted runs equivalent; fix-b variant equivalent, precheck fails at (g,g)".into())
}

fn morita() -> Outcome {
    for (name, t) in [("fix-a", fixtures::fix_a()), ("fix-b", fixtures::fix_b())] {
        let t = verified(t);
        let glob = globalize(&t).map_err(|e| e.to_string())?;
        let ctx = build_context(&t, &glob).map_err(|e| e.to_string())?;
        passes(name, &verify_surjectivity(&ctx))?;
    }
    let t = verified(fixtures::fix_a());
    let glob = globalize(&t).map_err(|e| e.to_string())?;
    let ctx = build_context(&t, &glob).map_err(|e| e.to_string())?.with_n_restricted_to(&[0]);
    let r = verify_surjectivity(&ctx);
    let c = r.check("pairing-nm").ok_or("no pairing-nm check")?;
    ensure!(!c.passed() && c.witness.is_some(), "truncated N still spans R'");
    Ok("span(MN) = R and span(NM) = R' on A and B; truncated N misses an element".into())
}

/// Each suite against a negative built to break it.
fn negatives() -> Outcome {
    let mut caught = Vec::new();
    let neg = fixtures::negatives();
    caught.push(("axioms", fails("fix-c/zero-twist", &neg.iter().find(|n| n.name == "fix-c/zero-twist").ok_or("fixture missing")?.action.verify_axioms())?));
    caught.push(("crossed", fails("fix-e/alpha-mutated", &verify_ring_laws(&fixtures::fix_e_alpha_mutated(), Mode::Spanning))?));

    let a = verified(fixtures::fix_a());
    let ts = TransitiveStructure::build(&a, 0).map_err(|e| e.to_string())?;
    let forged = ts.with_block_of(0, 1).with_block_of(1, 0);
    caught.push(("orbit-structure", fails("fix-a swapped blocks", &verify_structure_lemmas(&forged))?));
    caught.push(("theta", fails("fix-a swapped blocks", &verify_theta_lemmas(&forged, 1 << 12, 5))?));

    let b = verified(fixtures::fix_b());
    let (sub, _) = restrict_to_orbit(&b, &decompose_orbits(&b).orbits()[0]).map_err(|e| e.to_string())?;
    let wrong = EquivalenceWitness::new(&sub, vec![sub.one(0), sub.one(1).scale(2)]).map_err(|e| e.to_string())?;
    let w_prime: Vec<Vec<_>> = sub.group().elements().map(|x| sub.group().elements().map(|y| sub.w(x, y).clone()).collect()).collect();
    let mut r = Report::new("corestrict");
    r.push(check_equiv_identity(&sub, &wrong, &w_prime));
    caught.push(("corestriction", fails("fix-b wrong epsilon", &r)?));

    let c = verified(fixtures::fix_c());
    let wt = build_extended_twist(&c).map_err(|e| e.to_string())?;
    let mut zero = wt.get(1, 1).clone();
    zero.set_block(1, BlockMatrix::scalar(c.ring().block(1), 0));
    caught.push(("extended-twist", fails("fix-c zero entry", &verify_extended_cocycle(&c, &wt.with_value(1, 1, zero)))?));

    let wa = build_extended_twist(&a).map_err(|e| e.to_string())?;
    let forged_hat = wa.with_w_hat(0, 1, 1, wa.orbits()[0].w_hat(1, 1).scale(2));
    let r = verify_twolaws(&a, &forged_hat, 1 << 12, 5).map_err(|e| e.to_string())?;
    caught.push(("two-laws", fails("fix-a forged w-hat", &r)?));

    let glob = globalize(&c).map_err(|e| e.to_string())?;
    let forged_u = glob.with_u(1, 1, glob.u(1, 1).scale(2));
    caught.push(("globalization", fails("fix-c forged u", &verify_globalization(&c, &forged_u))?));
    caught.push(("unital-structure", fails("fix-c forged u", &unital_structure(&forged_u))?));

    let m = glob.model().map_err(|e| e.to_string())?;
    let eps: Vec<_> = c.group().elements().map(|x| if x == 0 { c.one(x) } else { c.one(x).scale(2) }).collect();
    let eps = EquivalenceWitness::new(&c, eps).map_err(|e| e.to_string())?;
    let other = apply_epsilon(&c, &eps).map_err(|e| e.to_string())?;
    let wrong_source = GlobalModel::new(other, m.action().clone(), m.phi().clone()).map_err(|e| e.to_string())?;
    caught.push(("roundtrip", fails("fix-c twisted source", &wrong_source.roundtrip().map_err(|e| e.to_string())?)?));

    let forged_action = m.action().with_twist(1, 1, m.action().w(1, 1).scale(2));
    let forged_action = tpa_core::action::TwistedGlobalAction::new(forged_action).map_err(|e| e.to_string())?;
    let forged_model = GlobalModel::new(m.source().clone(), forged_action, m.phi().clone()).map_err(|e| e.to_string())?;
    ensure!(try_equivalent(&m, &forged_model).is_err(), "forged twist certified equivalent");
    caught.push(("equivalence", "rejected".into()));

    let ctx = build_context(&a, &globalize(&a).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    caught.push(("morita", fails("fix-a truncated N", &verify_surjectivity(&ctx.with_n_restricted_to(&[0])))?));

    let list: Vec<String> = caught.iter().map(|(s, c)| format!("{s}:{c}")).collect();
    Ok(list.join(", "))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("axiom suite", axioms),
        ("crossed product laws", crossed_laws),
        ("fix-c extended twist", fix_c_extended_twist),
        ("composition law and cocycle", two_laws),
        ("globalization", globalization),
        ("restriction round trip", roundtrip),
        ("corestriction", corestriction),
        ("orbit and theta sweeps", orbit_sweeps),
        ("uniqueness up to equivalence", uniqueness),
        ("morita context", morita),
        ("every suite has a failing negative", negatives),
    ];
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS {title}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL {title}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
