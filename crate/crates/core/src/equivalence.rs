//! Comparing two globalizations of one partial action: isomorphism through
//! the canonical correspondence of generators, and equivalence through
//! orbit reduction, global corestriction and isomorphism of the results.

use serde_json::json;
use thiserror::Error;

use crate::action::{lift_blocks, push_forward, TwistedGlobalAction, TwistedPartialAction, VerifiedAction};
use crate::corestriction::{check_equivalent, corestrict, theta_product, w_prime_factor, EquivalenceWitness};
use crate::globalization::{GlobalModel, ModelError};
use crate::group::Elem;
use crate::orbit::{decompose_orbits, restrict_to_orbit, TransitiveStructure};
use crate::report::{Check, Report};
use crate::ring::{BlockEmbedding, BlockSet, RingElement};
use crate::span::{flatten, unflatten, Layout, Span};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IsoFailure {
    #[error("the globalizations are not of the same partial action")]
    NotSameAction,
    #[error("twists differ on phi(A) at ({x},{y})")]
    SameTildeW { x: Elem, y: Elem },
    #[error("the generator correspondence is not well defined (log orders: graph {graph}, domain {domain})")]
    NotWellDefined { graph: f64, domain: f64 },
    #[error("the generator correspondence is not onto (log orders: graph {graph}, target {target})")]
    NotBijective { graph: f64, target: f64 },
    #[error("the generator correspondence is not blockwise")]
    NotBlockwise,
    #[error("the isomorphism certificate failed:\n{0}")]
    Certificate(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquivalenceFailure {
    #[error("the globalizations are not of the same partial action")]
    NotSameAction,
    #[error("orbit matching failed: {0}")]
    OrbitMatching(String),
    #[error("corestriction of globalization {model} on orbit {orbit} failed: {detail}")]
    Corestriction { orbit: usize, model: usize, detail: String },
    #[error("corestricted twist of globalization {model} on orbit {orbit} differs from the partial one at ({x},{y})")]
    SameTildeW2 { orbit: usize, model: usize, x: Elem, y: Elem },
    #[error("corestricted globalizations on orbit {orbit} are not isomorphic: {failure}")]
    Isomorphism { orbit: usize, failure: IsoFailure },
    #[error("the equivalence certificate failed:\n{0}")]
    Certificate(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `Phi : B_1 -> B_2` with `Phi phi_1 = phi_2`, `Phi beta_1 = beta_2 Phi`
/// and `Phi(u_1) = u_2`.
#[derive(Clone, Debug)]
pub struct GlobalizationIso {
    pub phi: BlockEmbedding,
    pub report: Report,
}

impl GlobalizationIso {
    /// The isomorphism as an equivalence with every unit equal to 1.
    pub fn as_equivalence(&self, m1: &GlobalModel, m2: &GlobalModel) -> Result<GlobalEquivalence, EquivalenceFailure> {
        let witness = EquivalenceWitness::identity(m2.action());
        let report = certify(m1, m2, &self.phi, &witness)?;
        Ok(GlobalEquivalence { phi: self.phi.clone(), witness, eta: Vec::new(), u_prime: Vec::new(), report })
    }
}

/// `Phi : B_1 -> B_2` and units `E_x` of `B_2` carrying `Phi beta_1 Phi^-1`
/// to `beta_2`, with the per-orbit corestriction data of both sides.
#[derive(Clone, Debug)]
pub struct GlobalEquivalence {
    pub phi: BlockEmbedding,
    pub witness: EquivalenceWitness,
    /// `[eta_1, eta_2]` per orbit, on the orbit ideals.
    pub eta: Vec<[EquivalenceWitness; 2]>,
    /// `[u'_1, u'_2]` per orbit.
    pub u_prime: Vec<[Vec<Vec<RingElement>>; 2]>,
    pub report: Report,
}

/// `phi^-1(u[x,y] phi(1))`.
fn twist_on_a(m: &GlobalModel, x: Elem, y: Elem) -> RingElement {
    let one = m.phi().apply(&m.source().ring().one());
    m.phi().apply_inverse(&(m.action().w(x, y) * &one))
}

fn same_source(m1: &GlobalModel, m2: &GlobalModel) -> Result<bool, ModelError> {
    Ok(m1.underlying()?.source() == m2.underlying()?.source())
}

/// Lemma-style isomorphism test: the twists must agree on `phi(A)`, and then
/// `beta_1x(phi_1(a)) -> beta_2x(phi_2(a))` must define a bijective additive
/// map, which is then certified to be an isomorphism of globalizations.
pub fn try_isomorphic(m1: &GlobalModel, m2: &GlobalModel) -> Result<GlobalizationIso, IsoFailure> {
    if !same_source(m1, m2)? {
        return Err(IsoFailure::NotSameAction);
    }
    let g = m1.action().group();
    for x in g.elements() {
        for y in g.elements() {
            if twist_on_a(m1, x, y) != twist_on_a(m2, x, y) {
                return Err(IsoFailure::SameTildeW { x, y });
            }
        }
    }
    let (b1, b2) = (m1.action().ring(), m2.action().ring());
    let (l1, l2) = (Layout::of_ring(b1), Layout::of_ring(b2));
    let first = l1.len();
    let spanning = m1.source().ring().spanning_set(&m1.source().ring().all_blocks());
    let mut graph = Span::new(l1.concat(&l2));
    for x in g.elements() {
        for a in &spanning {
            let mut v = flatten(&m1.action().alpha(x).apply(&m1.phi().apply(a)));
            v.extend(flatten(&m2.action().alpha(x).apply(&m2.phi().apply(a))));
            graph.insert(&v);
        }
    }
    let (lg, lb1, lb2) = (graph.log_cardinality(), b1.log_cardinality(), b2.log_cardinality());
    if (lg - lb1).abs() > 1e-9 {
        return Err(IsoFailure::NotWellDefined { graph: lg, domain: lb1 });
    }
    if (lg - lb2).abs() > 1e-9 {
        return Err(IsoFailure::NotBijective { graph: lg, target: lb2 });
    }
    let apply = |f: &RingElement| graph.graph_apply(first, &flatten(f)).map(|v| unflatten(b2, &v));
    let phi = BlockEmbedding::from_map(b1, b2, |f| apply(f).unwrap_or_else(|| b2.zero())).ok_or(IsoFailure::NotBlockwise)?;

    let mut report = Report::new("isomorphic");
    let b1_spanning = b1.spanning_set(&b1.all_blocks());
    let mut agree = Check::new("generator-correspondence", "Phi agrees with beta_1x(phi_1(a)) -> beta_2x(phi_2(a))");
    for f in &b1_spanning {
        agree.record(apply(f).as_ref() == Some(&phi.apply(f)), || json!({"f": format!("{f:?}")}));
    }
    report.push(agree);
    let mut inter = Check::new("intertwining", "Phi(beta_1x(f)) = beta_2x(Phi(f))");
    for x in g.elements() {
        for f in &b1_spanning {
            let ok = phi.apply(&m1.action().alpha(x).apply(f)) == m2.action().alpha(x).apply(&phi.apply(f));
            inter.record(ok, || json!({"x": x, "f": format!("{f:?}")}));
        }
    }
    report.push(inter);
    let mut twist = Check::new("twist", "Phi(u_1[x,y]) = u_2[x,y]");
    for x in g.elements() {
        for y in g.elements() {
            twist.record(phi.apply(m1.action().w(x, y)) == *m2.action().w(x, y), || json!({"x": x, "y": y}));
        }
    }
    report.push(twist);
    report.push(phi_compatibility(m1, m2, &phi));
    if !report.passed() {
        return Err(IsoFailure::Certificate(report.to_text()));
    }
    Ok(GlobalizationIso { phi, report })
}

fn phi_compatibility(m1: &GlobalModel, m2: &GlobalModel, phi: &BlockEmbedding) -> Check {
    let mut check = Check::new("phi-compatibility", "Phi(phi_1(a)) = phi_2(a)");
    for a in m1.source().ring().spanning_set(&m1.source().ring().all_blocks()) {
        check.record(phi.apply(&m1.phi().apply(&a)) == m2.phi().apply(&a), || json!({"a": format!("{a:?}")}));
    }
    check
}

/// `E` carries `Phi beta_1 Phi^-1` to `beta_2`, and `Phi phi_1 = phi_2`.
fn certify(m1: &GlobalModel, m2: &GlobalModel, phi: &BlockEmbedding, e: &EquivalenceWitness) -> Result<Report, EquivalenceFailure> {
    let moved = push_forward(m1.action(), phi).map_err(ModelError::from)?;
    let mut report = check_equivalent(&moved, m2.action(), e).map_err(ModelError::from)?;
    report.command = "equivalent".into();
    report.push(phi_compatibility(m1, m2, phi));
    Ok(report)
}

/// Per orbit data of one side of the comparison.
struct OrbitSide {
    cells: Vec<usize>,
    eta: EquivalenceWitness,
    u_prime: Vec<Vec<RingElement>>,
    corestricted: GlobalModel,
}

fn corestrict_side(
    part: &GlobalModel,
    reduced: &VerifiedAction,
    w_hat: &[Vec<RingElement>],
    orbit: usize,
    model: usize,
) -> Result<(EquivalenceWitness, Vec<Vec<RingElement>>, GlobalModel), EquivalenceFailure> {
    let fail = |detail: String| EquivalenceFailure::Corestriction { orbit, model, detail };
    let global = part.action().as_partial().clone().verified().map_err(|r| fail(r.to_text()))?;
    let base = part.phi().block_image(0);
    let ts = TransitiveStructure::build(&global, base).map_err(|e| fail(e.to_string()))?;
    let cor = corestrict(&ts).map_err(|e| fail(e.to_string()))?;
    let g = global.group();
    let one = part.phi().apply(&part.source().ring().one());
    for x in g.elements() {
        for y in g.elements() {
            if &cor.w_prime[x][y] * &one != part.phi().apply(&w_hat[x][y]) {
                return Err(EquivalenceFailure::SameTildeW2 { orbit, model, x, y });
            }
        }
    }
    let action = TwistedGlobalAction::new(cor.action.into_inner()).map_err(|e| fail(e.to_string()))?;
    let corestricted = GlobalModel::new((**reduced).clone(), action, part.phi().clone())?;
    Ok((cor.epsilon, cor.w_prime, corestricted))
}

/// Equivalence of two globalizations: both are split into orbit ideals
/// matched through `A`, each orbit part is corestricted along the same
/// transversal, the corestricted twists are compared with the partial
/// action's, the corestricted globalizations are shown isomorphic, and the
/// pieces are assembled into `Phi` and `E` and certified.
pub fn try_equivalent(m1: &GlobalModel, m2: &GlobalModel) -> Result<GlobalEquivalence, EquivalenceFailure> {
    let cores = [m1.underlying()?, m2.underlying()?];
    if cores[0].source() != cores[1].source() {
        return Err(EquivalenceFailure::NotSameAction);
    }
    let source = cores[0]
        .source()
        .clone()
        .verified()
        .map_err(|r| EquivalenceFailure::OrbitMatching(format!("source does not verify:\n{}", r.to_text())))?;
    let g = source.group();
    let a_orbits = decompose_orbits(&source);
    for (i, core) in cores.iter().enumerate() {
        let count = decompose_orbits(core.action()).len();
        if count != a_orbits.len() {
            return Err(EquivalenceFailure::OrbitMatching(format!(
                "globalization {} has {count} orbits, the partial action {}",
                i + 1,
                a_orbits.len()
            )));
        }
        let mut seen = BlockSet::empty();
        for orbit in a_orbits.orbits() {
            let cells = core.orbit_cells(orbit);
            if !cells.intersection(&seen).is_empty() {
                return Err(EquivalenceFailure::OrbitMatching(format!("two orbits of A meet one orbit of globalization {}", i + 1)));
            }
            seen = seen.union(&cells);
        }
    }

    let mut sides: [Vec<OrbitSide>; 2] = [Vec::new(), Vec::new()];
    let mut isos = Vec::new();
    for (mu, orbit) in a_orbits.orbits().iter().enumerate() {
        let (reduced, _) = restrict_to_orbit(&source, orbit).map_err(|e| EquivalenceFailure::OrbitMatching(e.to_string()))?;
        let ts = TransitiveStructure::build(&reduced, 0).map_err(|e| EquivalenceFailure::OrbitMatching(e.to_string()))?;
        let alpha_prime = corestrict(&ts)
            .map_err(|e| EquivalenceFailure::Corestriction { orbit: mu, model: 0, detail: e.to_string() })?
            .action;
        let reps = ts.reps().to_vec();
        let w_hat: Vec<Vec<RingElement>> = g
            .elements()
            .map(|x| g.elements().map(|y| theta_product(&ts, &reps, |r| w_prime_factor(&ts, x, y, r))).collect())
            .collect();
        for (i, core) in cores.iter().enumerate() {
            let part = core.orbit_part(orbit)?;
            let (eta, u_prime, corestricted) = corestrict_side(&part, &alpha_prime, &w_hat, mu, i + 1)?;
            sides[i].push(OrbitSide { cells: core.orbit_cells(orbit).iter().collect(), eta, u_prime, corestricted });
        }
        let iso = try_isomorphic(&sides[0][mu].corestricted, &sides[1][mu].corestricted)
            .map_err(|failure| EquivalenceFailure::Isomorphism { orbit: mu, failure })?;
        isos.push(iso);
    }

    let (b1, b2) = (cores[0].action().ring(), cores[1].action().ring());
    let mut images = vec![None; b1.num_blocks()];
    for (mu, iso) in isos.iter().enumerate() {
        for (p, &block) in sides[0][mu].cells.iter().enumerate() {
            images[block] = Some((sides[1][mu].cells[iso.phi.block_image(p)], iso.phi.conjugator(p).clone()));
        }
    }
    let images = images
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| EquivalenceFailure::OrbitMatching("orbit ideals do not cover B_1".into()))?;
    let phi = BlockEmbedding::new(b1, b2, images).map_err(ModelError::from)?;

    let assemble = |i: usize, ring: &crate::ring::ProductRing, action: &TwistedPartialAction| {
        let values = g
            .elements()
            .map(|x| {
                sides[i].iter().fold(ring.zero(), |acc, side| &acc + &lift_blocks(ring, side.eta.eps(x), &side.cells))
            })
            .collect();
        EquivalenceWitness::new(action, values).map_err(ModelError::from)
    };
    let eta1 = assemble(0, b1, cores[0].action())?;
    let eta2 = assemble(1, b2, cores[1].action())?;
    let on_b2 = |e: &EquivalenceWitness| {
        EquivalenceWitness::new(m2.action(), g.elements().map(|x| phi.apply(e.eps(x))).collect()).map_err(ModelError::from)
    };
    // Corestriction transforms beta_i by eta_i^-1, so Phi beta_1 Phi^-1 reaches
    // beta_2 through the common corestricted action.
    let mut witness = on_b2(&eta1)?.inverse().then(&eta2);
    if let Some(eps1) = m1.derived_by() {
        witness = on_b2(eps1)?.inverse().then(&witness);
    }
    if let Some(eps2) = m2.derived_by() {
        witness = witness.then(eps2);
    }
    let report = certify(m1, m2, &phi, &witness)?;
    if !report.passed() {
        return Err(EquivalenceFailure::Certificate(report.to_text()));
    }
    let eta = sides[0]
        .iter()
        .zip(&sides[1])
        .map(|(s1, s2)| [s1.eta.clone(), s2.eta.clone()])
        .collect();
    let u_prime = sides[0]
        .iter()
        .zip(&sides[1])
        .map(|(s1, s2)| [s1.u_prime.clone(), s2.u_prime.clone()])
        .collect();
    Ok(GlobalEquivalence { phi, witness, eta, u_prime, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::globalization::{build_extended_twist_with, globalize, globalize_with, TwistOptions};
    use crate::group::RepChoice;

    fn model(t: TwistedPartialAction) -> GlobalModel {
        globalize(&t.verified().unwrap()).unwrap().model().unwrap()
    }

    #[test]
    fn a_model_is_isomorphic_to_itself() {
        for (name, t) in fixtures::positives() {
            let m = model(t);
            let iso = try_isomorphic(&m, &m).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(iso.report.passed());
            assert!(iso.as_equivalence(&m, &m).unwrap().report.passed());
        }
    }

    #[test]
    fn fix_a_matches_the_ambient_shift() {
        let m = model(fixtures::fix_a());
        let ambient = GlobalModel::from_restriction(&fixtures::shift_global_z2_cubed(), &[0, 1].into_iter().collect()).unwrap();
        let iso = try_isomorphic(&m, &ambient).unwrap();
        let eq = iso.as_equivalence(&m, &ambient).unwrap();
        assert!(eq.report.passed());
        assert!(try_equivalent(&m, &ambient).is_ok());
    }

    #[test]
    fn fix_b_coboundary_variant() {
        let m = model(fixtures::fix_b());
        let b = m.action().ring();
        let eps = EquivalenceWitness::new(m.action(), vec![b.one(), b.scalar(3)]).unwrap();
        let variant = m.coboundary_variant(&eps).unwrap();
        assert!(variant.verify_model().passed());
        match try_isomorphic(&m, &variant) {
            Err(IsoFailure::SameTildeW { x: 1, y: 1 }) => {}
            other => panic!("expected a twist mismatch at (g,g), got {other:?}"),
        }
        let eq = try_equivalent(&m, &variant).unwrap();
        assert!(eq.report.passed(), "{}", eq.report.to_text());
        let back = try_equivalent(&variant, &m).unwrap();
        assert!(back.report.passed());
    }

    #[test]
    fn permuted_choices_are_equivalent() {
        for (name, t) in fixtures::positives() {
            let t = t.verified().unwrap();
            let m1 = globalize(&t).unwrap().model().unwrap();
            let opts = TwistOptions { choice: RepChoice::MaxIndex, base_offset: 1 };
            let m2 = globalize_with(&t, build_extended_twist_with(&t, opts).unwrap()).unwrap().model().unwrap();
            let eq = try_equivalent(&m1, &m2).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(eq.report.passed());
            assert!(try_equivalent(&m2, &m1).is_ok(), "{name}: not symmetric");
        }
    }

    #[test]
    fn relabelled_blocks_are_isomorphic() {
        let m = model(fixtures::fix_c());
        let b = m.action().ring();
        let order: Vec<usize> = (0..b.num_blocks()).rev().collect();
        let relabel = BlockEmbedding::from_targets(b, b, &order).unwrap();
        let moved = m.transport(&relabel).unwrap();
        assert!(moved.verify_model().passed());
        let iso = try_isomorphic(&m, &moved).unwrap();
        assert_eq!(iso.phi.block_image(0), order[0]);
        assert!(try_equivalent(&moved, &m).unwrap().report.passed());
    }

    #[test]
    fn forged_twist_is_not_equivalent() {
        let m = model(fixtures::fix_c());
        let forged = m.action().with_twist(1, 1, m.action().w(1, 1).scale(2));
        let forged = GlobalModel::new(m.source().clone(), TwistedGlobalAction::new(forged).unwrap(), m.phi().clone()).unwrap();
        assert!(try_isomorphic(&m, &forged).is_err());
        assert!(try_equivalent(&m, &forged).is_err());
    }

    #[test]
    fn different_actions_are_rejected() {
        let a = model(fixtures::fix_a());
        let c = model(fixtures::fix_c());
        assert!(matches!(try_isomorphic(&a, &c), Err(IsoFailure::NotSameAction)));
        assert!(matches!(try_equivalent(&a, &c), Err(EquivalenceFailure::NotSameAction)));
    }
}
