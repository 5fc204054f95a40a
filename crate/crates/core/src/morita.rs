//! The Morita context between `A * G` and the crossed product of a
//! globalization: `M = sum_g phi(A) delta_g` and `N = sum_g beta_g(phi(A)) delta_g`
//! inside `B * G`, checked through additive spans of generator products.

use serde_json::json;
use thiserror::Error;

use crate::action::{TwistedPartialAction, VerifiedAction};
use crate::crossed::{cp_mul, spanning_elements, CrossedElement};
use crate::globalization::{GlobalModel, GlobalizationError, GlobalizationResult};
use crate::group::Elem;
use crate::report::{Check, Report};
use crate::span::{flatten, Layout, Span};

/// Upper bound on `(number of generators)^2 * residues per element` before
/// the span computations are refused.
pub const WORK_LIMIT: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MoritaError {
    #[error(transparent)]
    Globalization(#[from] GlobalizationError),
    #[error("{which} is not closed: {witness}")]
    ClosureFailure { which: String, witness: serde_json::Value },
    #[error("context too large for span checks ({0} residue operations)")]
    TooLarge(usize),
}

/// Generators of `R = A * G` (embedded by `phi`), `R' = B * G`, `M` and `N`,
/// all as elements of `R'`.
#[derive(Clone, Debug)]
pub struct MoritaContext {
    model: GlobalModel,
    r_gens: Vec<CrossedElement>,
    rp_gens: Vec<CrossedElement>,
    m_gens: Vec<CrossedElement>,
    n_gens: Vec<CrossedElement>,
}

impl MoritaContext {
    pub fn model(&self) -> &GlobalModel {
        &self.model
    }

    fn big(&self) -> &TwistedPartialAction {
        self.model.action().as_partial()
    }

    pub fn r_generators(&self) -> &[CrossedElement] {
        &self.r_gens
    }

    pub fn rp_generators(&self) -> &[CrossedElement] {
        &self.rp_gens
    }

    pub fn m_generators(&self) -> &[CrossedElement] {
        &self.m_gens
    }

    pub fn n_generators(&self) -> &[CrossedElement] {
        &self.n_gens
    }

    fn layout(&self) -> Layout {
        Layout::repeated(self.big().ring(), self.big().group().order())
    }

    fn span(&self, items: &[CrossedElement]) -> Span {
        Span::from_vectors(self.layout(), items.iter().map(vectorize))
    }

    fn products(&self, xs: &[CrossedElement], ys: &[CrossedElement]) -> Vec<CrossedElement> {
        xs.iter()
            .flat_map(|x| ys.iter().map(move |y| (x, y)))
            .map(|(x, y)| cp_mul(self.big(), x, y).expect("generators belong to the crossed product"))
            .collect()
    }

    /// The context with `N` cut down to the coefficients at the listed elements.
    pub fn with_n_restricted_to(&self, keep: &[Elem]) -> Self {
        let mut out = self.clone();
        out.n_gens.retain(|n| n.coeffs().iter().enumerate().all(|(g, c)| c.is_zero() || keep.contains(&g)));
        out
    }
}

fn vectorize(x: &CrossedElement) -> Vec<u64> {
    x.coeffs().iter().flat_map(flatten).collect()
}

/// Builds the context for a globalization and checks that `M` and `N` are
/// bimodules and that `phi` embeds `A * G` in `B * G`.
pub fn build_context(tpa: &VerifiedAction, glob: &GlobalizationResult) -> Result<MoritaContext, MoritaError> {
    let model = glob.model()?;
    let big = model.action().as_partial();
    let g = tpa.group();
    let phi = model.phi();
    let a_span = tpa.ring().spanning_set(&tpa.ring().all_blocks());
    let r_gens: Vec<CrossedElement> = spanning_elements(tpa)
        .iter()
        .map(|x| {
            let coeffs = x.coeffs().iter().map(|c| phi.apply(c)).collect();
            CrossedElement::from_coeffs(big, coeffs).expect("global domains are everything")
        })
        .collect();
    let rp_gens = spanning_elements(big);
    let mut m_gens = Vec::new();
    let mut n_gens = Vec::new();
    for x in g.elements() {
        for a in &a_span {
            let pa = phi.apply(a);
            n_gens.push(CrossedElement::monomial(big, x, big.alpha(x).apply(&pa)));
            m_gens.push(CrossedElement::monomial(big, x, pa));
        }
    }
    let per = Layout::repeated(big.ring(), g.order()).len();
    let largest = m_gens.len().max(rp_gens.len());
    let work = largest * largest * per;
    if work > WORK_LIMIT {
        return Err(MoritaError::TooLarge(work));
    }
    let ctx = MoritaContext { model, r_gens, rp_gens, m_gens, n_gens };
    let report = verify_closure(tpa, &ctx);
    if let Some(c) = report.failures().next() {
        return Err(MoritaError::ClosureFailure { which: c.name.clone(), witness: c.witness.clone().unwrap_or_default() });
    }
    Ok(ctx)
}

fn contained(check: &mut Check, span: &Span, items: &[CrossedElement]) {
    for x in items {
        check.record(span.contains(&vectorize(x)), || json!({"element": format!("{:?}", x.coeffs())}));
    }
}

/// `phi` is multiplicative on `A * G`, `R M R'` lands in `M` and `R' N R` in `N`.
pub fn verify_closure(tpa: &TwistedPartialAction, ctx: &MoritaContext) -> Report {
    let mut report = Report::new("morita-closure");
    let big = ctx.big();
    let phi = ctx.model.phi();
    let small = spanning_elements(tpa);
    let mut embed = Check::new("embedding", "phi(x) phi(y) = phi(xy) for x, y in A * G");
    for (x, px) in small.iter().zip(&ctx.r_gens) {
        for (y, py) in small.iter().zip(&ctx.r_gens) {
            let lhs = cp_mul(big, px, py).expect("in R'");
            let xy = cp_mul(tpa, x, y).expect("in R");
            let rhs: Vec<_> = xy.coeffs().iter().map(|c| phi.apply(c)).collect();
            embed.record(lhs.coeffs() == rhs.as_slice(), || json!({"x": format!("{:?}", x.coeffs()), "y": format!("{:?}", y.coeffs())}));
        }
    }
    report.push(embed);
    let m = ctx.span(&ctx.m_gens);
    let n = ctx.span(&ctx.n_gens);
    let mut m_check = Check::new("m-bimodule", "R M and M R' lie in M");
    contained(&mut m_check, &m, &ctx.products(&ctx.r_gens, &ctx.m_gens));
    contained(&mut m_check, &m, &ctx.products(&ctx.m_gens, &ctx.rp_gens));
    report.push(m_check);
    let mut n_check = Check::new("n-bimodule", "R' N and N R lie in N");
    contained(&mut n_check, &n, &ctx.products(&ctx.rp_gens, &ctx.n_gens));
    contained(&mut n_check, &n, &ctx.products(&ctx.n_gens, &ctx.r_gens));
    report.push(n_check);
    report
}

/// `span(M N) = R`, `span(N M) = R'`, and both rings are idempotent
/// (`span(R R) = R`, `span(R' R') = R'`).
pub fn verify_surjectivity(ctx: &MoritaContext) -> Report {
    let mut report = Report::new("morita");
    let r = ctx.span(&ctx.r_gens);
    let rp = ctx.span(&ctx.rp_gens);
    let equal = |name: &str, anchor: &str, target: &Span, items: Vec<CrossedElement>| {
        let mut check = Check::new(name, anchor);
        let got = ctx.span(&items);
        contained(&mut check, target, &items);
        for v in target.generators() {
            check.record(got.contains(&v), || json!({"missing": v}));
        }
        check
    };
    report.push(equal("pairing-mn", "span(M N) = R", &r, ctx.products(&ctx.m_gens, &ctx.n_gens)));
    report.push(equal("pairing-nm", "span(N M) = R'", &rp, ctx.products(&ctx.n_gens, &ctx.m_gens)));
    report.push(equal("idempotent-r", "span(R R) = R", &r, ctx.products(&ctx.r_gens, &ctx.r_gens)));
    report.push(equal("idempotent-rp", "span(R' R') = R'", &rp, ctx.products(&ctx.rp_gens, &ctx.rp_gens)));
    report.data = Some(json!({
        "log_r": r.log_cardinality(),
        "log_rp": rp.log_cardinality(),
        "r_cardinality": r.cardinality().map(|c| c.to_string()),
        "rp_cardinality": rp.cardinality().map(|c| c.to_string()),
    }));
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::globalization::globalize;

    fn context(t: TwistedPartialAction) -> MoritaContext {
        let t = t.verified().unwrap();
        let glob = globalize(&t).unwrap();
        build_context(&t, &glob).unwrap()
    }

    #[test]
    fn pairings_are_onto() {
        for (name, t) in fixtures::positives() {
            let ctx = context(t);
            let report = verify_surjectivity(&ctx);
            assert!(report.passed(), "{name}: {}", report.to_text());
        }
    }

    #[test]
    fn already_global_gives_equal_rings() {
        let ctx = context(fixtures::fix_b());
        let r = ctx.span(ctx.r_generators());
        let rp = ctx.span(ctx.rp_generators());
        assert!(r.equals(&rp));
    }

    #[test]
    fn truncated_n_misses_part_of_rp() {
        let ctx = context(fixtures::fix_a()).with_n_restricted_to(&[0]);
        let report = verify_surjectivity(&ctx);
        let check = report.check("pairing-nm").unwrap();
        assert!(!check.passed());
        assert!(check.witness.as_ref().unwrap().get("missing").is_some());
    }
}
