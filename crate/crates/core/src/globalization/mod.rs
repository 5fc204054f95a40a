//! Globalization: the extended twist, the enveloping global action built
//! inside the ring of functions `G -> A`, its verification, and its
//! identification with a product of blocks.

mod model;
mod twist;
mod unital;

use serde_json::json;
use thiserror::Error;

use crate::action::{lift_blocks, select_blocks, ActionError, PartialIso, TwistedGlobalAction, TwistedPartialAction, VerifiedAction};
use crate::corestriction::CorestrictionError;
use crate::group::Elem;
use crate::orbit::OrbitError;
use crate::report::{Check, Report};
use crate::ring::{ProductRing, RingElement};
use crate::span::{flatten, unflatten, Layout, Span};

pub use model::{GlobalModel, ModelError};
pub use twist::{
    build_extended_twist, build_extended_twist_with, search_extensions, tilde_alpha, tilde_eps, verify_extended_cocycle,
    verify_twolaws, ExtendedTwist, OrbitTwist, TwistOptions,
};
pub use unital::{unital_structure, Cell, UnitalStructure};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GlobalizationError {
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Corestriction(#[from] CorestrictionError),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Model(#[from] ModelError),
    /// A step guaranteed by the construction failed.
    #[error("construction invariant violated:\n{0}")]
    Invariant(String),
}

/// The ring `F(G, A)` of functions `G -> A`, stored as the product of
/// `|G|` copies of `A`; the copy for `h` holds `f|_h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionRing {
    order: usize,
    base: ProductRing,
    ring: ProductRing,
}

impl FunctionRing {
    pub fn new(order: usize, base: &ProductRing) -> Self {
        let blocks = (0..order).flat_map(|_| base.blocks().iter().copied()).collect();
        FunctionRing { order, base: base.clone(), ring: ProductRing::new(blocks) }
    }

    pub fn ring(&self) -> &ProductRing {
        &self.ring
    }

    pub fn base(&self) -> &ProductRing {
        &self.base
    }

    /// Block of `F` holding block `lambda` of `f|_h`.
    pub fn block(&self, h: Elem, lambda: usize) -> usize {
        h * self.base.num_blocks() + lambda
    }

    fn blocks_at(&self, h: Elem) -> Vec<usize> {
        (0..self.base.num_blocks()).map(|l| self.block(h, l)).collect()
    }

    /// `f|_h`.
    pub fn at(&self, f: &RingElement, h: Elem) -> RingElement {
        select_blocks(&self.base, f, &self.blocks_at(h))
    }

    /// The function `h -> values[h]`.
    pub fn from_values(&self, values: &[RingElement]) -> RingElement {
        assert_eq!(values.len(), self.order, "one value per group element");
        let mut out = self.ring.zero();
        for (h, v) in values.iter().enumerate() {
            out = &out + &lift_blocks(&self.ring, v, &self.blocks_at(h));
        }
        out
    }
}

/// The global action `(B, beta, u)` built from an extended twist:
/// `beta_g(f)|_h = wt[h^-1,g] f(g^-1 h) wt[h^-1,g]^-1`,
/// `u[g,h]|_t = wt[t^-1,g] wt[t^-1 g,h] wt[t^-1,gh]^-1`,
/// `phi(a)|_g = alpha_{g^-1}(a 1_g)` and `B = sum_g beta_g(phi(A))`.
#[derive(Clone, Debug)]
pub struct GlobalizationResult {
    action: VerifiedAction,
    twist: ExtendedTwist,
    functions: FunctionRing,
    ambient: TwistedGlobalAction,
    b: Span,
    one_b: RingElement,
}

impl GlobalizationResult {
    pub fn action(&self) -> &VerifiedAction {
        &self.action
    }

    pub fn twist(&self) -> &ExtendedTwist {
        &self.twist
    }

    pub fn functions(&self) -> &FunctionRing {
        &self.functions
    }

    /// `(F, beta, u)` as a global action on all of `F`.
    pub fn ambient(&self) -> &TwistedGlobalAction {
        &self.ambient
    }

    pub fn beta(&self, g: Elem) -> &PartialIso {
        self.ambient.alpha(g)
    }

    pub fn u(&self, g: Elem, h: Elem) -> &RingElement {
        self.ambient.w(g, h)
    }

    pub fn phi(&self, a: &RingElement) -> RingElement {
        phi(&self.action, &self.functions, a)
    }

    /// `B` as an additive subgroup of `F`.
    pub fn b_span(&self) -> &Span {
        &self.b
    }

    /// A generating set of `B`.
    pub fn b_generators(&self) -> Vec<RingElement> {
        self.b.generators().iter().map(|v| unflatten(self.functions.ring(), v)).collect()
    }

    pub fn contains(&self, f: &RingElement) -> bool {
        self.b.contains(&flatten(f))
    }

    pub fn one_b(&self) -> &RingElement {
        &self.one_b
    }

    pub fn cardinality(&self) -> Option<u128> {
        self.b.cardinality()
    }

    pub fn log_cardinality(&self) -> f64 {
        self.b.log_cardinality()
    }

    /// The same data with `beta_g` replaced (for forged negatives).
    pub fn with_beta(&self, g: Elem, beta: PartialIso) -> Self {
        let mut out = self.clone();
        out.ambient = TwistedGlobalAction::new(self.ambient.with_alpha(g, beta)).expect("still global");
        out
    }

    /// The same data with `u[g,h]` replaced (for forged negatives).
    pub fn with_u(&self, g: Elem, h: Elem, u: RingElement) -> Self {
        let mut out = self.clone();
        out.ambient = TwistedGlobalAction::new(self.ambient.with_twist(g, h, u)).expect("still global");
        out
    }
}

fn phi(t: &TwistedPartialAction, functions: &FunctionRing, a: &RingElement) -> RingElement {
    let g = t.group();
    let values: Vec<RingElement> = g
        .elements()
        .map(|x| t.alpha(g.inv(x)).apply(&(a * &t.one(x))))
        .collect();
    functions.from_values(&values)
}

/// `e v f = e + f - ef` for commuting idempotents.
fn join(e: &RingElement, f: &RingElement) -> RingElement {
    &(e + f) - &(e * f)
}

pub fn globalize(tpa: &VerifiedAction) -> Result<GlobalizationResult, GlobalizationError> {
    globalize_with(tpa, build_extended_twist(tpa)?)
}

/// The construction for a given extended twist.
pub fn globalize_with(tpa: &VerifiedAction, twist: ExtendedTwist) -> Result<GlobalizationResult, GlobalizationError> {
    let g = tpa.group();
    let base = tpa.ring();
    let m = base.num_blocks();
    let functions = FunctionRing::new(g.order(), base);
    let f_ring = functions.ring().clone();
    let mut wt_inv = vec![Vec::with_capacity(g.order()); g.order()];
    for x in g.elements() {
        for y in g.elements() {
            let inv = twist.get(x, y).inverse().map_err(|e| GlobalizationError::Invariant(format!("wt[{x},{y}]: {e}")))?;
            wt_inv[x].push(inv);
        }
    }
    let mut betas = Vec::with_capacity(g.order());
    for x in g.elements() {
        let mut maps = Vec::with_capacity(g.order() * m);
        for h in g.elements() {
            let c = twist.get(g.inv(h), x);
            let src = g.mul(g.inv(x), h);
            for l in 0..m {
                maps.push((functions.block(src, l), functions.block(h, l), c.block(l).clone()));
            }
        }
        betas.push(PartialIso::new(&f_ring, maps)?);
    }
    let u: Vec<Vec<RingElement>> = g
        .elements()
        .map(|x| {
            g.elements()
                .map(|y| {
                    let values: Vec<RingElement> = g
                        .elements()
                        .map(|t| {
                            let ti = g.inv(t);
                            &(twist.get(ti, x) * twist.get(g.mul(ti, x), y)) * &wt_inv[ti][g.mul(x, y)]
                        })
                        .collect();
                    functions.from_values(&values)
                })
                .collect()
        })
        .collect();
    let all = f_ring.all_blocks();
    let ambient = TwistedPartialAction::new(g.clone(), f_ring.clone(), vec![all; g.order()], betas, u)?;
    let ambient = TwistedGlobalAction::new(ambient)?;

    let layout = Layout::of_ring(&f_ring);
    let spanning = base.spanning_set(&base.all_blocks());
    let mut b = Span::new(layout);
    let mut one_b = f_ring.zero();
    let phi_one = phi(tpa, &functions, &base.one());
    for x in g.elements() {
        for a in &spanning {
            b.insert(&flatten(&ambient.alpha(x).apply(&phi(tpa, &functions, a))));
        }
        one_b = join(&one_b, &ambient.alpha(x).apply(&phi_one));
    }
    Ok(GlobalizationResult {
        action: tpa.clone(),
        twist,
        functions,
        ambient,
        b,
        one_b,
    })
}

fn span_of<'a>(layout: &Layout, items: impl IntoIterator<Item = &'a RingElement>) -> Span {
    Span::from_vectors(layout.clone(), items.into_iter().map(flatten))
}

/// Exponents of `|X cap Y| = |X| |Y| / |X + Y|`, per prime.
fn intersection_order(x: &Span, y: &Span) -> std::collections::BTreeMap<u64, u32> {
    let mut sum = x.clone();
    for v in y.generators() {
        sum.insert(&v);
    }
    let (ox, oy, os) = (x.order_exponents(), y.order_exponents(), sum.order_exponents());
    os.iter()
        .map(|(p, s)| (*p, ox.get(p).copied().unwrap_or(0) + oy.get(p).copied().unwrap_or(0) - s))
        .collect()
}

fn same_exponents(a: &std::collections::BTreeMap<u64, u32>, b: &std::collections::BTreeMap<u64, u32>) -> bool {
    a.keys()
        .chain(b.keys())
        .all(|p| a.get(p).copied().unwrap_or(0) == b.get(p).copied().unwrap_or(0))
}

/// Checks that `glob` globalizes `tpa`: `phi` is an injective homomorphism onto
/// an ideal of `B`, `B` is the sum of the `beta_g(phi(A))`, the domain,
/// intertwining and twist identities hold, `u` preserves `B`, and `(F, beta, u)`
/// satisfies the global composition and cocycle laws.
pub fn verify_globalization(tpa: &TwistedPartialAction, glob: &GlobalizationResult) -> Report {
    let g = tpa.group();
    let base = tpa.ring();
    let functions = &glob.functions;
    let f_ring = functions.ring();
    let layout = Layout::of_ring(f_ring);
    let all = base.all_blocks();
    let spanning = base.spanning_set(&all);
    let phi = |a: &RingElement| phi(tpa, functions, a);
    let phi_a: Vec<RingElement> = spanning.iter().map(phi).collect();
    let phi_span = span_of(&layout, &phi_a);
    let b_gens = glob.b_generators();
    let mut report = Report::new("globalize");

    let mut inj = Check::new("phi-injective", "phi is a monomorphism A -> F");
    let a_span = span_of(&Layout::of_ring(base), &spanning);
    inj.record(same_exponents(&phi_span.order_exponents(), &a_span.order_exponents()), || {
        json!({"phi_order": phi_span.order_exponents(), "a_order": a_span.order_exponents()})
    });
    report.push(inj);

    let mut hom = Check::new("phi-multiplicative", "phi(ab) = phi(a) phi(b)");
    for (a, pa) in spanning.iter().zip(&phi_a) {
        for (b, pb) in spanning.iter().zip(&phi_a) {
            hom.record(phi(&(a * b)) == pa * pb, || json!({"a": format!("{a:?}"), "b": format!("{b:?}")}));
        }
    }
    report.push(hom);

    let mut ideal = Check::new("ideal", "phi(A) is an ideal of B");
    for b in &b_gens {
        for pa in &phi_a {
            for prod in [b * pa, pa * b] {
                ideal.record(phi_span.contains(&flatten(&prod)), || json!({"b": format!("{b:?}"), "phi_a": format!("{pa:?}")}));
            }
        }
    }
    report.push(ideal);

    let mut sum = Check::new("span", "B = sum_g beta_g(phi(A))");
    let images: Vec<Span> = g
        .elements()
        .map(|x| span_of(&layout, &phi_a.iter().map(|p| glob.beta(x).apply(p)).collect::<Vec<_>>()))
        .collect();
    let mut total = Span::new(layout.clone());
    for s in &images {
        for v in s.generators() {
            total.insert(&v);
        }
    }
    sum.record(total.equals(&glob.b), || json!({"sum_log_order": total.log_cardinality(), "b_log_order": glob.b.log_cardinality()}));
    report.push(sum);

    let mut closure = Check::new("b-closure", "B is a subring of F stable under every beta_g, with unity 1_B");
    closure.record(glob.contains(&glob.one_b), || json!({"reason": "1_B not in B"}));
    for (i, b) in b_gens.iter().enumerate() {
        closure.record(&glob.one_b * b == *b && b * &glob.one_b == *b, || json!({"b": format!("{b:?}"), "reason": "1_B is not a unity"}));
        for c in &b_gens[i..] {
            for prod in [b * c, c * b] {
                closure.record(glob.contains(&prod), || json!({"b": format!("{b:?}"), "c": format!("{c:?}")}));
            }
        }
        for x in g.elements() {
            let moved = glob.beta(x).apply(b);
            closure.record(glob.contains(&moved), || json!({"x": x, "b": format!("{b:?}")}));
        }
    }
    report.push(closure);

    let mut deltas = Check::new("deltas", "phi(D_g) = phi(A) cap beta_g(phi(A))");
    for x in g.elements() {
        let d = base.spanning_set(tpa.domain(x));
        let pd: Vec<RingElement> = d.iter().map(phi).collect();
        let inside = pd.iter().all(|p| phi_span.contains(&flatten(p)) && images[x].contains(&flatten(p)));
        let order = intersection_order(&phi_span, &images[x]);
        let pd_span = span_of(&layout, &pd);
        deltas.record(inside && same_exponents(&order, &pd_span.order_exponents()), || {
            json!({"g": x, "contained": inside, "intersection_order": order, "phi_d_order": pd_span.order_exponents()})
        });
    }
    report.push(deltas);

    let mut inter = Check::new("intertwining", "phi(alpha_g(a)) = beta_g(phi(a)) on D_{g^-1}");
    for x in g.elements() {
        for a in base.spanning_set(tpa.domain(g.inv(x))) {
            let lhs = phi(&tpa.alpha(x).apply(&a));
            let rhs = glob.beta(x).apply(&phi(&a));
            inter.record(lhs == rhs, || json!({"g": x, "a": format!("{a:?}"), "lhs": format!("{lhs:?}"), "rhs": format!("{rhs:?}")}));
        }
    }
    report.push(inter);

    let mut right = Check::new("twist-right", "phi(a w[g,h]) = phi(a) u[g,h] on D_g D_gh");
    let mut left = Check::new("twist-left", "phi(w[g,h] a) = u[g,h] phi(a) on D_g D_gh");
    let mut phitw = Check::new("phi-twist", "phi(w[g,h]) = phi(1_g 1_gh) u[g,h]");
    for x in g.elements() {
        for y in g.elements() {
            let dd = tpa.dd(x, g.mul(x, y));
            let w = tpa.w(x, y);
            let u = glob.u(x, y);
            for a in base.spanning_set(&dd) {
                let pa = phi(&a);
                right.record(phi(&(&a * w)) == &pa * u, || json!({"g": x, "h": y, "a": format!("{a:?}")}));
                left.record(phi(&(w * &a)) == u * &pa, || json!({"g": x, "h": y, "a": format!("{a:?}")}));
            }
            let lhs = phi(w);
            let rhs = &phi(&base.idempotent(&dd)) * u;
            phitw.record(lhs == rhs, || json!({"g": x, "h": y, "lhs": format!("{lhs:?}"), "rhs": format!("{rhs:?}")}));
        }
    }
    report.push(right);
    report.push(left);
    report.push(phitw);

    let mut inv = Check::new("invariant", "u[g,h] B = B = B u[g,h]");
    for x in g.elements() {
        for y in g.elements() {
            let u = glob.u(x, y);
            let lefts: Vec<RingElement> = b_gens.iter().map(|b| u * b).collect();
            let rights: Vec<RingElement> = b_gens.iter().map(|b| b * u).collect();
            let ok = span_of(&layout, &lefts).equals(&glob.b) && span_of(&layout, &rights).equals(&glob.b);
            inv.record(ok, || json!({"g": x, "h": y}));
        }
    }
    report.push(inv);

    let mut norm = Check::new("u-normalization", "u[1,g] = u[g,1] = 1");
    for x in g.elements() {
        for (a, b) in [(g.identity(), x), (x, g.identity())] {
            norm.record(*glob.u(a, b) == f_ring.one(), || json!({"g": a, "h": b}));
        }
    }
    report.push(norm);

    let mut cocycle = Check::new("u-cocycle", "beta_g(u[h,t]) u[g,ht] = u[g,h] u[gh,t]");
    for x in g.elements() {
        for y in g.elements() {
            for z in g.elements() {
                let lhs = &glob.beta(x).apply(glob.u(y, z)) * glob.u(x, g.mul(y, z));
                let rhs = glob.u(x, y) * glob.u(g.mul(x, y), z);
                cocycle.record(lhs == rhs, || json!({"g": x, "h": y, "t": z}));
            }
        }
    }
    report.push(cocycle);

    let mut comp = Check::new("betacomp", "beta_g(beta_h(f)) = u[g,h] beta_gh(f) u[g,h]^-1");
    let f_spanning = f_ring.spanning_set(&f_ring.all_blocks());
    for x in g.elements() {
        for y in g.elements() {
            let u = glob.u(x, y);
            let Ok(u_inv) = u.inverse() else {
                comp.fail(json!({"g": x, "h": y, "reason": "u[g,h] is not a unit"}));
                continue;
            };
            for f in &f_spanning {
                let lhs = glob.beta(x).apply(&glob.beta(y).apply(f));
                let rhs = &(u * &glob.beta(g.mul(x, y)).apply(f)) * &u_inv;
                comp.record(lhs == rhs, || json!({"g": x, "h": y, "f": format!("{f:?}")}));
            }
        }
    }
    report.push(comp);

    report.data = Some(json!({
        "log_cardinality": glob.log_cardinality(),
        "cardinality": glob.cardinality().map(|c| c.to_string()),
        "function_ring_blocks": f_ring.num_blocks(),
    }));
    report
}

#[cfg(test)]
mod tests;
