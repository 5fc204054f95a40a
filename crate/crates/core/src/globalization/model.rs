//! A globalization as data: a global action on a product of blocks and a
//! block embedding of the partial action's ring onto a direct factor.

use serde_json::json;
use thiserror::Error;

use crate::action::{pull_back, push_forward, ActionError, TwistedGlobalAction, TwistedPartialAction};
use crate::corestriction::{apply_epsilon, check_equivalent, CorestrictionError, EquivalenceWitness};
use crate::orbit::decompose_orbits;
use crate::report::{Check, Report};
use crate::ring::{BlockEmbedding, BlockSet, RingError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Corestriction(#[from] CorestrictionError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("embedding does not match the rings: {0}")]
    Mismatch(String),
}

/// `(B, beta, u)` with `phi : A -> B` onto the ideal `phi(A)`.
///
/// `derived_by` records the unit family a model was transformed by, when it
/// was obtained from another globalization by [`GlobalModel::coboundary_variant`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalModel {
    source: TwistedPartialAction,
    action: TwistedGlobalAction,
    phi: BlockEmbedding,
    derived_by: Option<EquivalenceWitness>,
}

impl GlobalModel {
    pub fn new(source: TwistedPartialAction, action: TwistedGlobalAction, phi: BlockEmbedding) -> Result<Self, ModelError> {
        if phi.source() != source.ring() || phi.target() != action.ring() {
            return Err(ModelError::Mismatch("phi must map the source ring into the global ring".into()));
        }
        if source.group() != action.group() {
            return Err(ModelError::Mismatch("groups differ".into()));
        }
        Ok(GlobalModel { source, action, phi, derived_by: None })
    }

    /// `phi` onto a direct factor of `global`, with the source read off as the
    /// restriction pulled back along `phi`.
    pub fn from_parts(global: TwistedGlobalAction, phi: BlockEmbedding) -> Result<Self, ModelError> {
        let restricted = global.restrict_to_blocks(&phi.image_blocks())?;
        let model = GlobalModel { source: restricted.clone(), action: global, phi, derived_by: None };
        let source = pull_back(&restricted, &model.inclusion(restricted.ring())?)?;
        Ok(GlobalModel { source, ..model })
    }

    /// The restriction of `global` to the ideal on `ideal`, with the inclusion.
    pub fn from_restriction(global: &TwistedGlobalAction, ideal: &BlockSet) -> Result<Self, ModelError> {
        let source = global.restrict_to_blocks(ideal)?;
        let targets: Vec<usize> = ideal.iter().collect();
        let phi = BlockEmbedding::from_targets(source.ring(), global.ring(), &targets)?;
        Self::new(source, global.clone(), phi)
    }

    /// The model with `beta` replaced by its transform under `eps` (a family
    /// of units of `B`); the source becomes the restriction of the new action.
    pub fn coboundary_variant(&self, eps: &EquivalenceWitness) -> Result<Self, ModelError> {
        let action = TwistedGlobalAction::new(apply_epsilon(&self.action, eps)?)?;
        let restricted = action.restrict_to_blocks(&self.phi.image_blocks())?;
        let inclusion = self.inclusion(restricted.ring())?;
        let source = pull_back(&restricted, &inclusion)?;
        Ok(GlobalModel { source, action, phi: self.phi.clone(), derived_by: Some(eps.clone()) })
    }

    /// The same globalization carried along a ring isomorphism `iso : B -> B'`.
    pub fn transport(&self, iso: &BlockEmbedding) -> Result<Self, ModelError> {
        let action = TwistedGlobalAction::new(push_forward(&self.action, iso)?)?;
        let derived_by = match &self.derived_by {
            Some(eps) => Some(EquivalenceWitness::new(&action, eps.values().iter().map(|e| iso.apply(e)).collect())?),
            None => None,
        };
        Ok(GlobalModel { source: self.source.clone(), action, phi: self.phi.then(iso), derived_by })
    }

    pub fn source(&self) -> &TwistedPartialAction {
        &self.source
    }

    pub fn action(&self) -> &TwistedGlobalAction {
        &self.action
    }

    pub fn phi(&self) -> &BlockEmbedding {
        &self.phi
    }

    pub fn derived_by(&self) -> Option<&EquivalenceWitness> {
        self.derived_by.as_ref()
    }

    /// `phi` as an isomorphism of `A` onto the sub-ring of its image blocks.
    fn inclusion(&self, sub: &crate::ring::ProductRing) -> Result<BlockEmbedding, ModelError> {
        let image: Vec<usize> = self.phi.image_blocks().iter().collect();
        let images = (0..self.phi.source().num_blocks())
            .map(|i| {
                let t = self.phi.block_image(i);
                (image.iter().position(|&x| x == t).expect("image block"), self.phi.conjugator(i).clone())
            })
            .collect();
        Ok(BlockEmbedding::new(self.phi.source(), sub, images)?)
    }

    /// Blocks of `B` in the orbits meeting `phi` of the given blocks of `A`.
    pub fn orbit_cells(&self, orbit: &BlockSet) -> BlockSet {
        let image = self.phi.map_blocks(orbit);
        decompose_orbits(&self.action)
            .orbits()
            .iter()
            .filter(|o| !o.intersection(&image).is_empty())
            .flat_map(|o| o.iter().collect::<Vec<_>>())
            .collect()
    }

    /// The same globalization with a recorded unit family undone, so that
    /// its source is the action it was derived from.
    pub fn underlying(&self) -> Result<Self, ModelError> {
        let Some(eps) = &self.derived_by else {
            return Ok(self.clone());
        };
        let action = TwistedGlobalAction::new(apply_epsilon(&self.action, &eps.inverse())?)?;
        let restricted = action.restrict_to_blocks(&self.phi.image_blocks())?;
        let source = pull_back(&restricted, &self.inclusion(restricted.ring())?)?;
        Ok(GlobalModel { source, action, phi: self.phi.clone(), derived_by: None })
    }

    /// The orbit ideal of the model containing `phi` of the given `A`-orbit,
    /// with the restricted source.
    pub fn orbit_part(&self, orbit: &BlockSet) -> Result<Self, ModelError> {
        let cells = self.orbit_cells(orbit);
        let action = TwistedGlobalAction::new(self.action.restrict_to_blocks(&cells)?)?;
        let source = self.source.restrict_to_blocks(orbit)?;
        let cell_list: Vec<usize> = cells.iter().collect();
        let images = orbit
            .iter()
            .map(|i| {
                let t = self.phi.block_image(i);
                cell_list
                    .iter()
                    .position(|&c| c == t)
                    .map(|p| (p, self.phi.conjugator(i).clone()))
                    .ok_or_else(|| ModelError::Mismatch(format!("block {i} leaves its orbit")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let phi = BlockEmbedding::new(source.ring(), action.ring(), images)?;
        let derived_by = None;
        Ok(GlobalModel { source, action, phi, derived_by })
    }

    /// Blockwise globalization checks: the global axioms, `phi(A)` an ideal
    /// whose translates cover `B`, the domain identity, intertwining, and the
    /// twist identities.
    pub fn verify_model(&self) -> Report {
        let t = &self.source;
        let g = t.group();
        let base = t.ring();
        let b = self.action.ring();
        let phi = &self.phi;
        let mut report = Report::new("global-model");
        report.extend_prefixed("global/", self.action.verify_axioms());

        let image = phi.image_blocks();
        let mut cover = Check::new("span", "B = sum_g beta_g(phi(A))");
        let covered = g
            .elements()
            .fold(BlockSet::empty(), |acc, x| acc.union(&self.action.alpha(x).image_blocks(&image)));
        cover.record(covered == b.all_blocks(), || json!({"covered": format!("{covered:?}")}));
        report.push(cover);

        let mut deltas = Check::new("deltas", "phi(D_g) = phi(A) cap beta_g(phi(A))");
        for x in g.elements() {
            let lhs = phi.map_blocks(t.domain(x));
            let rhs = image.intersection(&self.action.alpha(x).image_blocks(&image));
            deltas.record(lhs == rhs, || json!({"g": x, "phi_d": format!("{lhs:?}"), "intersection": format!("{rhs:?}")}));
        }
        report.push(deltas);

        let mut inter = Check::new("intertwining", "phi(alpha_g(a)) = beta_g(phi(a)) on D_{g^-1}");
        for x in g.elements() {
            for a in base.spanning_set(t.domain(g.inv(x))) {
                let lhs = phi.apply(&t.alpha(x).apply(&a));
                let rhs = self.action.alpha(x).apply(&phi.apply(&a));
                inter.record(lhs == rhs, || json!({"g": x, "a": format!("{a:?}")}));
            }
        }
        report.push(inter);

        let mut twist = Check::new("twist", "phi(a w[g,h]) = phi(a) u[g,h] and phi(w[g,h] a) = u[g,h] phi(a)");
        for x in g.elements() {
            for y in g.elements() {
                let u = self.action.w(x, y);
                let w = t.w(x, y);
                for a in base.spanning_set(&t.dd(x, g.mul(x, y))) {
                    let pa = phi.apply(&a);
                    let ok = phi.apply(&(&a * w)) == &pa * u && phi.apply(&(w * &a)) == u * &pa;
                    twist.record(ok, || json!({"g": x, "h": y, "a": format!("{a:?}")}));
                }
            }
        }
        report.push(twist);
        report
    }

    /// Restricts the global action to `phi(A)` and pulls it back along `phi`;
    /// the result must be the source under the identity witness.
    pub fn roundtrip(&self) -> Result<Report, ModelError> {
        let restricted = self.action.restrict_to_blocks(&self.phi.image_blocks())?;
        let inclusion = self.inclusion(restricted.ring())?;
        let pulled = pull_back(&restricted, &inclusion)?;
        let mut report = Report::new("roundtrip");
        let mut same = Check::new("domains", "the pulled back domains are the source domains");
        same.record(pulled.domains() == self.source.domains(), || {
            json!({"pulled": format!("{:?}", pulled.domains()), "source": format!("{:?}", self.source.domains())})
        });
        report.push(same);
        if report.passed() {
            report.extend(check_equivalent(&self.source, &pulled, &EquivalenceWitness::identity(&self.source))?);
        }
        Ok(report)
    }
}
