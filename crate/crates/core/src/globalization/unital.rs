//! `B` as a product of blocks: one cell `R_g = beta_g(phi(R_1))` per orbit and
//! representative `g` in `Lambda'`, with `psi : B -> prod R_g` and its inverse.

use serde_json::json;

use super::{GlobalModel, GlobalizationError, GlobalizationResult};
use crate::action::{PartialIso, TwistedGlobalAction, TwistedPartialAction};
use crate::group::Elem;
use crate::orbit::decompose_orbits;
use crate::report::{Check, Report};
use crate::ring::{BlockEmbedding, BlockMatrix, BlockSet, ProductRing, RingElement};

/// Cell `(orbit, g)`: a copy of the orbit's base block placed at `f|_g`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cell {
    pub orbit: usize,
    pub rep: Elem,
    pub base_block: usize,
}

#[derive(Clone, Debug)]
pub struct UnitalStructure {
    cells: Vec<Cell>,
    ring: ProductRing,
    /// `(c, c^-1)` with `c = wt[g^-1,g]` at the base block, per cell.
    conj: Vec<(BlockMatrix, BlockMatrix)>,
    /// Block of `F` read by each cell.
    source_blocks: Vec<usize>,
}

impl UnitalStructure {
    pub fn build(glob: &GlobalizationResult) -> Result<Self, GlobalizationError> {
        let g = glob.action().group();
        let base = glob.action().ring();
        let mut cells = Vec::new();
        let mut conj = Vec::new();
        let mut source_blocks = Vec::new();
        for (mu, orbit) in glob.twist().orbits().iter().enumerate() {
            let b = orbit.base_block();
            for &rep in orbit.structure().reps() {
                let c = glob.twist().get(g.inv(rep), rep).block(b).clone();
                let ci = c
                    .inverse()
                    .ok_or_else(|| GlobalizationError::Invariant(format!("wt[{},{rep}] is not a unit at block {b}", g.inv(rep))))?;
                cells.push(Cell { orbit: mu, rep, base_block: b });
                conj.push((c, ci));
                source_blocks.push(glob.functions().block(rep, b));
            }
        }
        let ring = ProductRing::new(cells.iter().map(|c| base.block(c.base_block)).collect());
        Ok(UnitalStructure { cells, ring, conj, source_blocks })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// The product of blocks `B-hat`.
    pub fn ring(&self) -> &ProductRing {
        &self.ring
    }

    /// `psi(f)` at cell `(mu, g)` is `c^-1 (f|_g)_{b_mu} c`.
    pub fn psi(&self, f: &RingElement) -> RingElement {
        let mut out = self.ring.zero();
        for (i, (&src, (c, ci))) in self.source_blocks.iter().zip(&self.conj).enumerate() {
            out.set_block(i, ci.mul(f.block(src)).mul(c));
        }
        out
    }

    /// `iota(r) = sum_cells beta_g(phi(r_cell at b_mu))`.
    pub fn iota(&self, glob: &GlobalizationResult, r: &RingElement) -> RingElement {
        let base = glob.action().ring();
        let mut out = glob.functions().ring().zero();
        for (i, cell) in self.cells.iter().enumerate() {
            let a = base.embed_block(cell.base_block, r.block(i).clone());
            out = &out + &glob.beta(cell.rep).apply(&glob.phi(&a));
        }
        out
    }

    /// The global action transported to `B-hat` by `psi`, with `psi phi` as
    /// the embedding of `A`.
    pub fn model(&self, glob: &GlobalizationResult) -> Result<GlobalModel, GlobalizationError> {
        let tpa = glob.action();
        let g = tpa.group();
        let mut betas = Vec::with_capacity(g.order());
        for x in g.elements() {
            let e = BlockEmbedding::from_map(&self.ring, &self.ring, |r| self.psi(&glob.beta(x).apply(&self.iota(glob, r))))
                .ok_or_else(|| GlobalizationError::Invariant(format!("beta_{x} is not blockwise on the cells")))?;
            let maps = (0..self.ring.num_blocks()).map(|i| (i, e.block_image(i), e.conjugator(i).clone())).collect();
            betas.push(PartialIso::new(&self.ring, maps)?);
        }
        let one_b = glob.one_b();
        let u = g
            .elements()
            .map(|x| g.elements().map(|y| self.psi(&(glob.u(x, y) * one_b))).collect())
            .collect();
        let all = self.ring.all_blocks();
        let action = TwistedPartialAction::new(g.clone(), self.ring.clone(), vec![all; g.order()], betas, u)?;
        let action = TwistedGlobalAction::new(action)?;
        let phi = BlockEmbedding::from_map(tpa.ring(), &self.ring, |a| self.psi(&glob.phi(a)))
            .ok_or_else(|| GlobalizationError::Invariant("psi phi is not blockwise".into()))?;
        Ok(GlobalModel::new((**tpa).clone(), action, phi)?)
    }
}

/// Support of a central idempotent of `F`.
fn support(e: &RingElement) -> BlockSet {
    e.support()
}

/// Checks that `psi` identifies `B` with the product of the cells: the coset
/// criterion for the blocks `beta_x(R_1)`, their transport by `beta`,
/// compatibility with projections, bijectivity, and the orbit decomposition.
pub fn unital_structure(glob: &GlobalizationResult) -> Report {
    let mut report = Report::new("unital-structure");
    let us = match UnitalStructure::build(glob) {
        Ok(us) => us,
        Err(e) => {
            let mut c = Check::new("isomorphism", "psi : B -> prod R_g is an isomorphism");
            c.fail(json!({"error": e.to_string()}));
            report.push(c);
            return report;
        }
    };
    let tpa = glob.action();
    let g = tpa.group();
    let base = tpa.ring();

    let mut coset = Check::new("coset-criterion", "beta_x(R_1) = beta_y(R_1) iff x^-1 y in H");
    let mut transport = Check::new("block-transport", "beta_x(R_g) = R_{bar(xg)}");
    for orbit in glob.twist().orbits() {
        let ts = orbit.structure();
        let r1 = glob.phi(&base.idempotent(&BlockSet::singleton(orbit.base_block())));
        let moved: Vec<BlockSet> = g.elements().map(|x| support(&glob.beta(x).apply(&r1))).collect();
        for x in g.elements() {
            for y in g.elements() {
                let same = moved[x] == moved[y];
                let in_h = ts.stabilizer().contains(g.mul(g.inv(x), y));
                coset.record(same == in_h, || json!({"x": x, "y": y, "same_block": same, "in_stabilizer": in_h}));
            }
        }
        for x in g.elements() {
            for &rep in ts.reps() {
                let lhs = support(&glob.beta(x).apply(&glob.beta(rep).apply(&r1)));
                let target = ts.bar(g.mul(x, rep));
                transport.record(lhs == moved[target], || json!({"x": x, "g": rep, "bar": target}));
            }
        }
    }
    report.push(coset);
    report.push(transport);

    let b_gens = glob.b_generators();
    let mut proj = Check::new("projection", "psi is multiplicative on B and psi(f 1_{R_g}) is the R_g part of psi(f)");
    for (i, f) in b_gens.iter().enumerate() {
        for h in &b_gens[i..] {
            for (l, r) in [(f, h), (h, f)] {
                proj.record(us.psi(&(l * r)) == &us.psi(l) * &us.psi(r), || json!({"f": format!("{l:?}"), "h": format!("{r:?}")}));
            }
        }
        for (c, cell) in us.cells().iter().enumerate() {
            let unit = glob.beta(cell.rep).apply(&glob.phi(&base.idempotent(&BlockSet::singleton(cell.base_block))));
            let lhs = us.psi(&(f * &unit));
            let rhs = us.psi(f).restrict_to(&BlockSet::singleton(c));
            proj.record(lhs == rhs, || json!({"f": format!("{f:?}"), "cell": c}));
        }
    }
    report.push(proj);

    let mut iso = Check::new("isomorphism", "psi : B -> prod R_g is bijective with inverse iota");
    let hat_span = us.ring.spanning_set(&us.ring.all_blocks());
    for r in &hat_span {
        let back = us.iota(glob, r);
        iso.record(glob.contains(&back) && us.psi(&back) == *r, || json!({"r": format!("{r:?}")}));
    }
    for f in &b_gens {
        iso.record(us.iota(glob, &us.psi(f)) == *f, || json!({"f": format!("{f:?}")}));
    }
    let (lb, lh) = (glob.log_cardinality(), us.ring.log_cardinality());
    iso.record((lb - lh).abs() < 1e-9, || json!({"log_b": lb, "log_model": lh}));
    report.push(iso);

    let mut unity = Check::new("unity", "psi(1_B) = 1 and iota(1) = 1_B");
    unity.record(us.psi(glob.one_b()) == us.ring.one(), || json!({"psi_one_b": format!("{:?}", us.psi(glob.one_b()))}));
    unity.record(us.iota(glob, &us.ring.one()) == *glob.one_b(), || json!({"reason": "iota(1) differs from 1_B"}));
    report.push(unity);

    let mut corr = Check::new("orbit-correspondence", "orbits of the model correspond one to one to orbits of A");
    let mut orbit_global = Check::new("orbit-globalization", "each orbit part of the model globalizes the orbit restriction");
    match us.model(glob) {
        Ok(model) => {
            let a_orbits = decompose_orbits(tpa);
            let m_orbits = decompose_orbits(model.action());
            corr.record(a_orbits.len() == m_orbits.len(), || json!({"a_orbits": a_orbits.len(), "model_orbits": m_orbits.len()}));
            for (mu, orbit) in glob.twist().orbits().iter().enumerate() {
                let cells: BlockSet = (0..us.cells.len()).filter(|&c| us.cells[c].orbit == mu).collect();
                let hit = m_orbits.orbits().contains(&cells);
                let image = model.phi().map_blocks(&orbit.blocks().iter().copied().collect());
                corr.record(hit && image.is_subset(&cells), || json!({"orbit": mu, "cells": format!("{cells:?}")}));
                let blocks: BlockSet = orbit.blocks().iter().copied().collect();
                match model.orbit_part(&blocks) {
                    Ok(part) => {
                        let r = part.verify_model();
                        orbit_global.record(r.passed(), || json!({"orbit": mu, "failures": r.failures().map(|c| c.name.clone()).collect::<Vec<_>>()}));
                    }
                    Err(e) => orbit_global.fail(json!({"orbit": mu, "error": e.to_string()})),
                }
            }
        }
        Err(e) => {
            corr.fail(json!({"error": e.to_string()}));
            orbit_global.fail(json!({"error": e.to_string()}));
        }
    }
    report.push(corr);
    report.push(orbit_global);
    report.data = Some(json!({"cells": us.cells.len(), "log_cardinality": lh}));
    report
}

impl GlobalizationResult {
    /// `B` realised as a product of blocks, with the induced global action.
    pub fn model(&self) -> Result<GlobalModel, GlobalizationError> {
        UnitalStructure::build(self)?.model(self)
    }
}
