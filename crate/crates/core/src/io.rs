//! JSON documents for actions and globalizations.
//!
//! Group elements are indices with `0` the identity; matrices are row-major
//! integer arrays reduced mod `p^e`. Parsing checks structure only; axioms
//! are left to the verifiers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::{PartialIso, TwistedGlobalAction, TwistedPartialAction};
use crate::corestriction::{apply_epsilon, EquivalenceWitness};
use crate::globalization::GlobalModel;
use crate::group::FiniteGroup;
use crate::ring::{is_prime, BlockEmbedding, BlockMatrix, BlockSet, BlockType, ProductRing, RingElement};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("schema error at {path}: {reason}")]
pub struct SchemaError {
    pub path: String,
    pub reason: String,
}

impl SchemaError {
    fn new(path: impl Into<String>, reason: impl ToString) -> Self {
        SchemaError { path: path.into(), reason: reason.to_string() }
    }
}

type Matrix = Vec<Vec<i64>>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDoc {
    pub order: usize,
    pub table: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockDoc {
    pub k: usize,
    pub p: u64,
    pub e: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingDoc {
    pub blocks: Vec<BlockDoc>,
}

/// Block permutation with conjugators keyed by target block; a missing
/// conjugator is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockMapDoc {
    pub block_map: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub conjugators: BTreeMap<String, Matrix>,
}

/// A ring element by block; missing blocks are zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementDoc {
    pub entries: BTreeMap<String, Matrix>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionDocument {
    pub group: GroupDoc,
    pub ring: RingDoc,
    pub domains: BTreeMap<String, Vec<usize>>,
    pub alpha: BTreeMap<String, BlockMapDoc>,
    /// Keyed by `"g,h"`; a missing pair is zero.
    pub twist: BTreeMap<String, ElementDoc>,
}

/// A globalization: the partial action, the global action and the embedding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub source: ActionDocument,
    pub global: ActionDocument,
    pub phi: BlockMapDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derived_by: Option<BTreeMap<String, ElementDoc>>,
}

fn from_str<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, SchemaError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        SchemaError::new(if path.is_empty() { "$".to_string() } else { path }, e.into_inner())
    })
}

pub fn parse(text: &str) -> Result<ActionDocument, SchemaError> {
    let doc: ActionDocument = from_str(text)?;
    doc.to_action()?;
    Ok(doc)
}

pub fn parse_model(text: &str) -> Result<ModelDocument, SchemaError> {
    let doc: ModelDocument = from_str(text)?;
    doc.to_model()?;
    Ok(doc)
}

fn key_index(path: &str, key: &str, bound: usize) -> Result<usize, SchemaError> {
    let i: usize = key.parse().map_err(|_| SchemaError::new(path, format!("key {key:?} is not an index")))?;
    if i >= bound {
        return Err(SchemaError::new(path, format!("index {i} out of range (< {bound})")));
    }
    Ok(i)
}

fn matrix(path: &str, shape: BlockType, rows: &Matrix) -> Result<BlockMatrix, SchemaError> {
    if rows.len() != shape.k || rows.iter().any(|r| r.len() != shape.k) {
        return Err(SchemaError::new(path, format!("expected a {0}x{0} matrix", shape.k)));
    }
    let m = shape.modulus() as i64;
    if rows.iter().flatten().any(|&x| x < 0 || x >= m) {
        return Err(SchemaError::new(path, format!("entry not reduced mod {m}")));
    }
    BlockMatrix::from_rows(shape, rows).ok_or_else(|| SchemaError::new(path, "invalid matrix"))
}

fn rows(m: &BlockMatrix) -> Matrix {
    m.rows().into_iter().map(|r| r.into_iter().map(|x| x as i64).collect()).collect()
}

fn ring_of(path: &str, doc: &RingDoc) -> Result<ProductRing, SchemaError> {
    let mut blocks = Vec::with_capacity(doc.blocks.len());
    for (i, b) in doc.blocks.iter().enumerate() {
        let at = |f: &str| format!("{path}.blocks[{i}].{f}");
        if !is_prime(b.p) {
            return Err(SchemaError::new(at("p"), "not prime"));
        }
        if b.k == 0 {
            return Err(SchemaError::new(at("k"), "must be positive"));
        }
        if b.e == 0 {
            return Err(SchemaError::new(at("e"), "must be positive"));
        }
        if b.p.checked_pow(b.e).is_none_or(|m| m > u32::MAX as u64) {
            return Err(SchemaError::new(at("e"), "modulus too large"));
        }
        blocks.push(BlockType::new(b.k, b.p, b.e));
    }
    Ok(ProductRing::new(blocks))
}

fn ring_doc(ring: &ProductRing) -> RingDoc {
    RingDoc { blocks: ring.blocks().iter().map(|b| BlockDoc { k: b.k, p: b.p, e: b.e }).collect() }
}

fn element(path: &str, ring: &ProductRing, doc: &ElementDoc) -> Result<RingElement, SchemaError> {
    let mut out = ring.zero();
    for (key, m) in &doc.entries {
        let b = key_index(&format!("{path}.entries"), key, ring.num_blocks())?;
        out.set_block(b, matrix(&format!("{path}.entries.{key}"), ring.block(b), m)?);
    }
    Ok(out)
}

fn element_doc(x: &RingElement) -> ElementDoc {
    let entries = x
        .blocks()
        .iter()
        .enumerate()
        .filter(|(_, m)| !m.is_zero())
        .map(|(i, m)| (i.to_string(), rows(m)))
        .collect();
    ElementDoc { entries }
}

/// `(source, target, conjugator)` triples of a block map document.
fn block_maps(path: &str, source: &ProductRing, target: &ProductRing, doc: &BlockMapDoc) -> Result<Vec<(usize, usize, BlockMatrix)>, SchemaError> {
    let mut conj = BTreeMap::new();
    for (key, m) in &doc.conjugators {
        let t = key_index(&format!("{path}.conjugators"), key, target.num_blocks())?;
        conj.insert(t, matrix(&format!("{path}.conjugators.{key}"), target.block(t), m)?);
    }
    let mut out = Vec::with_capacity(doc.block_map.len());
    for (i, &[s, t]) in doc.block_map.iter().enumerate() {
        let at = format!("{path}.block_map[{i}]");
        if s >= source.num_blocks() || t >= target.num_blocks() {
            return Err(SchemaError::new(at, "block out of range"));
        }
        if source.block(s) != target.block(t) {
            return Err(SchemaError::new(at, "blocks of different shape"));
        }
        let c = conj.remove(&t).unwrap_or_else(|| BlockMatrix::identity(target.block(t)));
        out.push((s, t, c));
    }
    if let Some(t) = conj.keys().next() {
        return Err(SchemaError::new(format!("{path}.conjugators.{t}"), "no block maps to this target"));
    }
    Ok(out)
}

fn block_map_doc(maps: impl IntoIterator<Item = (usize, usize, BlockMatrix)>) -> BlockMapDoc {
    let mut doc = BlockMapDoc::default();
    for (s, t, c) in maps {
        doc.block_map.push([s, t]);
        if !c.is_identity() {
            doc.conjugators.insert(t.to_string(), rows(&c));
        }
    }
    doc
}

impl ActionDocument {
    pub fn to_action(&self) -> Result<TwistedPartialAction, SchemaError> {
        if self.group.table.len() != self.group.order {
            return Err(SchemaError::new("group.table", format!("expected {} rows", self.group.order)));
        }
        let group = FiniteGroup::from_table(self.group.table.clone()).map_err(|e| SchemaError::new("group.table", e))?;
        if group.identity() != 0 {
            return Err(SchemaError::new("group.table", "element 0 is not the identity"));
        }
        let n = group.order();
        let ring = ring_of("ring", &self.ring)?;
        let mut domains = vec![None; n];
        for (key, blocks) in &self.domains {
            let g = key_index("domains", key, n)?;
            if let Some(&b) = blocks.iter().find(|&&b| b >= ring.num_blocks()) {
                return Err(SchemaError::new(format!("domains.{key}"), format!("block {b} out of range")));
            }
            domains[g] = Some(blocks.iter().copied().collect::<BlockSet>());
        }
        let domains = domains
            .into_iter()
            .enumerate()
            .map(|(g, d)| d.ok_or_else(|| SchemaError::new("domains", format!("missing domain for {g}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let mut alpha = vec![None; n];
        for (key, doc) in &self.alpha {
            let g = key_index("alpha", key, n)?;
            let path = format!("alpha.{key}");
            let maps = block_maps(&path, &ring, &ring, doc)?;
            alpha[g] = Some(PartialIso::new(&ring, maps).map_err(|e| SchemaError::new(&path, e))?);
        }
        let alpha = alpha
            .into_iter()
            .enumerate()
            .map(|(g, a)| a.ok_or_else(|| SchemaError::new("alpha", format!("missing map for {g}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let mut twist = vec![vec![ring.zero(); n]; n];
        for (key, doc) in &self.twist {
            let parts: Vec<&str> = key.split(',').map(str::trim).collect();
            let [a, b] = parts.as_slice() else {
                return Err(SchemaError::new("twist", format!("key {key:?} is not of the form \"g,h\"")));
            };
            let (g, h) = (key_index("twist", a, n)?, key_index("twist", b, n)?);
            twist[g][h] = element(&format!("twist.{key}"), &ring, doc)?;
        }
        TwistedPartialAction::new(group, ring, domains, alpha, twist).map_err(|e| SchemaError::new("$", e))
    }

    pub fn from_action(t: &TwistedPartialAction) -> Self {
        let g = t.group();
        let domains = g.elements().map(|x| (x.to_string(), t.domain(x).iter().collect())).collect();
        let alpha = g
            .elements()
            .map(|x| {
                let maps = t.alpha(x).block_isos().iter().map(|i| (i.source, i.target, i.conjugator().clone()));
                (x.to_string(), block_map_doc(maps))
            })
            .collect();
        let mut twist = BTreeMap::new();
        for x in g.elements() {
            for y in g.elements() {
                let w = t.w(x, y);
                if !w.is_zero() {
                    twist.insert(format!("{x},{y}"), element_doc(w));
                }
            }
        }
        ActionDocument {
            group: GroupDoc { order: g.order(), table: g.table().to_vec() },
            ring: ring_doc(t.ring()),
            domains,
            alpha,
            twist,
        }
    }
}

impl ModelDocument {
    pub fn to_model(&self) -> Result<GlobalModel, SchemaError> {
        let source = self.source.to_action().map_err(|e| SchemaError::new(format!("source.{}", e.path), e.reason))?;
        let global = self.global.to_action().map_err(|e| SchemaError::new(format!("global.{}", e.path), e.reason))?;
        let global = TwistedGlobalAction::new(global).map_err(|e| SchemaError::new("global.domains", e))?;
        let maps = block_maps("phi", source.ring(), global.ring(), &self.phi)?;
        let mut images = vec![None; source.ring().num_blocks()];
        for (s, t, c) in maps {
            if images[s].replace((t, c)).is_some() {
                return Err(SchemaError::new("phi.block_map", format!("block {s} mapped twice")));
            }
        }
        let images = images
            .into_iter()
            .enumerate()
            .map(|(s, i)| i.ok_or_else(|| SchemaError::new("phi.block_map", format!("block {s} is not mapped"))))
            .collect::<Result<Vec<_>, _>>()?;
        let phi = BlockEmbedding::new(source.ring(), global.ring(), images).map_err(|e| SchemaError::new("phi", e))?;
        let model = GlobalModel::new(source, global, phi).map_err(|e| SchemaError::new("$", e))?;
        match &self.derived_by {
            None => Ok(model),
            Some(values) => {
                let action = model.action();
                let n = action.group().order();
                let mut eps = vec![None; n];
                for (key, doc) in values {
                    let g = key_index("derived_by", key, n)?;
                    eps[g] = Some(element(&format!("derived_by.{key}"), action.ring(), doc)?);
                }
                let eps = eps
                    .into_iter()
                    .enumerate()
                    .map(|(g, e)| e.ok_or_else(|| SchemaError::new("derived_by", format!("missing unit for {g}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                let eps = EquivalenceWitness::new(action, eps).map_err(|e| SchemaError::new("derived_by", e))?;
                // Recover the base globalization, then redo the recorded transform.
                let undone = apply_epsilon(model.action(), &eps.inverse()).map_err(|e| SchemaError::new("derived_by", e))?;
                let undone = TwistedGlobalAction::new(undone).map_err(|e| SchemaError::new("derived_by", e))?;
                let undone = GlobalModel::from_parts(undone, model.phi().clone()).map_err(|e| SchemaError::new("derived_by", e))?;
                let redone = undone.coboundary_variant(&eps).map_err(|e| SchemaError::new("derived_by", e))?;
                if redone.source() != model.source() || redone.action() != model.action() {
                    return Err(SchemaError::new("derived_by", "source is not the restriction of the global action"));
                }
                Ok(redone)
            }
        }
    }

    pub fn from_model(m: &GlobalModel) -> Self {
        let phi = m.phi();
        let maps = (0..phi.source().num_blocks()).map(|i| (i, phi.block_image(i), phi.conjugator(i).clone()));
        ModelDocument {
            source: ActionDocument::from_action(m.source()),
            global: ActionDocument::from_action(m.action()),
            phi: block_map_doc(maps),
            derived_by: m.derived_by().map(|eps| {
                eps.values().iter().enumerate().map(|(g, e)| (g.to_string(), element_doc(e))).collect()
            }),
        }
    }
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    serde_json::to_string_pretty(doc).expect("documents serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::globalization::globalize;

    #[test]
    fn fixtures_round_trip() {
        for (name, t) in fixtures::positives() {
            let doc = ActionDocument::from_action(&t);
            let text = to_json(&doc);
            let back = parse(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(back, doc);
            assert_eq!(back.to_action().unwrap(), t, "{name}");
        }
    }

    #[test]
    fn non_prime_is_rejected() {
        let mut doc = ActionDocument::from_action(&fixtures::fix_b());
        doc.ring.blocks[0].p = 6;
        let err = parse(&to_json(&doc)).unwrap_err();
        assert_eq!(err.path, "ring.blocks[0].p");
        assert_eq!(err.reason, "not prime");
    }

    #[test]
    fn missing_normalization_parses_but_fails_axioms() {
        let mut doc = ActionDocument::from_action(&fixtures::fix_b());
        doc.twist.remove("0,1");
        let t = parse(&to_json(&doc)).unwrap().to_action().unwrap();
        assert!(!t.verify_axioms().check("normalization").unwrap().passed());
    }

    #[test]
    fn wrong_types_report_a_path() {
        let text = to_json(&ActionDocument::from_action(&fixtures::fix_a())).replace("\"order\": 3", "\"order\": \"three\"");
        let err = parse(&text).unwrap_err();
        assert_eq!(err.path, "group.order");
    }

    #[test]
    fn models_round_trip() {
        let t = fixtures::fix_b().verified().unwrap();
        let m = globalize(&t).unwrap().model().unwrap();
        let b = m.action().ring();
        let eps = EquivalenceWitness::new(m.action(), vec![b.one(), b.scalar(3)]).unwrap();
        for model in [m.clone(), m.coboundary_variant(&eps).unwrap()] {
            let doc = ModelDocument::from_model(&model);
            let back = parse_model(&to_json(&doc)).unwrap().to_model().unwrap();
            assert_eq!(back, model);
        }
    }
}
