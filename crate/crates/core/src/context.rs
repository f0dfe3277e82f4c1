//! Four-facet concept context: lineage paths toward the roots, direct
//! children, object-property neighbours and datatype-property neighbours.
//!
//! All lists are in canonical order (lexicographic by IRI) so extraction is
//! deterministic.

use std::collections::BTreeSet;

use crate::onto_io::{ConceptId, Ontology, PropertyId, PropertyKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContextConfig {
    /// Maximum number of nodes kept per lineage path.
    pub max_depth: usize,
    /// Maximum number of lineage paths kept.
    pub max_paths: usize,
}

impl Default for ContextConfig {
    fn default() -> Self {
        ContextConfig {
            max_depth: 6,
            max_paths: 8,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContextBundle {
    /// Each path lists ancestors nearest first.
    pub lineage_paths: Vec<Vec<ConceptId>>,
    pub children: Vec<ConceptId>,
    pub obj_neighbors: Vec<ConceptId>,
    /// Datatype properties with the concept in their domain. Each stands for a
    /// pseudo-concept carrying the property's label, since a literal range has
    /// no concept node.
    pub data_neighbors: Vec<PropertyId>,
}

impl ContextBundle {
    pub fn is_empty(&self) -> bool {
        self.lineage_paths.is_empty()
            && self.children.is_empty()
            && self.obj_neighbors.is_empty()
            && self.data_neighbors.is_empty()
    }
}

/// All maximal simple upward paths from `c`, each truncated to `max_depth`
/// nodes; duplicates created by truncation are merged, the result is sorted
/// and cut to `max_paths`.
///
/// A path stops at a root or where every parent is already on the path
/// (or is `c` itself), so subclass cycles terminate.
pub fn enumerate_lineage_paths(
    o: &Ontology,
    c: &ConceptId,
    max_depth: usize,
    max_paths: usize,
) -> Vec<Vec<ConceptId>> {
    if max_depth == 0 || max_paths == 0 {
        return Vec::new();
    }
    let mut found = BTreeSet::new();
    let mut path = Vec::with_capacity(max_depth);
    for p in o.parents(c) {
        if p != c {
            path.push(p.clone());
            extend_upward(o, c, &mut path, max_depth, &mut found);
            path.pop();
        }
    }
    found.into_iter().take(max_paths).collect()
}

fn extend_upward(
    o: &Ontology,
    focal: &ConceptId,
    path: &mut Vec<ConceptId>,
    max_depth: usize,
    found: &mut BTreeSet<Vec<ConceptId>>,
) {
    let last = path.last().expect("non-empty path");
    if path.len() == max_depth {
        found.insert(path.clone());
        return;
    }
    let next: Vec<ConceptId> = o
        .parents(last)
        .iter()
        .filter(|p| *p != focal && !path.contains(p))
        .cloned()
        .collect();
    if next.is_empty() {
        found.insert(path.clone());
        return;
    }
    for p in next {
        path.push(p);
        extend_upward(o, focal, path, max_depth, found);
        path.pop();
    }
}

/// Direct subclasses of `c`, excluding `c` itself.
pub fn one_hop_children(o: &Ontology, c: &ConceptId) -> Vec<ConceptId> {
    o.children(c).iter().filter(|d| *d != c).cloned().collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PropertyNeighbors {
    pub objects: Vec<ConceptId>,
    pub datatypes: Vec<PropertyId>,
}

/// Concepts one object-property hop away in either direction, and the
/// datatype properties whose domain contains `c`.
pub fn property_neighbors(o: &Ontology, c: &ConceptId) -> PropertyNeighbors {
    let mut objects = BTreeSet::new();
    let mut datatypes = BTreeSet::new();
    for p in o.properties() {
        match p.kind {
            PropertyKind::Object => {
                if p.domains.contains(c) {
                    objects.extend(p.ranges.iter().cloned());
                }
                if p.ranges.contains(c) {
                    objects.extend(p.domains.iter().cloned());
                }
            }
            PropertyKind::Datatype => {
                if p.domains.contains(c) {
                    datatypes.insert(p.id.clone());
                }
            }
        }
    }
    objects.remove(c);
    PropertyNeighbors {
        objects: objects.into_iter().collect(),
        datatypes: datatypes.into_iter().collect(),
    }
}

pub fn build_context(o: &Ontology, c: &ConceptId, cfg: &ContextConfig) -> ContextBundle {
    let neighbors = property_neighbors(o, c);
    ContextBundle {
        lineage_paths: enumerate_lineage_paths(o, c, cfg.max_depth, cfg.max_paths),
        children: one_hop_children(o, c),
        obj_neighbors: neighbors.objects,
        data_neighbors: neighbors.datatypes,
    }
}
