//! Ontology and reference-alignment ingestion.
//!
//! [`parse_ontology`] reads a closed subset of RDF/XML (named classes,
//! subclass edges, object and datatype properties with domains and ranges,
//! labels). [`parse_reference_alignment`] reads the OAEI Alignment format.

mod alignment;
mod rdfxml;
mod xml;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::{Error, Result};

pub use alignment::{parse_reference_alignment, write_alignment, AlignmentCell, ReferenceAlignment};
pub use rdfxml::{parse_ontology, write_ontology};

pub(crate) const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub(crate) const RDFS_NS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub(crate) const OWL_NS: &str = "http://www.w3.org/2002/07/owl#";
pub(crate) const XSD_NS: &str = "http://www.w3.org/2001/XMLSchema#";

/// IRI of a named class.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConceptId(pub String);

/// IRI of an object or datatype property.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PropertyId(pub String);

impl ConceptId {
    pub fn new(iri: impl Into<String>) -> Self {
        ConceptId(iri.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl PropertyId {
    pub fn new(iri: impl Into<String>) -> Self {
        PropertyId(iri.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PropertyKind {
    Object,
    Datatype,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyDecl {
    pub id: PropertyId,
    pub kind: PropertyKind,
    pub domains: BTreeSet<ConceptId>,
    /// Always empty for datatype properties.
    pub ranges: BTreeSet<ConceptId>,
    pub label: String,
}

/// A parsed ontology. Immutable once built; construct with [`OntologyBuilder`]
/// or [`parse_ontology`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ontology {
    iri: String,
    concepts: BTreeSet<ConceptId>,
    subclass_edges: BTreeSet<(ConceptId, ConceptId)>,
    properties: Vec<PropertyDecl>,
    labels: BTreeMap<ConceptId, String>,
    parents: BTreeMap<ConceptId, Vec<ConceptId>>,
    children: BTreeMap<ConceptId, Vec<ConceptId>>,
}

impl Ontology {
    pub fn iri(&self) -> &str {
        &self.iri
    }

    pub fn concepts(&self) -> &BTreeSet<ConceptId> {
        &self.concepts
    }

    pub fn contains_concept(&self, id: &ConceptId) -> bool {
        self.concepts.contains(id)
    }

    /// `(child, parent)` pairs.
    pub fn subclass_edges(&self) -> &BTreeSet<(ConceptId, ConceptId)> {
        &self.subclass_edges
    }

    /// Sorted by property IRI.
    pub fn properties(&self) -> &[PropertyDecl] {
        &self.properties
    }

    pub fn property(&self, id: &PropertyId) -> Result<&PropertyDecl> {
        self.properties
            .binary_search_by(|p| p.id.cmp(id))
            .map(|i| &self.properties[i])
            .map_err(|_| Error::UnknownEntity(id.0.clone()))
    }

    pub fn concept_label(&self, id: &ConceptId) -> Result<&str> {
        self.labels
            .get(id)
            .map(String::as_str)
            .ok_or_else(|| Error::UnknownEntity(id.0.clone()))
    }

    /// Direct superclasses, sorted by IRI. Empty for unknown ids.
    pub fn parents(&self, id: &ConceptId) -> &[ConceptId] {
        self.parents.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Direct subclasses, sorted by IRI. Empty for unknown ids.
    pub fn children(&self, id: &ConceptId) -> &[ConceptId] {
        self.children.get(id).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Label of a concept or property: `rdfs:label` when present, else the IRI
/// fragment.
pub fn entity_label<'a>(o: &'a Ontology, iri: &str) -> Result<&'a str> {
    let concept = ConceptId::new(iri);
    if let Some(label) = o.labels.get(&concept) {
        return Ok(label);
    }
    o.property(&PropertyId::new(iri)).map(|p| p.label.as_str())
}

/// Fragment after `#`, else the last non-empty `/` segment, else the IRI.
pub fn iri_fragment(iri: &str) -> &str {
    if let Some((_, frag)) = iri.rsplit_once('#') {
        if !frag.is_empty() {
            return frag;
        }
    }
    iri.trim_end_matches(['#', '/'])
        .rsplit('/')
        .next()
        .filter(|s| !s.is_empty())
        .unwrap_or(iri)
}

fn is_builtin_vocabulary(iri: &str) -> bool {
    [RDF_NS, RDFS_NS, OWL_NS, XSD_NS]
        .iter()
        .any(|ns| iri.starts_with(ns))
}

/// Incremental construction of an [`Ontology`].
///
/// Edge endpoints and object-property domains/ranges that were never
/// declared are materialized as concepts on [`build`](Self::build). IRIs in
/// the RDF, RDFS, OWL and XSD namespaces (including `owl:Thing`) never become
/// concepts; subclass edges touching them are dropped.
#[derive(Debug, Default, Clone)]
pub struct OntologyBuilder {
    iri: String,
    concepts: BTreeSet<ConceptId>,
    edges: BTreeSet<(ConceptId, ConceptId)>,
    properties: BTreeMap<PropertyId, PropertyDecl>,
    labels: BTreeMap<String, String>,
}

impl OntologyBuilder {
    pub fn new(iri: impl Into<String>) -> Self {
        OntologyBuilder {
            iri: iri.into(),
            ..Default::default()
        }
    }

    pub fn set_iri(&mut self, iri: impl Into<String>) -> &mut Self {
        self.iri = iri.into();
        self
    }

    pub fn concept(&mut self, iri: impl Into<String>) -> &mut Self {
        let iri = iri.into();
        if !is_builtin_vocabulary(&iri) {
            self.concepts.insert(ConceptId(iri));
        }
        self
    }

    /// Records a label for any entity. The first label wins.
    pub fn label(&mut self, iri: impl Into<String>, label: impl Into<String>) -> &mut Self {
        self.labels.entry(iri.into()).or_insert_with(|| label.into());
        self
    }

    pub fn subclass(&mut self, child: impl Into<String>, parent: impl Into<String>) -> &mut Self {
        let (child, parent) = (child.into(), parent.into());
        if !is_builtin_vocabulary(&child) && !is_builtin_vocabulary(&parent) {
            self.edges.insert((ConceptId(child), ConceptId(parent)));
        }
        self
    }

    /// Declares a property. Redeclaring keeps the first kind seen, except that
    /// an object declaration wins over a datatype one.
    pub fn property(&mut self, iri: impl Into<String>, kind: PropertyKind) -> &mut Self {
        let id = PropertyId(iri.into());
        let decl = self
            .properties
            .entry(id.clone())
            .or_insert_with(|| PropertyDecl {
                id,
                kind,
                domains: BTreeSet::new(),
                ranges: BTreeSet::new(),
                label: String::new(),
            });
        if kind == PropertyKind::Object {
            decl.kind = PropertyKind::Object;
        }
        self
    }

    pub fn is_property(&self, iri: &str) -> bool {
        self.properties.contains_key(&PropertyId::new(iri))
    }

    /// Adds a domain to a declared property; ignored for undeclared ones.
    pub fn domain(&mut self, property: &str, class: impl Into<String>) -> &mut Self {
        let class = class.into();
        if is_builtin_vocabulary(&class) {
            return self;
        }
        if let Some(p) = self.properties.get_mut(&PropertyId::new(property)) {
            p.domains.insert(ConceptId(class));
        }
        self
    }

    /// Adds a range to a declared property; ignored for undeclared ones.
    pub fn range(&mut self, property: &str, class: impl Into<String>) -> &mut Self {
        let class = class.into();
        if is_builtin_vocabulary(&class) {
            return self;
        }
        if let Some(p) = self.properties.get_mut(&PropertyId::new(property)) {
            p.ranges.insert(ConceptId(class));
        }
        self
    }

    pub fn build(self) -> Ontology {
        let OntologyBuilder {
            iri,
            mut concepts,
            edges,
            properties,
            labels,
        } = self;

        for (child, parent) in &edges {
            concepts.insert(child.clone());
            concepts.insert(parent.clone());
        }
        let mut properties: Vec<PropertyDecl> = properties.into_values().collect();
        for p in &mut properties {
            if p.kind == PropertyKind::Datatype {
                // literal ranges carry no concept
                p.ranges.clear();
            }
            concepts.extend(p.domains.iter().cloned());
            concepts.extend(p.ranges.iter().cloned());
            p.label = labels
                .get(p.id.as_str())
                .cloned()
                .unwrap_or_else(|| iri_fragment(p.id.as_str()).to_string());
        }

        let concept_labels = concepts
            .iter()
            .map(|c| {
                let label = labels
                    .get(c.as_str())
                    .cloned()
                    .unwrap_or_else(|| iri_fragment(c.as_str()).to_string());
                (c.clone(), label)
            })
            .collect();

        let mut parents: BTreeMap<ConceptId, Vec<ConceptId>> = BTreeMap::new();
        let mut children: BTreeMap<ConceptId, Vec<ConceptId>> = BTreeMap::new();
        for (child, parent) in &edges {
            parents.entry(child.clone()).or_default().push(parent.clone());
            children.entry(parent.clone()).or_default().push(child.clone());
        }
        // BTreeSet iteration already yields parents sorted per child; children
        // need an explicit sort.
        for list in children.values_mut() {
            list.sort();
        }

        Ontology {
            iri,
            concepts,
            subclass_edges: edges,
            properties,
            labels: concept_labels,
            parents,
            children,
        }
    }
}
