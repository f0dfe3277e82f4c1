use std::collections::BTreeSet;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::onto_io::{ConceptId, Ontology, PropertyId, ReferenceAlignment};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LabeledPair<I> {
    pub source: I,
    pub target: I,
    pub label: bool,
}

/// All candidate pairs between two ontologies with their gold labels.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AlignmentDataset {
    pub source_iri: String,
    pub target_iri: String,
    pub concept_pairs: Vec<LabeledPair<ConceptId>>,
    /// Object × object and datatype × datatype property pairs.
    pub property_pairs: Vec<LabeledPair<PropertyId>>,
    /// `=` cells naming an entity missing from either ontology, or pairing
    /// entities of different kinds.
    pub unmatched_cells: usize,
}

impl AlignmentDataset {
    pub fn concept_positives(&self) -> usize {
        self.concept_pairs.iter().filter(|p| p.label).count()
    }

    pub fn property_positives(&self) -> usize {
        self.property_pairs.iter().filter(|p| p.label).count()
    }
}

/// Full cross products labelled from the `=` cells of `reference`. A cell is
/// accepted in either orientation.
pub fn build_dataset(source: &Ontology, target: &Ontology, reference: &ReferenceAlignment) -> AlignmentDataset {
    let mut concept_pos = BTreeSet::new();
    let mut property_pos = BTreeSet::new();
    let mut unmatched = 0;
    let is_concept = |o: &Ontology, iri: &str| o.contains_concept(&ConceptId::new(iri));
    let prop_kind = |o: &Ontology, iri: &str| o.property(&PropertyId::new(iri)).ok().map(|p| p.kind);

    for cell in reference.equivalences() {
        let (a, b) = (cell.entity1.as_str(), cell.entity2.as_str());
        if is_concept(source, a) && is_concept(target, b) {
            concept_pos.insert((a.to_string(), b.to_string()));
        } else if is_concept(source, b) && is_concept(target, a) {
            concept_pos.insert((b.to_string(), a.to_string()));
        } else if matches!((prop_kind(source, a), prop_kind(target, b)), (Some(x), Some(y)) if x == y) {
            property_pos.insert((a.to_string(), b.to_string()));
        } else if matches!((prop_kind(source, b), prop_kind(target, a)), (Some(x), Some(y)) if x == y) {
            property_pos.insert((b.to_string(), a.to_string()));
        } else {
            unmatched += 1;
        }
    }
    if unmatched > 0 {
        log::warn!(
            "{unmatched} reference cell(s) between {} and {} do not match parsed entities",
            source.iri(),
            target.iri()
        );
    }

    let mut concept_pairs = Vec::with_capacity(source.concepts().len() * target.concepts().len());
    for s in source.concepts() {
        for t in target.concepts() {
            let label = concept_pos.contains(&(s.0.clone(), t.0.clone()));
            concept_pairs.push(LabeledPair {
                source: s.clone(),
                target: t.clone(),
                label,
            });
        }
    }
    let mut property_pairs = Vec::new();
    for s in source.properties() {
        for t in target.properties().iter().filter(|t| t.kind == s.kind) {
            let label = property_pos.contains(&(s.id.0.clone(), t.id.0.clone()));
            property_pairs.push(LabeledPair {
                source: s.id.clone(),
                target: t.id.clone(),
                label,
            });
        }
    }
    AlignmentDataset {
        source_iri: source.iri().to_string(),
        target_iri: target.iri().to_string(),
        concept_pairs,
        property_pairs,
        unmatched_cells: unmatched,
    }
}

/// Indices of a balanced training multiset: every positive `q = N / P`
/// times plus `N mod P` distinct positives drawn once more, all negatives
/// once, shuffled. With at least as many positives as negatives the indices
/// are only shuffled.
pub fn oversample_indices<R: Rng>(labels: &[bool], rng: &mut R) -> Result<Vec<usize>> {
    let positives: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let negatives = labels.len() - positives.len();
    if positives.is_empty() {
        return Err(Error::NoPositives);
    }
    let mut out: Vec<usize> = (0..labels.len()).collect();
    if positives.len() < negatives {
        let q = negatives / positives.len();
        let r = negatives % positives.len();
        for _ in 1..q {
            out.extend_from_slice(&positives);
        }
        let mut extra: Vec<usize> = index::sample(rng, positives.len(), r).into_vec();
        extra.sort_unstable();
        out.extend(extra.into_iter().map(|i| positives[i]));
    }
    out.shuffle(rng);
    Ok(out)
}

/// Balances positives against negatives, see [`oversample_indices`].
pub fn oversample_positives<I: Clone>(pairs: &[LabeledPair<I>], seed: u64) -> Result<Vec<LabeledPair<I>>> {
    let labels: Vec<bool> = pairs.iter().map(|p| p.label).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(oversample_indices(&labels, &mut rng)?
        .into_iter()
        .map(|i| pairs[i].clone())
        .collect())
}
