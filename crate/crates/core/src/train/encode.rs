use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::context::{build_context, ContextConfig};
use crate::embed::EmbeddingStore;
use crate::model::{attend, AttentionTrace, ContextEmbeddings, ModelConfig, ModelParams};
use crate::onto_io::{ConceptId, Ontology, PropertyId};
use crate::{model, Error, Result};

/// Attention traces for every concept and label vectors for every property.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EncodedOntology {
    pub concepts: BTreeMap<ConceptId, AttentionTrace>,
    pub properties: BTreeMap<PropertyId, Vec<f64>>,
}

struct Lookup<'a> {
    store: &'a EmbeddingStore,
    cache: HashMap<String, Vec<f64>>,
}

impl Lookup<'_> {
    fn get(&mut self, label: &str) -> Result<Vec<f64>> {
        if let Some(v) = self.cache.get(label) {
            return Ok(v.clone());
        }
        let v = self.store.lookup(label)?;
        self.cache.insert(label.to_string(), v.clone());
        Ok(v)
    }

    fn concept(&mut self, o: &Ontology, c: &ConceptId) -> Result<Vec<f64>> {
        self.get(o.concept_label(c)?)
    }
}

/// Embeds the context of `c`. Datatype neighbours use the property label.
pub fn embed_context(
    o: &Ontology,
    c: &ConceptId,
    context: &ContextConfig,
    store: &EmbeddingStore,
) -> Result<ContextEmbeddings> {
    let mut lookup = Lookup {
        store,
        cache: HashMap::new(),
    };
    context_embeddings(o, c, context, &mut lookup)
}

fn context_embeddings(o: &Ontology, c: &ConceptId, context: &ContextConfig, lookup: &mut Lookup) -> Result<ContextEmbeddings> {
    let u = lookup.concept(o, c)?;
    let bundle = build_context(o, c, context);
    let mut nodes = |ids: &[ConceptId]| ids.iter().map(|d| lookup.concept(o, d)).collect::<Result<Vec<_>>>();
    let lineage = bundle
        .lineage_paths
        .iter()
        .map(|p| nodes(p))
        .collect::<Result<Vec<_>>>()?;
    let children = nodes(&bundle.children)?;
    let objects = nodes(&bundle.obj_neighbors)?;
    let data = bundle
        .data_neighbors
        .iter()
        .map(|p| lookup.get(&o.property(p)?.label))
        .collect::<Result<Vec<_>>>()?;
    Ok(ContextEmbeddings {
        u,
        lineage,
        children,
        objects,
        data,
    })
}

/// Embeds every concept and property. Labels are resolved in canonical
/// order, so a missing embedding names the first missing label.
pub fn encode_ontology(
    o: &Ontology,
    store: &EmbeddingStore,
    context: &ContextConfig,
    model: &ModelConfig,
) -> Result<EncodedOntology> {
    if context.max_depth > model.max_depth {
        return Err(Error::Config(format!(
            "context depth {} exceeds model depth {}",
            context.max_depth, model.max_depth
        )));
    }
    if store.dim() != model.dim {
        return Err(Error::Shape {
            expected: model.dim,
            got: store.dim(),
        });
    }
    let mut lookup = Lookup {
        store,
        cache: HashMap::new(),
    };
    let mut embedded = Vec::with_capacity(o.concepts().len());
    for c in o.concepts() {
        embedded.push((c.clone(), context_embeddings(o, c, context, &mut lookup)?));
    }
    let mut properties = BTreeMap::new();
    for p in o.properties() {
        properties.insert(p.id.clone(), lookup.get(&p.label)?);
    }
    let traces = embedded
        .par_iter()
        .map(|(_, e)| attend(model, e))
        .collect::<Result<Vec<_>>>()?;
    Ok(EncodedOntology {
        concepts: embedded.into_iter().map(|(c, _)| c).zip(traces).collect(),
        properties,
    })
}

/// Projected representation `f(c)` of every concept.
pub fn concept_outputs(params: &ModelParams, encoded: &EncodedOntology) -> BTreeMap<ConceptId, Vec<f64>> {
    let traces: Vec<(&ConceptId, &AttentionTrace)> = encoded.concepts.iter().collect();
    let outputs: Vec<Vec<f64>> = traces
        .par_iter()
        .map(|(_, t)| model::forward(params, std::borrow::Cow::Borrowed(*t)).output)
        .collect();
    traces.into_iter().map(|(c, _)| c.clone()).zip(outputs).collect()
}
