#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use ontalign::eval::{Bundle, BundlePair, NamedOntology};
use ontalign::model::ContextEmbeddings;
use ontalign::onto_io::{
    parse_ontology, parse_reference_alignment, AlignmentCell, ConceptId, Ontology, OntologyBuilder,
    ReferenceAlignment,
};
use rand::Rng;

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

pub fn data(name: &str) -> PathBuf {
    data_dir().join(name)
}

pub fn read_ontology(name: &str) -> Ontology {
    parse_ontology(&std::fs::read(data(name)).unwrap()).unwrap()
}

/// The 20-concept toy ontology paired with its namespace-shifted copy.
pub fn toy_bundle() -> Bundle {
    let reference = parse_reference_alignment(&std::fs::read(data("toy-copy.rdf")).unwrap()).unwrap();
    Bundle {
        ontologies: vec![
            NamedOntology {
                name: "toy".into(),
                ontology: read_ontology("toy.owl"),
            },
            NamedOntology {
                name: "toy_copy".into(),
                ontology: read_ontology("toy_copy.owl"),
            },
        ],
        pairs: vec![BundlePair {
            source: 0,
            target: 1,
            reference,
        }],
    }
}

const CATEGORIES: [&str; 6] = ["Vehicle", "Animal", "Building", "Instrument", "Plant", "Garment"];
const SHARED: [&str; 3] = ["Part", "Kind", "Unit"];

fn ambiguous(ns: &str) -> Ontology {
    let mut b = OntologyBuilder::new(format!("urn:{ns}"));
    for c in CATEGORIES {
        for s in SHARED {
            let child = format!("urn:{ns}#{c}{s}");
            b.subclass(child.clone(), format!("urn:{ns}#{c}"));
            b.label(child, s);
        }
    }
    b.build()
}

/// Six categories, each with children labelled `Part`, `Kind` and `Unit`,
/// aligned with a copy of itself. Only the parent tells same-label
/// children apart.
pub fn ambiguous_bundle() -> Bundle {
    let s = ambiguous("amb-s");
    let t = ambiguous("amb-t");
    let cells = s
        .concepts()
        .iter()
        .map(|c| AlignmentCell {
            entity1: c.0.clone(),
            entity2: c.0.replace("urn:amb-s", "urn:amb-t"),
            relation: "=".into(),
            measure: 1.0,
        })
        .collect();
    Bundle {
        ontologies: vec![
            NamedOntology {
                name: "amb_s".into(),
                ontology: s,
            },
            NamedOntology {
                name: "amb_t".into(),
                ontology: t,
            },
        ],
        pairs: vec![BundlePair {
            source: 0,
            target: 1,
            reference: ReferenceAlignment {
                cells,
                ..Default::default()
            },
        }],
    }
}

pub fn random_vec<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn random_group<R: Rng>(rng: &mut R, dim: usize, max: usize) -> Vec<Vec<f64>> {
    let n = rng.random_range(0..=max);
    (0..n).map(|_| random_vec(rng, dim)).collect()
}

/// Random context: up to `max_paths` lineage paths of length 1..=`max_len`
/// and up to `max_hop` neighbours per one-hop facet.
pub fn random_context<R: Rng>(
    rng: &mut R,
    dim: usize,
    paths: std::ops::RangeInclusive<usize>,
    max_len: usize,
    max_hop: usize,
) -> ContextEmbeddings {
    let n_paths = rng.random_range(paths);
    ContextEmbeddings {
        u: random_vec(rng, dim),
        lineage: (0..n_paths)
            .map(|_| {
                let len = rng.random_range(1..=max_len);
                (0..len).map(|_| random_vec(rng, dim)).collect()
            })
            .collect(),
        children: random_group(rng, dim, max_hop),
        objects: random_group(rng, dim, max_hop),
        data: random_group(rng, dim, max_hop),
    }
}

pub fn node(i: usize) -> String {
    format!("urn:g#n{i}")
}

/// Random subclass DAG over `n` nodes: edges only point from higher to
/// lower indices. With `cycles`, a few upward back edges are added.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, cycles: bool) -> Ontology {
    let mut b = OntologyBuilder::new("urn:g");
    for i in 0..n {
        b.concept(node(i));
        for j in 0..i {
            if rng.random_bool((1.5 / i as f64).min(1.0)) {
                b.subclass(node(i), node(j));
            }
        }
    }
    if cycles {
        for _ in 0..rng.random_range(1..=3) {
            let lo = rng.random_range(0..n - 1);
            let hi = rng.random_range(lo + 1..n);
            b.subclass(node(lo), node(hi));
        }
    }
    b.build()
}

/// Every maximal simple upward path from `c`, found by listing all simple
/// upward paths and keeping those that cannot be extended.
pub fn brute_force_paths(o: &Ontology, c: &ConceptId) -> BTreeSet<Vec<ConceptId>> {
    let mut all: Vec<Vec<ConceptId>> = o.parents(c).iter().filter(|p| *p != c).map(|p| vec![p.clone()]).collect();
    let mut i = 0;
    while i < all.len() {
        let path = all[i].clone();
        for p in o.parents(path.last().unwrap()) {
            if p != c && !path.contains(p) {
                let mut longer = path.clone();
                longer.push(p.clone());
                all.push(longer);
            }
        }
        i += 1;
    }
    all.into_iter()
        .filter(|path| {
            o.parents(path.last().unwrap())
                .iter()
                .all(|p| p == c || path.contains(p))
        })
        .collect()
}
