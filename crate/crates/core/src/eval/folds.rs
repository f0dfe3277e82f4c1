use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Granularity {
    /// Whole ontology pairs are the units; a held-out chunk splits into
    /// validation and test units.
    #[default]
    OntologyPair,
    /// Individual candidate pairs are the units, split 70/10/20.
    ConceptPair,
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Granularity::OntologyPair => "ontology_pair",
            Granularity::ConceptPair => "concept_pair",
        })
    }
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ontology_pair" => Ok(Granularity::OntologyPair),
            "concept_pair" => Ok(Granularity::ConceptPair),
            _ => Err(Error::Config(format!("unknown granularity `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub granularity: Granularity,
    pub k: usize,
    pub folds: Vec<Fold>,
}

/// Shuffles `units` and cuts them into `k` contiguous chunks; the first
/// `len mod k` chunks take one extra unit.
fn chunks(mut units: Vec<usize>, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    units.shuffle(rng);
    let base = units.len() / k;
    let extra = units.len() % k;
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    for i in 0..k {
        let len = base + usize::from(i < extra);
        out.push(units[start..start + len].to_vec());
        start += len;
    }
    out
}

fn assign(chunks: &[Vec<usize>], granularity: Granularity) -> Vec<Fold> {
    let k = chunks.len();
    (0..k)
        .map(|i| {
            let mut fold = Fold::default();
            match granularity {
                Granularity::OntologyPair => {
                    let held = &chunks[i];
                    let n_test = (held.len() / 3).max(1).min(held.len());
                    let split = held.len() - n_test;
                    fold.validation.extend_from_slice(&held[..split]);
                    fold.test.extend_from_slice(&held[split..]);
                    for (j, c) in chunks.iter().enumerate() {
                        if j != i {
                            fold.train.extend_from_slice(c);
                        }
                    }
                }
                Granularity::ConceptPair => {
                    let next = (i + 1) % k;
                    let half = chunks[next].len() / 2;
                    fold.test.extend_from_slice(&chunks[i]);
                    fold.validation.extend_from_slice(&chunks[next][..half]);
                    fold.train.extend_from_slice(&chunks[next][half..]);
                    for (j, c) in chunks.iter().enumerate() {
                        if j != i && j != next {
                            fold.train.extend_from_slice(c);
                        }
                    }
                }
            }
            fold.train.sort_unstable();
            fold.validation.sort_unstable();
            fold.test.sort_unstable();
            fold
        })
        .collect()
}

fn check_k(units: usize, k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::FoldPlan(format!("k must be at least 2, got {k}")));
    }
    if k > units {
        return Err(Error::FoldPlan(format!("k = {k} exceeds the {units} available units")));
    }
    Ok(())
}

/// Sliding-window folds over `units` items. Fold `i` holds out chunk `i`:
/// by ontology pair it splits into validation and test (two to one); by
/// concept pair chunk `i` is the test set and half of chunk `i + 1` the
/// validation set.
pub fn plan_folds(units: usize, k: usize, granularity: Granularity, seed: u64) -> Result<FoldPlan> {
    check_k(units, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = chunks((0..units).collect(), k, &mut rng);
    Ok(FoldPlan {
        granularity,
        k,
        folds: assign(&c, granularity),
    })
}

/// Concept-pair folds with positives and negatives chunked separately so
/// every split keeps the label ratio.
pub fn plan_stratified_folds(labels: &[bool], k: usize, seed: u64) -> Result<FoldPlan> {
    check_k(labels.len(), k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Fold::default(); k];
    for class in [true, false] {
        let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        let c = chunks(members, k, &mut rng);
        for (fold, part) in folds.iter_mut().zip(assign(&c, Granularity::ConceptPair)) {
            fold.train.extend(part.train);
            fold.validation.extend(part.validation);
            fold.test.extend(part.test);
        }
    }
    for f in &mut folds {
        f.train.sort_unstable();
        f.validation.sort_unstable();
        f.test.sort_unstable();
    }
    Ok(FoldPlan {
        granularity: Granularity::ConceptPair,
        k,
        folds,
    })
}
