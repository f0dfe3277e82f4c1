//! K-fold experiment driver, metrics, ablations and reports.

mod folds;
mod metrics;
mod report;

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::context::ContextConfig;
use crate::embed::EmbeddingStore;
use crate::model::{similarity, Ablation, Checkpoint, Facet, FacetMask, ModelConfig, ModelParams};
use crate::onto_io::{AlignmentCell, ConceptId, Ontology, ReferenceAlignment};
use crate::train::{
    build_dataset, concept_outputs, encode_ontology, predict, select_threshold, train, AlignmentDataset,
    ConceptExample, EncodedOntology, ThresholdWarning, TrainConfig,
};
use crate::{Error, Result};

pub use folds::{plan_folds, plan_stratified_folds, Fold, FoldPlan, Granularity};
pub use metrics::{macro_average, metrics, Confusion, Scores};
pub use report::{ablation_table, report_table, write_ablation_csv, write_report_csv};

#[derive(Debug, Clone)]
pub struct NamedOntology {
    pub name: String,
    pub ontology: Ontology,
}

/// An aligned ontology pair, by index into [`Bundle::ontologies`].
#[derive(Debug, Clone)]
pub struct BundlePair {
    pub source: usize,
    pub target: usize,
    pub reference: ReferenceAlignment,
}

#[derive(Debug, Clone, Default)]
pub struct Bundle {
    pub ontologies: Vec<NamedOntology>,
    pub pairs: Vec<BundlePair>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub context: ContextConfig,
    pub train: TrainConfig,
    pub k: usize,
    pub granularity: Granularity,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelConfig::default(),
            context: ContextConfig::default(),
            train: TrainConfig::default(),
            k: 7,
            granularity: Granularity::OntologyPair,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub fold: usize,
    pub theta_concept: f64,
    pub theta_property: f64,
    pub confusion: Confusion,
    pub warnings: Vec<ThresholdWarning>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub folds: Vec<FoldResult>,
}

impl ExperimentReport {
    /// Counts pooled over all folds.
    pub fn pooled(&self) -> Confusion {
        let mut c = Confusion::default();
        for f in &self.folds {
            c += f.confusion;
        }
        c
    }

    pub fn micro(&self) -> Scores {
        self.pooled().scores()
    }

    pub fn macro_scores(&self) -> Scores {
        let per_fold: Vec<Scores> = self.folds.iter().map(|f| f.confusion.scores()).collect();
        macro_average(&per_fold)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Item {
    Concept { pair: usize, index: usize },
    Property { pair: usize, index: usize },
}

struct Prepared<'a> {
    bundle: &'a Bundle,
    encoded: Vec<EncodedOntology>,
    datasets: Vec<AlignmentDataset>,
    items: Vec<Item>,
    /// Item indices belonging to each ontology pair.
    pair_items: Vec<Vec<usize>>,
}

type Outputs = Vec<BTreeMap<ConceptId, Vec<f64>>>;

impl<'a> Prepared<'a> {
    fn new(bundle: &'a Bundle, store: &EmbeddingStore, cfg: &ExperimentConfig) -> Result<Self> {
        for p in &bundle.pairs {
            if p.source >= bundle.ontologies.len() || p.target >= bundle.ontologies.len() {
                return Err(Error::Config("ontology pair refers to an unknown ontology".into()));
            }
        }
        let encoded = bundle
            .ontologies
            .iter()
            .map(|o| encode_ontology(&o.ontology, store, &cfg.context, &cfg.model))
            .collect::<Result<Vec<_>>>()?;
        let datasets: Vec<AlignmentDataset> = bundle
            .pairs
            .iter()
            .map(|p| {
                build_dataset(
                    &bundle.ontologies[p.source].ontology,
                    &bundle.ontologies[p.target].ontology,
                    &p.reference,
                )
            })
            .collect();
        let mut items = Vec::new();
        let mut pair_items = Vec::new();
        for (pair, d) in datasets.iter().enumerate() {
            let start = items.len();
            items.extend((0..d.concept_pairs.len()).map(|index| Item::Concept { pair, index }));
            items.extend((0..d.property_pairs.len()).map(|index| Item::Property { pair, index }));
            pair_items.push((start..items.len()).collect());
        }
        Ok(Prepared {
            bundle,
            encoded,
            datasets,
            items,
            pair_items,
        })
    }

    fn label(&self, item: Item) -> bool {
        match item {
            Item::Concept { pair, index } => self.datasets[pair].concept_pairs[index].label,
            Item::Property { pair, index } => self.datasets[pair].property_pairs[index].label,
        }
    }

    fn example(&self, pair: usize, index: usize) -> ConceptExample<'_> {
        let p = &self.datasets[pair].concept_pairs[index];
        let bp = &self.bundle.pairs[pair];
        ConceptExample {
            source: &self.encoded[bp.source].concepts[&p.source],
            target: &self.encoded[bp.target].concepts[&p.target],
            label: p.label,
        }
    }

    fn outputs(&self, params: &ModelParams) -> Outputs {
        self.encoded.iter().map(|e| concept_outputs(params, e)).collect()
    }

    fn score(&self, outputs: &Outputs, item: Item) -> f64 {
        match item {
            Item::Concept { pair, index } => {
                let p = &self.datasets[pair].concept_pairs[index];
                let bp = &self.bundle.pairs[pair];
                similarity(&outputs[bp.source][&p.source], &outputs[bp.target][&p.target])
            }
            Item::Property { pair, index } => {
                let p = &self.datasets[pair].property_pairs[index];
                let bp = &self.bundle.pairs[pair];
                similarity(
                    &self.encoded[bp.source].properties[&p.source],
                    &self.encoded[bp.target].properties[&p.target],
                )
            }
        }
    }

    fn expand(&self, units: &[usize], granularity: Granularity) -> Vec<usize> {
        match granularity {
            Granularity::ConceptPair => units.to_vec(),
            Granularity::OntologyPair => units.iter().flat_map(|&u| self.pair_items[u].iter().copied()).collect(),
        }
    }

    fn train_params(&self, items: &[usize], cfg: &ExperimentConfig, seed: u64) -> Result<(ModelParams, Vec<f64>)> {
        let examples: Vec<ConceptExample<'_>> = items
            .iter()
            .filter_map(|&i| match self.items[i] {
                Item::Concept { pair, index } => Some(self.example(pair, index)),
                Item::Property { .. } => None,
            })
            .collect();
        let params = ModelParams::init(cfg.model, seed);
        let tc = TrainConfig { seed, ..cfg.train };
        let out = train(params, &examples, &tc)?;
        Ok((out.params, out.loss_history))
    }

    /// Scores and labels of `items`, split into concept and property streams.
    fn scored(&self, outputs: &Outputs, items: &[usize]) -> [(Vec<f64>, Vec<bool>); 2] {
        let mut streams = [(Vec::new(), Vec::new()), (Vec::new(), Vec::new())];
        for &i in items {
            let item = self.items[i];
            let s = usize::from(matches!(item, Item::Property { .. }));
            streams[s].0.push(self.score(outputs, item));
            streams[s].1.push(self.label(item));
        }
        streams
    }

    fn thresholds(&self, outputs: &Outputs, items: &[usize]) -> Result<([f64; 2], Vec<ThresholdWarning>)> {
        let mut thetas = [0.0; 2];
        let mut warnings = Vec::new();
        for (k, (scores, labels)) in self.scored(outputs, items).iter().enumerate() {
            let choice = select_threshold(scores, labels)?;
            thetas[k] = choice.theta;
            warnings.extend(choice.warning);
        }
        Ok((thetas, warnings))
    }

    fn run_fold(&self, fold: &Fold, index: usize, cfg: &ExperimentConfig) -> Result<FoldResult> {
        let g = cfg.granularity;
        let (train_items, val_items, test_items) =
            (self.expand(&fold.train, g), self.expand(&fold.validation, g), self.expand(&fold.test, g));
        let (params, _) = self.train_params(&train_items, cfg, cfg.train.seed + index as u64)?;
        let outputs = self.outputs(&params);
        let (thetas, warnings) = self.thresholds(&outputs, &val_items)?;
        let mut confusion = Confusion::default();
        for (k, (scores, labels)) in self.scored(&outputs, &test_items).iter().enumerate() {
            let c = Confusion::from_predictions(&predict(scores, thetas[k]), labels)?;
            confusion += c;
        }
        Ok(FoldResult {
            fold: index,
            theta_concept: thetas[0],
            theta_property: thetas[1],
            confusion,
            warnings,
        })
    }

    fn plan(&self, cfg: &ExperimentConfig) -> Result<FoldPlan> {
        match cfg.granularity {
            Granularity::OntologyPair => plan_folds(self.bundle.pairs.len(), cfg.k, cfg.granularity, cfg.train.seed),
            Granularity::ConceptPair => {
                let labels: Vec<bool> = self.items.iter().map(|i| self.label(*i)).collect();
                plan_stratified_folds(&labels, cfg.k, cfg.train.seed)
            }
        }
    }
}

/// Per fold: train on the training split with seed `seed + fold`, tune
/// thresholds on validation, count test predictions. Folds run in parallel.
pub fn run_experiment(bundle: &Bundle, store: &EmbeddingStore, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.train.validate()?;
    let prepared = Prepared::new(bundle, store, cfg)?;
    let plan = prepared.plan(cfg)?;
    let results: Vec<Result<FoldResult>> = plan
        .folds
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            prepared.run_fold(f, i, cfg).map_err(|e| Error::Fold {
                index: i,
                source: Box::new(e),
            })
        })
        .collect();
    Ok(ExperimentReport {
        config: *cfg,
        folds: results.into_iter().collect::<Result<Vec<_>>>()?,
    })
}

/// Runs only fold `index` of the plan `run_experiment` would use.
pub fn run_single_fold(bundle: &Bundle, store: &EmbeddingStore, cfg: &ExperimentConfig, index: usize) -> Result<FoldResult> {
    cfg.train.validate()?;
    let prepared = Prepared::new(bundle, store, cfg)?;
    let plan = prepared.plan(cfg)?;
    let fold = plan
        .folds
        .get(index)
        .ok_or_else(|| Error::FoldPlan(format!("fold {index} out of range for k = {}", cfg.k)))?;
    prepared.run_fold(fold, index, cfg).map_err(|e| Error::Fold {
        index,
        source: Box::new(e),
    })
}

/// The seven ablation runs: three attention modes, then each facet alone
/// under full attention.
pub fn ablation_configs(base: &ExperimentConfig) -> Vec<(String, ExperimentConfig)> {
    let mut out = Vec::new();
    for ablation in [Ablation::NoContext, Ablation::SingleAttention, Ablation::Full] {
        let mut c = *base;
        c.model.ablation = ablation;
        c.model.facets = FacetMask::ALL;
        out.push((ablation.to_string(), c));
    }
    for facet in Facet::ALL {
        let mut c = *base;
        c.model.ablation = Ablation::Full;
        c.model.facets = FacetMask::only(facet);
        out.push((facet.name().to_string(), c));
    }
    out
}

pub fn ablation_sweep(
    bundle: &Bundle,
    store: &EmbeddingStore,
    base: &ExperimentConfig,
) -> Result<Vec<(String, ExperimentReport)>> {
    ablation_configs(base)
        .into_iter()
        .map(|(name, cfg)| Ok((name, run_experiment(bundle, store, &cfg)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome {
    pub checkpoint: Checkpoint,
    pub loss_history: Vec<f64>,
}

/// Trains on every pair of the bundle and tunes thresholds on the same
/// pairs.
pub fn fit_bundle(bundle: &Bundle, store: &EmbeddingStore, cfg: &ExperimentConfig) -> Result<FitOutcome> {
    cfg.train.validate()?;
    let prepared = Prepared::new(bundle, store, cfg)?;
    let all: Vec<usize> = (0..prepared.items.len()).collect();
    let (params, loss_history) = prepared.train_params(&all, cfg, cfg.train.seed)?;
    let outputs = prepared.outputs(&params);
    let (thetas, _) = prepared.thresholds(&outputs, &all)?;
    Ok(FitOutcome {
        checkpoint: Checkpoint {
            params,
            max_paths: cfg.context.max_paths,
            threshold_concept: thetas[0],
            threshold_property: thetas[1],
        },
        loss_history,
    })
}

/// Predicted equivalences between two ontologies, with scores as measures.
pub fn align_ontologies(
    checkpoint: &Checkpoint,
    source: &Ontology,
    target: &Ontology,
    store: &EmbeddingStore,
) -> Result<Vec<AlignmentCell>> {
    let params = &checkpoint.params;
    let context = ContextConfig {
        max_depth: params.config.max_depth,
        max_paths: checkpoint.max_paths,
    };
    let es = encode_ontology(source, store, &context, &params.config)?;
    let et = encode_ontology(target, store, &context, &params.config)?;
    let (os, ot) = (concept_outputs(params, &es), concept_outputs(params, &et));
    let dataset = build_dataset(source, target, &ReferenceAlignment::default());
    let cell = |a: &str, b: &str, score: f64| AlignmentCell {
        entity1: a.to_string(),
        entity2: b.to_string(),
        relation: "=".into(),
        measure: score,
    };
    let mut cells = Vec::new();
    for p in &dataset.concept_pairs {
        let score = similarity(&os[&p.source], &ot[&p.target]);
        if score > checkpoint.threshold_concept {
            cells.push(cell(p.source.as_str(), p.target.as_str(), score));
        }
    }
    for p in &dataset.property_pairs {
        let score = similarity(&es.properties[&p.source], &et.properties[&p.target]);
        if score > checkpoint.threshold_property {
            cells.push(cell(p.source.as_str(), p.target.as_str(), score));
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::Fallback;
    use crate::onto_io::OntologyBuilder;

    fn toy(ns: &str) -> Ontology {
        let mut b = OntologyBuilder::new(format!("urn:{ns}"));
        for (c, p) in [
            ("Paper", "Document"),
            ("Review", "Document"),
            ("Author", "Person"),
            ("Reviewer", "Person"),
            ("Chair", "Person"),
            ("Conference", "Event"),
            ("Workshop", "Event"),
        ] {
            b.subclass(format!("urn:{ns}#{c}"), format!("urn:{ns}#{p}"));
        }
        b.build()
    }

    fn identity_bundle() -> Bundle {
        let s = toy("s");
        let t = toy("t");
        let cells = s
            .concepts()
            .iter()
            .map(|c| AlignmentCell {
                entity1: c.0.clone(),
                entity2: c.0.replace("urn:s", "urn:t"),
                relation: "=".into(),
                measure: 1.0,
            })
            .collect();
        Bundle {
            ontologies: vec![
                NamedOntology {
                    name: "s".into(),
                    ontology: s,
                },
                NamedOntology {
                    name: "t".into(),
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

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig {
            model: ModelConfig {
                dim: 32,
                out_dim: 16,
                ..Default::default()
            },
            train: TrainConfig {
                epochs: 5,
                ..Default::default()
            },
            k: 5,
            granularity: Granularity::ConceptPair,
            ..Default::default()
        }
    }

    #[test]
    fn identity_alignment_is_found() {
        let store = EmbeddingStore::new(32, Fallback::HashEmbed { seed: 0 });
        let report = run_experiment(&identity_bundle(), &store, &small_cfg()).unwrap();
        assert_eq!(report.folds.len(), 5);
        let pooled = report.pooled();
        assert_eq!((pooled.tp, pooled.fn_), (10, 0));
        assert!(report.micro().precision > 0.0);
    }

    #[test]
    fn fold_error_names_fold() {
        let store = EmbeddingStore::new(32, Fallback::HashEmbed { seed: 0 });
        let mut b = identity_bundle();
        b.pairs[0].reference.cells.clear();
        let err = run_experiment(&b, &store, &small_cfg()).unwrap_err();
        assert!(matches!(err, Error::Fold { index: 0, .. }), "{err}");
    }

    #[test]
    fn seven_ablation_modes() {
        let names: Vec<String> = ablation_configs(&ExperimentConfig::default())
            .into_iter()
            .map(|(n, _)| n)
            .collect();
        assert_eq!(
            names,
            ["no_context", "single_attention", "full", "ancestors", "children", "object", "data"]
        );
    }

    #[test]
    fn fitted_checkpoint_aligns_copy() {
        let store = EmbeddingStore::new(32, Fallback::HashEmbed { seed: 0 });
        let b = identity_bundle();
        let fit = fit_bundle(&b, &store, &small_cfg()).unwrap();
        assert_eq!(fit.loss_history.len(), 5);
        let s = &b.ontologies[0].ontology;
        let cells = align_ontologies(&fit.checkpoint, s, &b.ontologies[1].ontology, &store).unwrap();
        for c in s.concepts() {
            let twin = c.0.replace("urn:s", "urn:t");
            assert!(cells.iter().any(|x| x.entity1 == c.0 && x.entity2 == twin), "{c}");
        }
        let mut strict = fit.checkpoint.clone();
        strict.threshold_concept = 1.0;
        strict.threshold_property = 1.0;
        assert!(align_ontologies(&strict, s, s, &store).unwrap().is_empty());
    }
}
