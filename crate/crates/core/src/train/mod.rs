//! Dataset construction, oversampling, Adam training and threshold
//! selection.

mod adam;
mod dataset;
mod encode;
mod threshold;

use std::borrow::Cow;
use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::model::{concept_gradients, cosine_gradient, forward, similarity, AttentionTrace, ModelParams};
use crate::{Error, Result};

pub use adam::{Adam, AdamConfig};
pub use dataset::{build_dataset, oversample_indices, oversample_positives, AlignmentDataset, LabeledPair};
pub use encode::{concept_outputs, embed_context, encode_ontology, EncodedOntology};
pub use threshold::{predict, select_threshold, ThresholdChoice, ThresholdWarning, FALLBACK_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    /// Rebalance positives to a 1:1 ratio every epoch.
    pub oversample: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.001,
            epochs: 50,
            batch_size: 32,
            seed: 0,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            oversample: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate >= 0.0
            && self.learning_rate.is_finite()
            && self.batch_size > 0
            && (0.0..1.0).contains(&self.adam_beta1)
            && (0.0..1.0).contains(&self.adam_beta2)
            && self.adam_eps > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid training configuration {self:?}")))
        }
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            eps: self.adam_eps,
        }
    }
}

/// One labelled concept pair, by reference to precomputed attention traces.
#[derive(Debug, Clone, Copy)]
pub struct ConceptExample<'a> {
    pub source: &'a AttentionTrace,
    pub target: &'a AttentionTrace,
    pub label: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: ModelParams,
    /// Mean squared error over each epoch's training multiset.
    pub loss_history: Vec<f64>,
}

/// Mini-batch Adam on the mean squared error of the concept pairs.
///
/// Every epoch draws a fresh (oversampled, shuffled) order from a single
/// generator seeded with `cfg.seed`. Within a batch each distinct concept is
/// projected once and its output gradients are summed in batch order, so
/// results are bit-identical across runs and thread counts.
pub fn train<'a>(params: ModelParams, examples: &[ConceptExample<'a>], cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if examples.is_empty() {
        return Err(Error::Empty("training set"));
    }
    let labels: Vec<bool> = examples.iter().map(|e| e.label).collect();
    if cfg.oversample && !labels.iter().any(|l| *l) {
        return Err(Error::NoPositives);
    }
    let mut params = params;
    let mut adam = Adam::new(cfg.adam(), &params);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let order = if cfg.oversample {
            oversample_indices(&labels, &mut rng)?
        } else {
            let mut o: Vec<usize> = (0..examples.len()).collect();
            o.shuffle(&mut rng);
            o
        };
        let mut epoch_loss = 0.0;
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            let weight = 1.0 / batch.len() as f64;
            // distinct concepts of the batch, in first-use order
            let mut slots: Vec<&AttentionTrace> = Vec::new();
            let mut slot_of: HashMap<*const AttentionTrace, usize> = HashMap::new();
            let mut slot = |t: &'a AttentionTrace| {
                *slot_of.entry(t as *const _).or_insert_with(|| {
                    slots.push(t);
                    slots.len() - 1
                })
            };
            let pairs: Vec<(usize, usize, f64)> = batch
                .iter()
                .map(|&i| {
                    let e = &examples[i];
                    (slot(e.source), slot(e.target), if e.label { 1.0 } else { 0.0 })
                })
                .collect();
            let traces: Vec<_> = slots.par_iter().map(|t| forward(&params, Cow::Borrowed(*t))).collect();
            let mut g_out = vec![vec![0.0; params.config.out_dim]; traces.len()];
            let mut batch_loss = 0.0;
            for &(s, t, label) in &pairs {
                let c = cosine_gradient(&traces[s].output, &traces[t].output, label, weight);
                batch_loss += c.loss;
                g_out[s].iter_mut().zip(&c.g_source).for_each(|(a, b)| *a += b);
                g_out[t].iter_mut().zip(&c.g_target).for_each(|(a, b)| *a += b);
            }
            if !batch_loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch: b });
            }
            epoch_loss += batch_loss * batch.len() as f64;
            let total = concept_gradients(&params, &traces, &g_out);
            adam.step(&mut params, &total);
            if !params.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch: b });
            }
        }
        let mean = epoch_loss / order.len() as f64;
        log::debug!("epoch {epoch}: loss {mean:.6}");
        history.push(mean);
    }
    Ok(TrainOutcome {
        params,
        loss_history: history,
    })
}

/// Cosine scores of concept examples under `params`.
pub fn score_examples(params: &ModelParams, examples: &[ConceptExample<'_>]) -> Vec<f64> {
    examples
        .par_iter()
        .map(|e| {
            let s = forward(params, Cow::Borrowed(e.source));
            let t = forward(params, Cow::Borrowed(e.target));
            similarity(&s.output, &t.output)
        })
        .collect()
}
