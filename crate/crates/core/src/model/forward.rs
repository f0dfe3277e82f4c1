use std::borrow::Cow;

use super::attention::{
    dot, facet_vector_single_hop, node_attention_weights, path_attention, path_node_scores, softmax,
    unify_paths,
};
use super::{Ablation, Facet, ModelConfig, ModelParams};
use crate::{Error, Result};

/// Embedded context of one concept: the focal label vector and the label
/// vectors of every context node, grouped by facet.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContextEmbeddings {
    pub u: Vec<f64>,
    /// Lineage paths, nearest ancestor first.
    pub lineage: Vec<Vec<Vec<f64>>>,
    pub children: Vec<Vec<f64>>,
    pub objects: Vec<Vec<f64>>,
    pub data: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SingleHop {
    pub weights: Vec<f64>,
    pub vector: Vec<f64>,
}

/// The parameter-free part of a forward pass.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AttentionTrace {
    pub u: Vec<f64>,
    /// Node scores per lineage path.
    pub path_node_scores: Vec<Vec<f64>>,
    pub path_weights: Vec<f64>,
    /// Unified lineage path `R`, one vector per filled slot.
    pub unified: Vec<Vec<f64>>,
    /// Node-level weights over all `max_depth` slots; padded slots are 0.
    pub node_weights: Vec<f64>,
    pub children: SingleHop,
    pub objects: SingleHop,
    pub data: SingleHop,
}

/// Intermediate values of one concept's forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace<'a> {
    pub attention: Cow<'a, AttentionTrace>,
    /// Softmax of the category logits.
    pub category_weights: [f64; 4],
    /// Facet vectors in [`Facet`] order; disabled facets are zero.
    pub facets: [Vec<f64>; 4],
    /// Context vector `v`.
    pub context: Vec<f64>,
    /// `[u, v]`.
    pub input: Vec<f64>,
    /// `W · [u, v]`.
    pub output: Vec<f64>,
}

fn check(expected: usize, v: &[f64]) -> Result<()> {
    if v.len() == expected {
        Ok(())
    } else {
        Err(Error::Shape {
            expected,
            got: v.len(),
        })
    }
}

/// Runs both attention stages for one concept.
pub fn attend(config: &ModelConfig, ctx: &ContextEmbeddings) -> Result<AttentionTrace> {
    let dim = config.dim;
    check(dim, &ctx.u)?;
    for path in &ctx.lineage {
        if path.len() > config.max_depth {
            return Err(Error::Shape {
                expected: config.max_depth,
                got: path.len(),
            });
        }
    }
    for v in ctx.children.iter().chain(&ctx.objects).chain(&ctx.data) {
        check(dim, v)?;
    }
    let uniform = config.ablation == Ablation::SingleAttention;

    let path_node_scores = ctx
        .lineage
        .iter()
        .map(|p| path_node_scores(&ctx.u, p))
        .collect::<Result<Vec<_>>>()?;
    let path_weights = if uniform {
        vec![1.0 / ctx.lineage.len() as f64; ctx.lineage.len()]
    } else {
        path_attention(&path_node_scores)
    };
    let unified = unify_paths(&path_weights, &ctx.lineage, config.pooling, dim);
    let node_weights = node_attention_weights(&ctx.u, &unified, config.max_depth);

    let hop = |n: &[Vec<f64>]| {
        let (weights, vector) = facet_vector_single_hop(&ctx.u, n, uniform);
        SingleHop { weights, vector }
    };
    Ok(AttentionTrace {
        u: ctx.u.clone(),
        path_node_scores,
        path_weights,
        unified,
        node_weights,
        children: hop(&ctx.children),
        objects: hop(&ctx.objects),
        data: hop(&ctx.data),
    })
}

/// Convex combination of the facet vectors with `softmax(logits)`.
pub fn combine_contexts(facets: [&[f64]; 4], logits: &[f64; 4]) -> Vec<f64> {
    let weights = softmax(logits);
    let mut v = vec![0.0; facets[0].len()];
    for (f, w) in facets.iter().zip(&weights) {
        v.iter_mut().zip(f.iter()).for_each(|(v, x)| *v += w * x);
    }
    v
}

/// Applies the trainable parameters to a precomputed attention trace.
pub fn forward<'a>(params: &ModelParams, attention: Cow<'a, AttentionTrace>) -> ForwardTrace<'a> {
    let cfg = &params.config;
    let dim = cfg.dim;
    let a = attention.as_ref();

    let mut ancestors = vec![0.0; dim];
    for ((r, w), t) in a.unified.iter().zip(&a.node_weights).zip(&params.theta) {
        let scale = t * w;
        ancestors.iter_mut().zip(r).for_each(|(f, r)| *f += scale * r);
    }
    let mut facets = [
        ancestors,
        a.children.vector.clone(),
        a.objects.vector.clone(),
        a.data.vector.clone(),
    ];
    for facet in Facet::ALL {
        if !cfg.facets.enabled(facet) {
            facets[facet as usize].iter_mut().for_each(|x| *x = 0.0);
        }
    }

    let category_weights = params.category_weights();
    let context = if cfg.ablation == Ablation::NoContext {
        vec![0.0; dim]
    } else {
        combine_contexts(
            [&facets[0], &facets[1], &facets[2], &facets[3]],
            &params.category_logits,
        )
    };

    let mut input = Vec::with_capacity(2 * dim);
    input.extend_from_slice(&a.u);
    input.extend_from_slice(&context);
    let output = (0..cfg.out_dim).map(|r| dot(params.w_row(r), &input)).collect();

    ForwardTrace {
        attention,
        category_weights,
        facets,
        context,
        input,
        output,
    }
}

/// Full forward pass from embeddings.
pub fn concept_forward(params: &ModelParams, ctx: &ContextEmbeddings) -> Result<ForwardTrace<'static>> {
    let attention = attend(&params.config, ctx)?;
    Ok(forward(params, Cow::Owned(attention)))
}

/// Properties are represented by their label embedding alone.
pub fn property_forward(embedding: &[f64]) -> Vec<f64> {
    embedding.to_vec()
}

/// Cosine similarity; 0 when either vector is zero.
pub fn similarity(x: &[f64], y: &[f64]) -> f64 {
    let nx = dot(x, x).sqrt();
    let ny = dot(y, y).sqrt();
    if nx == 0.0 || ny == 0.0 {
        return 0.0;
    }
    (dot(x, y) / (nx * ny)).clamp(-1.0, 1.0)
}

/// Mean squared error.
pub fn loss(predictions: &[f64], labels: &[f64]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: labels.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::Empty("loss over zero pairs"));
    }
    let sum: f64 = predictions.iter().zip(labels).map(|(h, l)| (h - l).powi(2)).sum();
    Ok(sum / predictions.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FacetMask, Pooling};

    fn cfg(ablation: Ablation) -> ModelConfig {
        ModelConfig {
            dim: 2,
            out_dim: 3,
            max_depth: 3,
            pooling: Pooling::WeightedSum,
            ablation,
            facets: FacetMask::ALL,
        }
    }

    fn ctx() -> ContextEmbeddings {
        ContextEmbeddings {
            u: vec![1.0, 0.5],
            lineage: vec![vec![vec![0.2, 0.1], vec![0.0, 1.0]], vec![vec![-0.5, 0.3]]],
            children: vec![vec![0.4, -0.4]],
            objects: vec![],
            data: vec![vec![1.0, 1.0], vec![-1.0, 0.2]],
        }
    }

    #[test]
    fn no_context_ignores_bundle() {
        let p = ModelParams::init(cfg(Ablation::NoContext), 3);
        let a = concept_forward(&p, &ctx()).unwrap();
        let b = concept_forward(
            &p,
            &ContextEmbeddings {
                u: ctx().u,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(a.output, b.output);
        let expected: Vec<f64> = (0..3).map(|r| dot(&p.w_row(r)[..2], &ctx().u)).collect();
        for (x, y) in a.output.iter().zip(&expected) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_bundle_matches_no_context() {
        let u_only = ContextEmbeddings {
            u: vec![0.3, -0.8],
            ..Default::default()
        };
        let mut full = ModelParams::init(cfg(Ablation::Full), 9);
        let a = concept_forward(&full, &u_only).unwrap();
        full.config.ablation = Ablation::NoContext;
        let b = concept_forward(&full, &u_only).unwrap();
        assert_eq!(a.output, b.output);
    }

    #[test]
    fn combine_is_convex() {
        let v = [0.3, -1.0];
        let same = combine_contexts([&v, &v, &v, &v], &[5.0, -2.0, 0.0, 1.0]);
        assert!(same.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-12));
        let m = combine_contexts([&[1.0], &[2.0], &[3.0], &[6.0]], &[0.7; 4]);
        assert!((m[0] - 3.0).abs() < 1e-12);
        let lim = combine_contexts([&[1.0], &[2.0], &[3.0], &[6.0]], &[0.0, 50.0, 0.0, 0.0]);
        assert!((lim[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_conventions() {
        let v = [0.3, -2.0, 1.0];
        let n: Vec<f64> = v.iter().map(|x| -x).collect();
        assert!((similarity(&v, &v) - 1.0).abs() < 1e-12);
        assert!((similarity(&v, &n) + 1.0).abs() < 1e-12);
        assert_eq!(similarity(&v, &[0.0; 3]), 0.0);
    }

    #[test]
    fn mse() {
        assert_eq!(loss(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(loss(&[0.0], &[1.0]).unwrap(), 1.0);
        assert_eq!(loss(&[0.5, 0.5], &[0.0, 1.0]).unwrap(), 0.25);
        assert!(matches!(loss(&[0.5], &[0.0, 1.0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn property_identity() {
        assert_eq!(property_forward(&[0.1, 0.2]), vec![0.1, 0.2]);
        assert_eq!(property_forward(&[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn over_long_path_is_shape_error() {
        let p = ModelParams::init(cfg(Ablation::Full), 0);
        let mut c = ctx();
        c.lineage[0] = vec![vec![0.0, 0.0]; 4];
        assert!(matches!(concept_forward(&p, &c), Err(Error::Shape { .. })));
    }
}
