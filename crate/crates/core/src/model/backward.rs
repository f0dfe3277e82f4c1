//! Analytic gradients of the pair loss `c · (H - L)²`.
//!
//! The attention traces are constant with respect to the parameters, so only
//! the projection, the positional weights and the category logits receive
//! gradient.

use rayon::prelude::*;

use super::attention::dot;
use super::forward::{similarity, ForwardTrace};
use super::{Ablation, Facet, ModelParams};

/// Gradient of one pair. The projection gradient is kept factored as
/// `g_source ⊗ x_source + g_target ⊗ x_target`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGradient {
    pub g_source: Vec<f64>,
    pub g_target: Vec<f64>,
    pub x_source: Vec<f64>,
    pub x_target: Vec<f64>,
    pub theta: Vec<f64>,
    pub category_logits: [f64; 4],
    pub loss: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w: Vec<f64>,
    pub theta: Vec<f64>,
    pub category_logits: [f64; 4],
}

impl Gradients {
    pub fn zeros(params: &ModelParams) -> Self {
        Gradients {
            w: vec![0.0; params.w.len()],
            theta: vec![0.0; params.theta.len()],
            category_logits: [0.0; 4],
        }
    }

    /// Adds pair gradients in slice order. Rows of `w` are filled in
    /// parallel; each row sums its pairs sequentially so the result does not
    /// depend on the thread count.
    pub fn accumulate(&mut self, pairs: &[PairGradient]) {
        let width = pairs.first().map_or(0, |p| p.x_source.len());
        if width > 0 {
            self.w.par_chunks_mut(width).enumerate().for_each(|(r, row)| {
                for p in pairs {
                    let (gs, gt) = (p.g_source[r], p.g_target[r]);
                    if gs == 0.0 && gt == 0.0 {
                        continue;
                    }
                    for ((w, xs), xt) in row.iter_mut().zip(&p.x_source).zip(&p.x_target) {
                        *w += gs * xs + gt * xt;
                    }
                }
            });
        }
        for p in pairs {
            self.theta.iter_mut().zip(&p.theta).for_each(|(a, b)| *a += b);
            self.category_logits
                .iter_mut()
                .zip(&p.category_logits)
                .for_each(|(a, b)| *a += b);
        }
    }
}

/// `dH/df_x` for `H = cos(f_x, f_y)`; zero if either vector is zero.
fn cosine_grad(fx: &[f64], fy: &[f64], h: f64, scale: f64) -> Vec<f64> {
    let nx = dot(fx, fx).sqrt();
    let ny = dot(fy, fy).sqrt();
    if nx == 0.0 || ny == 0.0 {
        return vec![0.0; fx.len()];
    }
    fx.iter()
        .zip(fy)
        .map(|(x, y)| scale * (y / (nx * ny) - h * x / (nx * nx)))
        .collect()
}

/// Context-side gradients of one concept given `g = dℓ/df`.
fn context_grads(params: &ModelParams, trace: &ForwardTrace<'_>, g: &[f64], theta: &mut [f64], logits: &mut [f64; 4]) {
    let cfg = &params.config;
    if cfg.ablation == Ablation::NoContext {
        return;
    }
    let dim = cfg.dim;
    let width = cfg.input_dim();
    let mut dv = vec![0.0; dim];
    for (r, gr) in g.iter().enumerate() {
        if *gr == 0.0 {
            continue;
        }
        let row = &params.w[r * width + dim..(r + 1) * width];
        dv.iter_mut().zip(row).for_each(|(d, w)| *d += gr * w);
    }
    let p = trace.category_weights;
    let dv_v = dot(&dv, &trace.context);
    for f in Facet::ALL {
        let i = f as usize;
        logits[i] += p[i] * (dot(&dv, &trace.facets[i]) - dv_v);
    }
    if cfg.facets.enabled(Facet::Ancestors) {
        let a = trace.attention.as_ref();
        let pa = p[Facet::Ancestors as usize];
        for ((t, r), beta) in theta.iter_mut().zip(&a.unified).zip(&a.node_weights) {
            *t += beta * pa * dot(r, &dv);
        }
    }
}

/// Loss, score and output gradients of `weight · (cos(f_s, f_t) - label)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineGradient {
    pub loss: f64,
    pub score: f64,
    pub g_source: Vec<f64>,
    pub g_target: Vec<f64>,
}

pub fn cosine_gradient(f_source: &[f64], f_target: &[f64], label: f64, weight: f64) -> CosineGradient {
    let h = similarity(f_source, f_target);
    let dh = 2.0 * weight * (h - label);
    CosineGradient {
        loss: weight * (h - label).powi(2),
        score: h,
        g_source: cosine_grad(f_source, f_target, h, dh),
        g_target: cosine_grad(f_target, f_source, h, dh),
    }
}

/// Gradient of `weight · (cos(f_s, f_t) - label)²`.
pub fn pair_gradient(
    params: &ModelParams,
    source: &ForwardTrace<'_>,
    target: &ForwardTrace<'_>,
    label: f64,
    weight: f64,
) -> PairGradient {
    let c = cosine_gradient(&source.output, &target.output, label, weight);
    let mut theta = vec![0.0; params.theta.len()];
    let mut logits = [0.0; 4];
    context_grads(params, source, &c.g_source, &mut theta, &mut logits);
    context_grads(params, target, &c.g_target, &mut theta, &mut logits);
    PairGradient {
        g_source: c.g_source,
        g_target: c.g_target,
        x_source: source.input.clone(),
        x_target: target.input.clone(),
        theta,
        category_logits: logits,
        loss: c.loss,
        score: c.score,
    }
}

/// Parameter gradient given the summed output gradient `g_out[i]` of each
/// concept `traces[i]`. The loss is linear in `f` per concept, so grouping
/// pair gradients by concept gives the same total at a fraction of the cost.
pub fn concept_gradients(params: &ModelParams, traces: &[ForwardTrace<'_>], g_out: &[Vec<f64>]) -> Gradients {
    let mut grads = Gradients::zeros(params);
    let width = params.config.input_dim();
    grads.w.par_chunks_mut(width).enumerate().for_each(|(r, row)| {
        for (t, g) in traces.iter().zip(g_out) {
            let gr = g[r];
            if gr != 0.0 {
                row.iter_mut().zip(&t.input).for_each(|(w, x)| *w += gr * x);
            }
        }
    });
    let parts: Vec<(Vec<f64>, [f64; 4])> = traces
        .par_iter()
        .zip(g_out)
        .map(|(t, g)| {
            let mut theta = vec![0.0; params.theta.len()];
            let mut logits = [0.0; 4];
            context_grads(params, t, g, &mut theta, &mut logits);
            (theta, logits)
        })
        .collect();
    for (theta, logits) in parts {
        grads.theta.iter_mut().zip(&theta).for_each(|(a, b)| *a += b);
        grads.category_logits.iter_mut().zip(&logits).for_each(|(a, b)| *a += b);
    }
    grads
}

/// Dense gradient of the squared error of a single pair.
pub fn backward(
    source: &ForwardTrace<'_>,
    target: &ForwardTrace<'_>,
    label: f64,
    params: &ModelParams,
) -> Gradients {
    let mut g = Gradients::zeros(params);
    g.accumulate(&[pair_gradient(params, source, target, label, 1.0)]);
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{concept_forward, ContextEmbeddings, FacetMask, ModelConfig, Pooling};

    fn ctx(seed: f64) -> ContextEmbeddings {
        let v = |a: f64, b: f64, c: f64| vec![(seed * a).sin(), (seed * b).cos(), (seed + c).sin()];
        ContextEmbeddings {
            u: v(1.0, 2.0, 3.0),
            lineage: vec![vec![v(0.3, 0.7, 1.1), v(1.3, 0.2, 0.4)], vec![v(2.1, 0.9, 0.5)]],
            children: vec![v(0.5, 1.7, 2.2)],
            objects: vec![v(1.9, 0.1, 0.8), v(0.4, 0.6, 1.6)],
            data: vec![],
        }
    }

    fn loss_at(p: &ModelParams, s: &ContextEmbeddings, t: &ContextEmbeddings, label: f64) -> f64 {
        let a = concept_forward(p, s).unwrap();
        let b = concept_forward(p, t).unwrap();
        (similarity(&a.output, &b.output) - label).powi(2)
    }

    #[test]
    fn matches_central_differences() {
        let cfg = ModelConfig {
            dim: 3,
            out_dim: 2,
            max_depth: 3,
            pooling: Pooling::WeightedSum,
            ablation: Ablation::Full,
            facets: FacetMask::ALL,
        };
        let mut p = ModelParams::init(cfg, 5);
        p.theta = vec![0.8, 1.3, 0.4];
        p.category_logits = [0.2, -0.1, 0.5, 0.0];
        let (s, t) = (ctx(0.7), ctx(1.9));
        let a = concept_forward(&p, &s).unwrap();
        let b = concept_forward(&p, &t).unwrap();
        let g = backward(&a, &b, 1.0, &p);

        let eps = 1e-6;
        let numeric = |set: &dyn Fn(&mut ModelParams, f64)| {
            let mut hi = p.clone();
            set(&mut hi, eps);
            let mut lo = p.clone();
            set(&mut lo, -eps);
            (loss_at(&hi, &s, &t, 1.0) - loss_at(&lo, &s, &t, 1.0)) / (2.0 * eps)
        };
        for i in 0..p.w.len() {
            let d = numeric(&|q, e| q.w[i] += e);
            assert!((d - g.w[i]).abs() < 1e-7, "w[{i}]: {d} vs {}", g.w[i]);
        }
        for i in 0..3 {
            let d = numeric(&|q, e| q.theta[i] += e);
            assert!((d - g.theta[i]).abs() < 1e-7, "theta[{i}]");
        }
        for i in 0..4 {
            let d = numeric(&|q, e| q.category_logits[i] += e);
            assert!((d - g.category_logits[i]).abs() < 1e-7, "logit[{i}]");
        }
    }

    #[test]
    fn grouped_matches_pairwise() {
        let cfg = ModelConfig {
            dim: 3,
            out_dim: 2,
            max_depth: 3,
            ..Default::default()
        };
        let p = ModelParams::init(cfg, 2);
        let ctxs = [ctx(0.4), ctx(1.1), ctx(2.6)];
        let traces: Vec<_> = ctxs.iter().map(|c| concept_forward(&p, c).unwrap()).collect();
        let pairs = [(0, 1, 1.0), (1, 2, 0.0), (0, 2, 0.0), (2, 0, 1.0)];
        let mut pairwise = Gradients::zeros(&p);
        let mut g_out = vec![vec![0.0; 2]; 3];
        for &(i, j, l) in &pairs {
            pairwise.accumulate(&[pair_gradient(&p, &traces[i], &traces[j], l, 0.25)]);
            let c = cosine_gradient(&traces[i].output, &traces[j].output, l, 0.25);
            g_out[i].iter_mut().zip(&c.g_source).for_each(|(a, b)| *a += b);
            g_out[j].iter_mut().zip(&c.g_target).for_each(|(a, b)| *a += b);
        }
        let grouped = concept_gradients(&p, &traces, &g_out);
        for (a, b) in grouped.w.iter().zip(&pairwise.w).chain(grouped.theta.iter().zip(&pairwise.theta)) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in grouped.category_logits.iter().zip(&pairwise.category_logits) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn no_context_has_no_context_gradient() {
        let cfg = ModelConfig {
            dim: 3,
            out_dim: 2,
            max_depth: 3,
            ablation: Ablation::NoContext,
            ..Default::default()
        };
        let p = ModelParams::init(cfg, 1);
        let a = concept_forward(&p, &ctx(0.3)).unwrap();
        let b = concept_forward(&p, &ctx(2.3)).unwrap();
        let g = backward(&a, &b, 0.0, &p);
        assert_eq!(g.theta, vec![0.0; 3]);
        assert_eq!(g.category_logits, [0.0; 4]);
        assert!(g.w.iter().any(|w| *w != 0.0));
    }

    #[test]
    fn perfect_prediction_has_zero_gradient() {
        let cfg = ModelConfig {
            dim: 3,
            out_dim: 2,
            max_depth: 3,
            ..Default::default()
        };
        let p = ModelParams::init(cfg, 1);
        let a = concept_forward(&p, &ctx(0.3)).unwrap();
        let g = backward(&a, &a, 1.0, &p);
        assert!(g.w.iter().all(|w| w.abs() < 1e-12));
    }
}
