//! Siamese dual-attention scorer.
//!
//! A concept is represented as `W · [u, v]` where `u` is its label embedding
//! and `v` a convex mixture of four context facet vectors. The ancestor facet
//! runs two attention stages: path-level attention over lineage paths merges
//! them into one unified path, then node-level attention (scaled by the
//! positional weights `theta`) collapses that path. The other facets treat
//! each one-hop neighbour as a length-one path and use path-level attention
//! only. Pairs are scored by cosine similarity and trained with squared
//! error.
//!
//! Label embeddings are frozen, so both attention stages depend only on the
//! embeddings; [`attend`] computes them once per concept and
//! [`forward`] applies the trainable parameters.

mod attention;
mod backward;
mod checkpoint;
mod forward;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Error;

pub use attention::{
    dot, facet_vector_single_hop, node_attention_combine, node_attention_weights, path_attention,
    path_node_scores, softmax, unify_paths,
};
pub use backward::{
    backward, concept_gradients, cosine_gradient, pair_gradient, CosineGradient, Gradients, PairGradient,
};
pub use checkpoint::Checkpoint;
pub use forward::{
    attend, combine_contexts, concept_forward, forward, loss, property_forward, similarity,
    AttentionTrace, ContextEmbeddings, ForwardTrace, SingleHop,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pooling {
    #[default]
    WeightedSum,
    MaxPool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, PartialOrd, Ord)]
pub enum Ablation {
    #[default]
    Full,
    /// Uniform path-level weights instead of path attention.
    SingleAttention,
    /// Context vector forced to zero.
    NoContext,
}

/// Context facets, in the order used by `category_logits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Facet {
    Ancestors = 0,
    Children = 1,
    ObjectNeighbors = 2,
    DataNeighbors = 3,
}

impl Facet {
    pub const ALL: [Facet; 4] = [
        Facet::Ancestors,
        Facet::Children,
        Facet::ObjectNeighbors,
        Facet::DataNeighbors,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Facet::Ancestors => "ancestors",
            Facet::Children => "children",
            Facet::ObjectNeighbors => "object",
            Facet::DataNeighbors => "data",
        }
    }
}

/// Which facets contribute to the context vector. Disabled facets are
/// replaced by zero vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FacetMask(pub [bool; 4]);

impl FacetMask {
    pub const ALL: FacetMask = FacetMask([true; 4]);

    pub fn only(facet: Facet) -> Self {
        let mut m = [false; 4];
        m[facet as usize] = true;
        FacetMask(m)
    }

    pub fn enabled(&self, facet: Facet) -> bool {
        self.0[facet as usize]
    }
}

impl Default for FacetMask {
    fn default() -> Self {
        FacetMask::ALL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelConfig {
    /// Label embedding dimension.
    pub dim: usize,
    /// Output (projection) dimension.
    pub out_dim: usize,
    /// Positional horizon of the ancestor facet; length of `theta`.
    pub max_depth: usize,
    pub pooling: Pooling,
    pub ablation: Ablation,
    pub facets: FacetMask,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            dim: 512,
            out_dim: 300,
            max_depth: 6,
            pooling: Pooling::WeightedSum,
            ablation: Ablation::Full,
            facets: FacetMask::ALL,
        }
    }
}

impl ModelConfig {
    pub fn input_dim(&self) -> usize {
        2 * self.dim
    }
}

/// All trainable parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    /// Projection, `out_dim × 2·dim`, row-major, no bias.
    pub w: Vec<f64>,
    /// Positional node weights, index 0 is the nearest ancestor.
    pub theta: Vec<f64>,
    /// Softmax logits of the four facet weights.
    pub category_logits: [f64; 4],
}

impl ModelParams {
    /// `W ~ U[-a, a]` with `a = sqrt(6 / (in + out))`, `theta = 1`,
    /// `category_logits = 0`.
    pub fn init(config: ModelConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fan_in = config.input_dim();
        let bound = (6.0 / (fan_in + config.out_dim) as f64).sqrt();
        let w = (0..config.out_dim * fan_in)
            .map(|_| rng.random_range(-bound..=bound))
            .collect();
        ModelParams {
            config,
            w,
            theta: vec![1.0; config.max_depth],
            category_logits: [0.0; 4],
        }
    }

    pub fn w_row(&self, row: usize) -> &[f64] {
        let n = self.config.input_dim();
        &self.w[row * n..(row + 1) * n]
    }

    /// Softmax of the category logits: `[w_a, w_h, w_o, w_d]`.
    pub fn category_weights(&self) -> [f64; 4] {
        let s = softmax(&self.category_logits);
        [s[0], s[1], s[2], s[3]]
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().chain(&self.theta).chain(&self.category_logits).all(|v| v.is_finite())
    }
}

impl fmt::Display for Pooling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pooling::WeightedSum => "weighted_sum",
            Pooling::MaxPool => "max_pool",
        })
    }
}

impl FromStr for Pooling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "weighted_sum" => Ok(Pooling::WeightedSum),
            "max_pool" => Ok(Pooling::MaxPool),
            _ => Err(Error::Config(format!("unknown pooling `{s}`"))),
        }
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ablation::Full => "full",
            Ablation::SingleAttention => "single_attention",
            Ablation::NoContext => "no_context",
        })
    }
}

impl FromStr for Ablation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "full" => Ok(Ablation::Full),
            "single_attention" => Ok(Ablation::SingleAttention),
            "no_context" => Ok(Ablation::NoContext),
            _ => Err(Error::Config(format!("unknown ablation `{s}`"))),
        }
    }
}

impl fmt::Display for FacetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = Facet::ALL
            .iter()
            .filter(|x| self.enabled(**x))
            .map(|x| x.name())
            .collect();
        if names.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&names.join(","))
        }
    }
}

impl FromStr for FacetMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let mut mask = [false; 4];
        if s.trim() == "none" {
            return Ok(FacetMask(mask));
        }
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let facet = Facet::ALL
                .into_iter()
                .find(|f| f.name() == part)
                .ok_or_else(|| Error::Config(format!("unknown facet `{part}`")))?;
            mask[facet as usize] = true;
        }
        Ok(FacetMask(mask))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_shapes_and_bounds() {
        let cfg = ModelConfig {
            dim: 8,
            out_dim: 4,
            ..Default::default()
        };
        let p = ModelParams::init(cfg, 0);
        assert_eq!(p.w.len(), 4 * 16);
        let bound = (6.0f64 / 20.0).sqrt();
        assert!(p.w.iter().all(|w| w.abs() <= bound));
        assert_eq!(p.theta, vec![1.0; 6]);
        assert_eq!(p.category_weights(), [0.25; 4]);
        assert_eq!(p, ModelParams::init(cfg, 0));
        assert_ne!(p, ModelParams::init(cfg, 1));
    }

    #[test]
    fn enum_text_forms() {
        for m in ["ancestors,children,object,data", "ancestors", "none", "object,data"] {
            assert_eq!(m.parse::<FacetMask>().unwrap().to_string(), m);
        }
        assert!("parents".parse::<FacetMask>().is_err());
        for a in [Ablation::Full, Ablation::SingleAttention, Ablation::NoContext] {
            assert_eq!(a.to_string().parse::<Ablation>().unwrap(), a);
        }
        assert_eq!("max_pool".parse::<Pooling>().unwrap(), Pooling::MaxPool);
    }
}
