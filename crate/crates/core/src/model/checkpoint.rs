//! Plain-text model checkpoints.
//!
//! ```text
//! ontalign-checkpoint 1
//! dim 512
//! out_dim 300
//! max_depth 6
//! max_paths 8
//! pooling weighted_sum
//! ablation full
//! facets ancestors,children,object,data
//! threshold_concept 0.42
//! threshold_property 0.5
//! theta 1 1 1 1 1 1
//! category_logits 0 0 0 0
//! w
//! <out_dim lines of 2·dim values>
//! ```
//!
//! Floats use the shortest representation that parses back exactly.

use std::fmt::Write as _;

use super::{ModelConfig, ModelParams};
use crate::{Error, Result};

const MAGIC: &str = "ontalign-checkpoint 1";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams,
    pub max_paths: usize,
    pub threshold_concept: f64,
    pub threshold_property: f64,
}

fn join(values: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{v}");
    }
    s
}

fn bad(line: usize, message: impl Into<String>) -> Error {
    Error::CheckpointFormat {
        line,
        message: message.into(),
    }
}

fn floats(line: usize, text: &str, expected: usize) -> Result<Vec<f64>> {
    let values = text
        .split_ascii_whitespace()
        .map(str::parse::<f64>)
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| bad(line, e.to_string()))?;
    if values.len() != expected {
        return Err(bad(line, format!("expected {expected} values, found {}", values.len())));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad(line, "non-finite value"));
    }
    Ok(values)
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let c = &p.config;
        let mut s = String::new();
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "dim {}", c.dim);
        let _ = writeln!(s, "out_dim {}", c.out_dim);
        let _ = writeln!(s, "max_depth {}", c.max_depth);
        let _ = writeln!(s, "max_paths {}", self.max_paths);
        let _ = writeln!(s, "pooling {}", c.pooling);
        let _ = writeln!(s, "ablation {}", c.ablation);
        let _ = writeln!(s, "facets {}", c.facets);
        let _ = writeln!(s, "threshold_concept {}", self.threshold_concept);
        let _ = writeln!(s, "threshold_property {}", self.threshold_property);
        let _ = writeln!(s, "theta {}", join(&p.theta));
        let _ = writeln!(s, "category_logits {}", join(&p.category_logits));
        s.push_str("w\n");
        for r in 0..c.out_dim {
            let _ = writeln!(s, "{}", join(p.w_row(r)));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |key: &str| -> Result<(usize, String)> {
            let (n, line) = lines.next().ok_or_else(|| bad(0, format!("missing `{key}`")))?;
            if key == MAGIC {
                return if line.trim_end() == MAGIC {
                    Ok((n, String::new()))
                } else {
                    Err(bad(n, "not an ontalign checkpoint"))
                };
            }
            let rest = line
                .strip_prefix(key)
                .filter(|r| r.is_empty() || r.starts_with(' '))
                .ok_or_else(|| bad(n, format!("expected `{key}`")))?;
            Ok((n, rest.trim().to_string()))
        };
        fn int(n: usize, v: &str) -> Result<usize> {
            v.parse().map_err(|_| bad(n, format!("bad integer `{v}`")))
        }
        fn float(n: usize, v: &str) -> Result<f64> {
            v.parse().map_err(|_| bad(n, format!("bad number `{v}`")))
        }

        next(MAGIC)?;
        let (n, v) = next("dim")?;
        let dim = int(n, &v)?;
        let (n, v) = next("out_dim")?;
        let out_dim = int(n, &v)?;
        let (n, v) = next("max_depth")?;
        let max_depth = int(n, &v)?;
        let (n, v) = next("max_paths")?;
        let max_paths = int(n, &v)?;
        let (_, v) = next("pooling")?;
        let pooling = v.parse()?;
        let (_, v) = next("ablation")?;
        let ablation = v.parse()?;
        let (_, v) = next("facets")?;
        let facets = v.parse()?;
        let (n, v) = next("threshold_concept")?;
        let threshold_concept = float(n, &v)?;
        let (n, v) = next("threshold_property")?;
        let threshold_property = float(n, &v)?;
        let (n, v) = next("theta")?;
        let theta = floats(n, &v, max_depth)?;
        let (n, v) = next("category_logits")?;
        let l = floats(n, &v, 4)?;
        next("w")?;
        let config = ModelConfig {
            dim,
            out_dim,
            max_depth,
            pooling,
            ablation,
            facets,
        };
        let mut w = Vec::with_capacity(out_dim * config.input_dim());
        for _ in 0..out_dim {
            let (n, line) = lines.next().ok_or_else(|| bad(0, "truncated projection"))?;
            w.extend(floats(n, line, config.input_dim())?);
        }
        if let Some((n, extra)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(bad(n, format!("unexpected trailing line `{extra}`")));
        }
        Ok(Checkpoint {
            params: ModelParams {
                config,
                w,
                theta,
                category_logits: [l[0], l[1], l[2], l[3]],
            },
            max_paths,
            threshold_concept,
            threshold_property,
        })
    }
}
