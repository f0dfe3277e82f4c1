//! Label embeddings.
//!
//! Vectors come from a precomputed text file keyed by normalized label, with
//! a deterministic hashed character-trigram embedding as an optional
//! fallback for labels missing from the file.
//!
//! File format (UTF-8):
//!
//! ```text
//! dim=<N>
//! <normalized label>\t<v1> <v2> ... <vN>
//! ```

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use xxhash_rust::xxh3::xxh3_64_with_seed;

use crate::{Error, Result};

/// Splits a label on whitespace, `_`, `-` and camelCase boundaries, then
/// lowercases. An uppercase run followed by a lowercase letter keeps its last
/// capital for the next word (`PCMember` -> `pc`, `member`).
pub fn tokenize(label: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in label.split(|c: char| c.is_whitespace() || c == '_' || c == '-') {
        let chars: Vec<char> = chunk.chars().collect();
        let mut start = 0;
        for i in 1..chars.len() {
            let (prev, cur) = (chars[i - 1], chars[i]);
            let next_lower = chars.get(i + 1).is_some_and(|c| c.is_lowercase());
            let boundary = (prev.is_lowercase() || prev.is_numeric()) && cur.is_uppercase()
                || prev.is_uppercase() && cur.is_uppercase() && next_lower;
            if boundary {
                tokens.push(chars[start..i].iter().collect::<String>());
                start = i;
            }
        }
        if start < chars.len() {
            tokens.push(chars[start..].iter().collect::<String>());
        }
    }
    tokens
        .into_iter()
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

/// Lookup key for a label: tokens joined by single spaces.
pub fn normalize_label(label: &str) -> String {
    tokenize(label).join(" ")
}

/// Hashes boundary-marked character trigrams of every token into `dim`
/// signed buckets, averages the token vectors and L2-normalizes. No tokens
/// (or a degenerate all-zero sum) yields the zero vector.
pub fn hash_embed(tokens: &[String], dim: usize, seed: u64) -> Vec<f64> {
    assert!(dim > 0, "embedding dimension must be positive");
    let mut out = vec![0.0; dim];
    if tokens.is_empty() {
        return out;
    }
    let mut token_vec = vec![0.0; dim];
    for token in tokens {
        token_vec.iter_mut().for_each(|x| *x = 0.0);
        let marked: Vec<char> = std::iter::once('<')
            .chain(token.chars())
            .chain(std::iter::once('>'))
            .collect();
        let mut gram = String::new();
        for w in marked.windows(3) {
            gram.clear();
            gram.extend(w);
            let h = xxh3_64_with_seed(gram.as_bytes(), seed);
            let bucket = (h % dim as u64) as usize;
            let sign = if h >> 63 == 1 { -1.0 } else { 1.0 };
            token_vec[bucket] += sign;
        }
        for (o, t) in out.iter_mut().zip(&token_vec) {
            *o += t;
        }
    }
    let n = tokens.len() as f64;
    out.iter_mut().for_each(|x| *x /= n);
    let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        out.iter_mut().for_each(|x| *x /= norm);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fallback {
    HashEmbed { seed: u64 },
    Fail,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
    fallback: Fallback,
}

impl EmbeddingStore {
    pub fn new(dim: usize, fallback: Fallback) -> Self {
        EmbeddingStore {
            dim,
            vectors: BTreeMap::new(),
            fallback,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn fallback(&self) -> Fallback {
        self.fallback
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Stores a vector under the normalized form of `label`.
    pub fn insert(&mut self, label: &str, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::Shape {
                expected: self.dim,
                got: vector.len(),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::EmbeddingFormat {
                line: 0,
                message: format!("non-finite value for `{label}`"),
            });
        }
        self.vectors.insert(normalize_label(label), vector);
        Ok(())
    }

    pub fn lookup(&self, label: &str) -> Result<Vec<f64>> {
        let key = normalize_label(label);
        if let Some(v) = self.vectors.get(&key) {
            return Ok(v.clone());
        }
        match self.fallback {
            Fallback::HashEmbed { seed } => Ok(hash_embed(&tokenize(label), self.dim, seed)),
            Fallback::Fail => Err(Error::MissingEmbedding(label.to_string())),
        }
    }

    pub fn load<R: BufRead>(reader: R, fallback: Fallback) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line.map_err(|e| Error::EmbeddingFormat {
                line: 1,
                message: e.to_string(),
            })?,
            None => {
                return Err(Error::EmbeddingFormat {
                    line: 1,
                    message: "missing `dim=` header".into(),
                })
            }
        };
        let dim: usize = header
            .trim_end()
            .strip_prefix("dim=")
            .and_then(|d| d.parse().ok())
            .filter(|d| *d > 0)
            .ok_or_else(|| Error::EmbeddingFormat {
                line: 1,
                message: format!("bad header `{header}`"),
            })?;
        let mut store = EmbeddingStore::new(dim, fallback);
        for (i, line) in lines {
            let lineno = i + 1;
            let line = line.map_err(|e| Error::EmbeddingFormat {
                line: lineno,
                message: e.to_string(),
            })?;
            let line = line.trim_end_matches(['\r', '\n']);
            if line.is_empty() {
                continue;
            }
            let (label, values) = line.split_once('\t').ok_or_else(|| Error::EmbeddingFormat {
                line: lineno,
                message: "expected `<label>\\t<values>`".into(),
            })?;
            let vector = values
                .split_ascii_whitespace()
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::EmbeddingFormat {
                    line: lineno,
                    message: e.to_string(),
                })?;
            if vector.len() != dim {
                return Err(Error::EmbeddingFormat {
                    line: lineno,
                    message: format!("expected {dim} values, found {}", vector.len()),
                });
            }
            if vector.iter().any(|v| !v.is_finite()) {
                return Err(Error::EmbeddingFormat {
                    line: lineno,
                    message: "non-finite value".into(),
                });
            }
            store.vectors.insert(label.to_string(), vector);
        }
        Ok(store)
    }

    /// Writes rows sorted by label; values use the shortest representation
    /// that parses back to the same `f64`.
    pub fn save<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        writeln!(writer, "dim={}", self.dim)?;
        for (label, vector) in &self.vectors {
            write!(writer, "{label}\t")?;
            for (i, v) in vector.iter().enumerate() {
                if i > 0 {
                    writer.write_all(b" ")?;
                }
                write!(writer, "{v}")?;
            }
            writer.write_all(b"\n")?;
        }
        Ok(())
    }
}
