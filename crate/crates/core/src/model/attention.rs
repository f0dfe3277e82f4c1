//! Attention primitives over plain `f64` vectors.

use super::Pooling;
use crate::{Error, Result};

/// Inner product over the common prefix of `a` and `b`, accumulated in
/// eight lanes.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for i in 0..8 {
            acc[i] += x[i] * y[i];
        }
    }
    (acc[0] + acc[4]) + (acc[1] + acc[5]) + (acc[2] + acc[6]) + (acc[3] + acc[7]) + tail
}

/// Numerically stable softmax. Empty input gives empty output.
pub fn softmax(xs: &[f64]) -> Vec<f64> {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = xs.iter().map(|x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn check_dim(expected: usize, v: &[f64]) -> Result<()> {
    if v.len() != expected {
        return Err(Error::Shape {
            expected,
            got: v.len(),
        });
    }
    Ok(())
}

/// Score of every node on one path: `u · node_k`.
pub fn path_node_scores(u: &[f64], nodes: &[Vec<f64>]) -> Result<Vec<f64>> {
    nodes
        .iter()
        .map(|n| {
            check_dim(u.len(), n)?;
            Ok(dot(u, n))
        })
        .collect()
}

/// Path weights: softmax over paths of the summed node scores.
pub fn path_attention(per_path_scores: &[Vec<f64>]) -> Vec<f64> {
    let sums: Vec<f64> = per_path_scores.iter().map(|s| s.iter().sum()).collect();
    softmax(&sums)
}

/// Merges paths position by position into one unified path whose length is
/// the longest input path. Shorter paths are padded with zero vectors, which
/// contribute no mass to the weighted sum. `MaxPool` takes the elementwise
/// maximum over the paths that reach each position and ignores `weights`.
pub fn unify_paths(weights: &[f64], paths: &[Vec<Vec<f64>>], pooling: Pooling, dim: usize) -> Vec<Vec<f64>> {
    let len = paths.iter().map(Vec::len).max().unwrap_or(0);
    (0..len)
        .map(|k| match pooling {
            Pooling::WeightedSum => {
                let mut r = vec![0.0; dim];
                for (w, path) in weights.iter().zip(paths) {
                    if let Some(node) = path.get(k) {
                        r.iter_mut().zip(node).for_each(|(r, n)| *r += w * n);
                    }
                }
                r
            }
            Pooling::MaxPool => {
                let mut r = vec![f64::NEG_INFINITY; dim];
                for node in paths.iter().filter_map(|p| p.get(k)) {
                    r.iter_mut().zip(node).for_each(|(r, n)| *r = r.max(*n));
                }
                r
            }
        })
        .collect()
}

/// Node-level weights over a `horizon`-slot path: softmax of `u · R_k` over
/// the filled slots, exactly zero on padded slots.
pub fn node_attention_weights(u: &[f64], unified: &[Vec<f64>], horizon: usize) -> Vec<f64> {
    let filled = unified.len().min(horizon);
    let scores: Vec<f64> = unified[..filled].iter().map(|r| dot(u, r)).collect();
    let mut weights = softmax(&scores);
    weights.resize(horizon, 0.0);
    weights
}

/// `Σ_k theta_k · w_k · R_k` with node-level weights `w`. Returns the zero
/// vector when every slot is padding.
pub fn node_attention_combine(u: &[f64], unified: &[Vec<f64>], theta: &[f64]) -> Vec<f64> {
    let weights = node_attention_weights(u, unified, theta.len());
    let mut out = vec![0.0; u.len()];
    for ((r, w), t) in unified.iter().zip(&weights).zip(theta) {
        let scale = t * w;
        out.iter_mut().zip(r).for_each(|(o, r)| *o += scale * r);
    }
    out
}

/// One-hop facet: path-level attention over length-one paths, returning the
/// weights and the weighted sum. No neighbours gives the zero vector.
pub fn facet_vector_single_hop(u: &[f64], neighbors: &[Vec<f64>], uniform: bool) -> (Vec<f64>, Vec<f64>) {
    let weights = if uniform {
        vec![1.0 / neighbors.len() as f64; neighbors.len()]
    } else {
        let scores: Vec<f64> = neighbors.iter().map(|n| dot(u, n)).collect();
        softmax(&scores)
    };
    let mut out = vec![0.0; u.len()];
    for (w, n) in weights.iter().zip(neighbors) {
        out.iter_mut().zip(n).for_each(|(o, n)| *o += w * n);
    }
    (weights, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn node_scores() {
        assert_eq!(path_node_scores(&[1.0, 0.0], &[vec![0.5, 0.5]]).unwrap(), vec![0.5]);
        assert_eq!(
            path_node_scores(&[0.0, 1.0], &[vec![3.0, 0.0], vec![-2.0, 0.0]]).unwrap(),
            vec![0.0, 0.0]
        );
        assert_eq!(
            path_node_scores(&[2.0, 0.0], &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(),
            vec![2.0, 0.0]
        );
        assert!(matches!(
            path_node_scores(&[1.0, 0.0], &[vec![1.0]]),
            Err(Error::Shape { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn path_weights() {
        assert_eq!(path_attention(&[vec![0.3, 9.0]]), vec![1.0]);
        assert!(close(&path_attention(&[vec![1.0, 2.0], vec![3.0]]), &[0.5, 0.5]));
        // e^{ln 2} / (e^{ln 2} + e^0) = 2/3
        let w = path_attention(&[vec![std::f64::consts::LN_2], vec![0.0]]);
        assert!(close(&w, &[2.0 / 3.0, 1.0 / 3.0]));
        assert!(path_attention(&[]).is_empty());
    }

    #[test]
    fn unify() {
        let p = vec![vec![vec![1.0, 2.0], vec![3.0, 4.0]]];
        assert_eq!(unify_paths(&[1.0], &p, Pooling::WeightedSum, 2), p[0]);

        let v = vec![0.7, -0.2];
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        let r = unify_paths(&[0.5, 0.5], &[vec![v.clone()], vec![neg]], Pooling::WeightedSum, 2);
        assert!(close(&r[0], &[0.0, 0.0]));

        // the short path is padded; slot 1 only carries the long path's mass
        let r = unify_paths(
            &[0.25, 0.75],
            &[vec![vec![1.0, 0.0]], vec![vec![0.0, 1.0], vec![2.0, 2.0]]],
            Pooling::WeightedSum,
            2,
        );
        assert!(close(&r[0], &[0.25, 0.75]));
        assert!(close(&r[1], &[1.5, 1.5]));

        let r = unify_paths(
            &[0.9, 0.1],
            &[vec![vec![1.0, -3.0]], vec![vec![-1.0, -2.0], vec![-5.0, -6.0]]],
            Pooling::MaxPool,
            2,
        );
        assert_eq!(r, vec![vec![1.0, -2.0], vec![-5.0, -6.0]]);
    }

    #[test]
    fn node_combine() {
        let r = vec![vec![0.3, -0.4]];
        assert_eq!(node_attention_combine(&[1.0, 1.0], &r, &[1.0, 1.0, 1.0]), r[0]);
        assert_eq!(node_attention_combine(&[1.0, 1.0], &r, &[0.0; 3]), vec![0.0, 0.0]);
        let two = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(close(&node_attention_combine(&[1.0, 1.0], &two, &[1.0, 1.0]), &[0.5, 0.5]));
        assert_eq!(node_attention_combine(&[1.0, 1.0], &[], &[1.0, 1.0]), vec![0.0, 0.0]);
        let w = node_attention_weights(&[1.0, 1.0], &two, 4);
        assert_eq!(w.len(), 4);
        assert_eq!(&w[2..], &[0.0, 0.0]);
    }

    #[test]
    fn single_hop() {
        let u = [1.0, 0.0];
        assert_eq!(facet_vector_single_hop(&u, &[], false).1, vec![0.0, 0.0]);
        let n = vec![0.2, 0.9];
        assert_eq!(facet_vector_single_hop(&u, std::slice::from_ref(&n), false).1, n);
        let (w, v) = facet_vector_single_hop(&[0.0, 1.0], &[vec![1.0, 0.0], vec![-1.0, 0.0]], false);
        assert_eq!(w, vec![0.5, 0.5]);
        assert!(close(&v, &[0.0, 0.0]));
    }
}
