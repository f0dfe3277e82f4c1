use crate::{Error, Result};

/// Used when validation data holds no positive pair.
pub const FALLBACK_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdWarning {
    /// No positive pair to tune on; the fallback threshold was used.
    NoPositives,
    /// The chosen threshold predicts every pair positive.
    AllPositive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdChoice {
    pub theta: f64,
    /// F1 on the tuning data at `theta`.
    pub f1: f64,
    pub warning: Option<ThresholdWarning>,
}

/// `score > theta`.
pub fn predict(scores: &[f64], theta: f64) -> Vec<bool> {
    scores.iter().map(|s| *s > theta).collect()
}

fn f1_at(scores: &[f64], labels: &[bool], theta: f64) -> (f64, usize) {
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (s, l) in scores.iter().zip(labels) {
        match (*s > theta, *l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let f1 = if tp == 0 {
        0.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
    };
    (f1, tp + fp)
}

/// Grid search over `i / 100` for `i = 0..=100` maximizing positive-class
/// F1; the smallest best threshold wins.
pub fn select_threshold(scores: &[f64], labels: &[bool]) -> Result<ThresholdChoice> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: labels.len(),
        });
    }
    if !labels.iter().any(|l| *l) {
        log::warn!("no positive validation pairs; using threshold {FALLBACK_THRESHOLD}");
        return Ok(ThresholdChoice {
            theta: FALLBACK_THRESHOLD,
            f1: 0.0,
            warning: Some(ThresholdWarning::NoPositives),
        });
    }
    let mut best = (0.0, -1.0, 0);
    for i in 0..=100 {
        let theta = i as f64 / 100.0;
        let (f1, predicted) = f1_at(scores, labels, theta);
        if f1 > best.1 {
            best = (theta, f1, predicted);
        }
    }
    let warning = if best.2 == scores.len() {
        log::warn!("threshold {} predicts every validation pair positive", best.0);
        Some(ThresholdWarning::AllPositive)
    } else {
        None
    };
    Ok(ThresholdChoice {
        theta: best.0,
        f1: best.1,
        warning,
    })
}
