use std::ops::AddAssign;

use crate::{Error, Result};

/// Confusion counts of the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl Confusion {
    pub fn from_predictions(predicted: &[bool], truth: &[bool]) -> Result<Self> {
        if predicted.len() != truth.len() {
            return Err(Error::LengthMismatch {
                left: predicted.len(),
                right: truth.len(),
            });
        }
        let mut c = Confusion::default();
        for (p, t) in predicted.iter().zip(truth) {
            match (p, t) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => {}
            }
        }
        Ok(c)
    }

    pub fn scores(&self) -> Scores {
        let precision = ratio(self.tp, self.tp + self.fp);
        let recall = ratio(self.tp, self.tp + self.fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Scores {
            precision,
            recall,
            f1,
        }
    }
}

impl AddAssign for Confusion {
    fn add_assign(&mut self, o: Confusion) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }
}

/// Precision, recall and F1 of the positive class with their counts.
pub fn metrics(predicted: &[bool], truth: &[bool]) -> Result<(Scores, Confusion)> {
    let c = Confusion::from_predictions(predicted, truth)?;
    Ok((c.scores(), c))
}

/// Mean of per-fold scores.
pub fn macro_average(folds: &[Scores]) -> Scores {
    if folds.is_empty() {
        return Scores::default();
    }
    let n = folds.len() as f64;
    Scores {
        precision: folds.iter().map(|s| s.precision).sum::<f64>() / n,
        recall: folds.iter().map(|s| s.recall).sum::<f64>() / n,
        f1: folds.iter().map(|s| s.f1).sum::<f64>() / n,
    }
}
