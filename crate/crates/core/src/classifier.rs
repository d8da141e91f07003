//! Inference and evaluation metrics.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::AddlModel;
use crate::{Error, Matrix, Result};

/// Class scores `W P X`, one column per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftLabels {
    pub scores: Matrix,
}

fn check_dim(model: &AddlModel, x: &Matrix) -> Result<()> {
    if x.nrows() != model.dim {
        return Err(Error::DimensionMismatch { expected: model.dim, found: x.nrows() });
    }
    Ok(())
}

/// `Σ_l W_l P_l X`.
pub fn soft_labels(model: &AddlModel, x: &Matrix) -> Result<SoftLabels> {
    check_dim(model, x)?;
    let mut scores = Matrix::zeros(model.class_count, x.ncols());
    for (w, p) in model.w.iter().zip(&model.p) {
        scores += w * (p * x);
    }
    Ok(SoftLabels { scores })
}

/// Index of the largest entry; ties and NaNs resolve to the lowest index.
pub fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in values.into_iter().enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

fn argmin(values: impl IntoIterator<Item = f64>) -> usize {
    argmax(values.into_iter().map(|v| -v))
}

impl SoftLabels {
    pub fn predict(&self) -> Vec<usize> {
        self.scores.column_iter().map(|c| argmax(c.iter().copied())).collect()
    }
}

/// Hard labels: position of the largest soft-label entry.
pub fn predict(model: &AddlModel, x: &Matrix) -> Result<Vec<usize>> {
    Ok(soft_labels(model, x)?.predict())
}

/// Class whose analysis-synthesis pair `D_l P_l` reconstructs the sample
/// best. Used when no classifier is trained.
pub fn predict_residual(model: &AddlModel, x: &Matrix) -> Result<Vec<usize>> {
    check_dim(model, x)?;
    let recon: Vec<Matrix> = model.d.iter().zip(&model.p).map(|(d, p)| d * (p * x)).collect();
    Ok((0..x.ncols())
        .map(|j| {
            let col = x.column(j);
            argmin(recon.iter().map(|r| (col - r.column(j)).norm()))
        })
        .collect())
}

pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch(pred.len(), truth.len()));
    }
    if pred.is_empty() {
        return Ok(0.0);
    }
    let hits = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / pred.len() as f64)
}

/// Accuracy restricted to each true class (NaN-free: classes absent from
/// `truth` report 0).
pub fn per_class_accuracy(pred: &[usize], truth: &[usize], classes: usize) -> Result<Vec<f64>> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch(pred.len(), truth.len()));
    }
    let mut hits = alloc::vec![0usize; classes];
    let mut totals = alloc::vec![0usize; classes];
    for (&p, &t) in pred.iter().zip(truth) {
        if t < classes {
            totals[t] += 1;
            hits[t] += (p == t) as usize;
        }
    }
    Ok(hits.iter().zip(&totals).map(|(&h, &t)| if t == 0 { 0.0 } else { h as f64 / t as f64 }).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// One-vs-rest ROC of `positive_class`, scoring each sample by its row of
/// `scores`. A sample is called positive when its score is `>=` the threshold;
/// thresholds sweep `+∞`, every distinct score in decreasing order, then `−∞`.
pub fn roc_one_vs_rest(scores: &SoftLabels, truth: &[usize], positive_class: usize) -> Result<RocCurve> {
    let c = scores.scores.nrows();
    if positive_class >= c {
        return Err(Error::ClassOutOfRange { index: positive_class, classes: c });
    }
    if truth.len() != scores.scores.ncols() {
        return Err(Error::LengthMismatch(truth.len(), scores.scores.ncols()));
    }
    let mut samples: Vec<(f64, bool)> =
        truth.iter().enumerate().map(|(j, &t)| (scores.scores[(positive_class, j)], t == positive_class)).collect();
    let pos = samples.iter().filter(|s| s.1).count();
    let neg = samples.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClassTruth);
    }
    samples.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(core::cmp::Ordering::Equal));

    let mut points = alloc::vec![RocPoint { threshold: f64::INFINITY, fpr: 0.0, tpr: 0.0 }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < samples.len() {
        let threshold = samples[i].0;
        while i < samples.len() && samples[i].0 == threshold {
            if samples[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint { threshold, fpr: fp as f64 / neg as f64, tpr: tp as f64 / pos as f64 });
    }
    points.push(RocPoint { threshold: f64::NEG_INFINITY, fpr: 1.0, tpr: 1.0 });
    let auc = points.windows(2).map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0).sum();
    Ok(RocCurve { points, auc })
}
