//! Regression and classification metrics.
//!
//! Undefined quantities are `None` rather than NaN: a per-class precision
//! with no predictions of that class, a sensitivity for a class absent from
//! the ground truth. MCC falls back to 0 whenever its denominator vanishes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("length mismatch: {0} predictions vs {1} targets")]
    LengthMismatch(usize, usize),
    #[error("no samples")]
    Empty,
    #[error("only one class present")]
    SingleClass,
    #[error("no positive samples")]
    NoPositives,
}

fn same_len(a: usize, b: usize) -> Result<(), MetricError> {
    if a != b {
        return Err(MetricError::LengthMismatch(a, b));
    }
    if a == 0 {
        return Err(MetricError::Empty);
    }
    Ok(())
}

pub fn mae(pred: &[f64], truth: &[f64]) -> Result<f64, MetricError> {
    same_len(pred.len(), truth.len())?;
    Ok(pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum::<f64>() / pred.len() as f64)
}

pub fn accuracy<T: PartialEq>(pred: &[T], truth: &[T]) -> Result<f64, MetricError> {
    same_len(pred.len(), truth.len())?;
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / pred.len() as f64)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl BinaryCounts {
    pub fn from_predictions(pred: &[bool], truth: &[bool]) -> Result<Self, MetricError> {
        same_len(pred.len(), truth.len())?;
        let mut c = Self::default();
        for (&p, &t) in pred.iter().zip(truth) {
            match (p, t) {
                (true, true) => c.tp += 1,
                (false, false) => c.tn += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    /// TP / (TP + FN), absent without positives.
    pub fn sensitivity(&self) -> Option<f64> {
        let p = self.tp + self.fn_;
        (p > 0).then(|| self.tp as f64 / p as f64)
    }

    /// TP / (TP + FP), absent without positive predictions.
    pub fn precision(&self) -> Option<f64> {
        let p = self.tp + self.fp;
        (p > 0).then(|| self.tp as f64 / p as f64)
    }
}

/// Matthews correlation; 0 if any factor of the denominator is 0.
pub fn mcc_binary(c: &BinaryCounts) -> f64 {
    let (tp, tn, fp, fn_) = (c.tp as f64, c.tn as f64, c.fp as f64, c.fn_ as f64);
    let den = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    if den == 0.0 {
        return 0.0;
    }
    (tp * tn - fp * fn_) / den.sqrt()
}

/// Square confusion matrix indexed `[true class][predicted class]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub counts: Vec<Vec<u64>>,
}

impl Confusion {
    pub fn new(classes: usize) -> Self {
        Self {
            counts: vec![vec![0; classes]; classes],
        }
    }

    pub fn from_predictions(pred: &[usize], truth: &[usize], classes: usize) -> Result<Self, MetricError> {
        same_len(pred.len(), truth.len())?;
        let mut c = Self::new(classes);
        for (&p, &t) in pred.iter().zip(truth) {
            c.counts[t][p] += 1;
        }
        Ok(c)
    }

    pub fn classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Number of samples whose true class is `c`.
    pub fn n_true(&self, c: usize) -> u64 {
        self.counts[c].iter().sum()
    }

    /// Number of samples predicted as `c`.
    pub fn n_pred(&self, c: usize) -> u64 {
        self.counts.iter().map(|row| row[c]).sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.classes()).map(|c| self.counts[c][c]).sum()
    }

    pub fn sensitivity(&self, c: usize) -> Option<f64> {
        let n = self.n_true(c);
        (n > 0).then(|| self.counts[c][c] as f64 / n as f64)
    }

    pub fn precision(&self, c: usize) -> Option<f64> {
        let p = self.n_pred(c);
        (p > 0).then(|| self.counts[c][c] as f64 / p as f64)
    }
}

/// Multiclass MCC:
/// `(n·correct − Σ n_C p_C) / √((n² − Σ p_C²)(n² − Σ n_C²))`, 0 if either
/// bracket vanishes.
pub fn mcc_multiclass(c: &Confusion) -> f64 {
    let n = c.total() as f64;
    let k = c.classes();
    let n_c: Vec<f64> = (0..k).map(|i| c.n_true(i) as f64).collect();
    let p_c: Vec<f64> = (0..k).map(|i| c.n_pred(i) as f64).collect();
    let cross: f64 = n_c.iter().zip(&p_c).map(|(a, b)| a * b).sum();
    let pred_term = n * n - p_c.iter().map(|p| p * p).sum::<f64>();
    let true_term = n * n - n_c.iter().map(|t| t * t).sum::<f64>();
    if pred_term == 0.0 || true_term == 0.0 {
        return 0.0;
    }
    (n * c.correct() as f64 - cross) / (pred_term * true_term).sqrt()
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half (normalised Mann-Whitney U via midranks).
pub fn auroc(scores: &[f64], labels: &[bool]) -> Result<f64, MetricError> {
    same_len(scores.len(), labels.len())?;
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(MetricError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // ranks start..end (1-based start+1..=end) share their midrank
        let midrank = (start + 1 + end) as f64 / 2.0;
        let pos_here = order[start..end].iter().filter(|&&i| labels[i]).count();
        rank_sum_pos += midrank * pos_here as f64;
        start = end;
    }
    let (p, q) = (pos as f64, neg as f64);
    let u = rank_sum_pos - p * (p + 1.0) / 2.0;
    Ok(u / (p * q))
}

/// Average precision: the mean, over positives, of the precision at the
/// score threshold where each positive is first recalled. Tied scores are
/// recalled together.
pub fn auprc(scores: &[f64], labels: &[bool]) -> Result<f64, MetricError> {
    same_len(scores.len(), labels.len())?;
    let pos = labels.iter().filter(|&&l| l).count();
    if pos == 0 {
        return Err(MetricError::NoPositives);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut tp, mut seen, mut ap) = (0usize, 0usize, 0.0);
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let new_tp = order[start..end].iter().filter(|&&i| labels[i]).count();
        tp += new_tp;
        seen += end - start;
        ap += new_tp as f64 * (tp as f64 / seen as f64);
        start = end;
    }
    Ok(ap / pos as f64)
}
