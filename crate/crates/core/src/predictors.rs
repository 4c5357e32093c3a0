//! kNN regression and the rules that turn two activity values into AC and
//! PD labels.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mmp::{AcLabel, Mmp, PdLabel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PredictError {
    #[error("k = {k} but only {n} training points")]
    BadK { k: usize, n: usize },
    #[error("minkowski p must be >= 1, got {0}")]
    BadP(f64),
    #[error("{xs} feature rows but {ys} labels")]
    LengthMismatch { xs: usize, ys: usize },
    #[error("query width {got} differs from training width {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("thresholds must satisfy 0 < lower <= d_crit <= upper with lower < upper")]
    BadThresholds,
    #[error("pair ({i}, {j}) has both compounds in the training set")]
    MisroutedPair { i: usize, j: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    Uniform,
    InverseDistance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    xs: Vec<Vec<f64>>,
    ys: Vec<f64>,
    pub k: usize,
    pub minkowski_p: f64,
    pub weighting: Weighting,
}

pub fn minkowski(a: &[f64], b: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
    } else if p == 2.0 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    } else {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

impl KnnModel {
    pub fn fit(
        xs: Vec<Vec<f64>>,
        ys: Vec<f64>,
        k: usize,
        minkowski_p: f64,
        weighting: Weighting,
    ) -> Result<Self, PredictError> {
        if xs.len() != ys.len() {
            return Err(PredictError::LengthMismatch {
                xs: xs.len(),
                ys: ys.len(),
            });
        }
        if k == 0 || k > xs.len() {
            return Err(PredictError::BadK { k, n: xs.len() });
        }
        if !(minkowski_p >= 1.0) {
            return Err(PredictError::BadP(minkowski_p));
        }
        if let Some(bad) = xs.iter().find(|x| x.len() != xs[0].len()) {
            return Err(PredictError::WidthMismatch {
                expected: xs[0].len(),
                got: bad.len(),
            });
        }
        Ok(Self {
            xs,
            ys,
            k,
            minkowski_p,
            weighting,
        })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// The k nearest training indices with their distances, nearest first,
    /// equal distances ordered by index.
    pub fn neighbors(&self, x: &[f64]) -> Result<Vec<(usize, f64)>, PredictError> {
        if x.len() != self.xs[0].len() {
            return Err(PredictError::WidthMismatch {
                expected: self.xs[0].len(),
                got: x.len(),
            });
        }
        let mut d: Vec<(usize, f64)> = self
            .xs
            .iter()
            .enumerate()
            .map(|(i, t)| (i, minkowski(x, t, self.minkowski_p)))
            .collect();
        d.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        d.truncate(self.k);
        Ok(d)
    }

    /// Weighted mean of the neighbours' labels. Under inverse-distance
    /// weighting, neighbours at distance 0 take all the weight.
    pub fn predict(&self, x: &[f64]) -> Result<f64, PredictError> {
        let nn = self.neighbors(x)?;
        let mean = |it: &mut dyn Iterator<Item = usize>| {
            let (s, c) = it.fold((0.0, 0usize), |(s, c), i| (s + self.ys[i], c + 1));
            s / c as f64
        };
        match self.weighting {
            Weighting::Uniform => Ok(mean(&mut nn.iter().map(|&(i, _)| i))),
            Weighting::InverseDistance => {
                if nn[0].1 == 0.0 {
                    return Ok(mean(&mut nn.iter().filter(|n| n.1 == 0.0).map(|&(i, _)| i)));
                }
                let (num, den) = nn
                    .iter()
                    .fold((0.0, 0.0), |(num, den), &(i, d)| (num + self.ys[i] / d, den + 1.0 / d));
                Ok(num / den)
            }
        }
    }
}

/// Cut-offs on the absolute activity difference of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcThresholds {
    pub d_crit: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Default for AcThresholds {
    fn default() -> Self {
        Self {
            d_crit: 1.5,
            lower: 1.0,
            upper: 2.0,
        }
    }
}

impl AcThresholds {
    pub fn validate(&self) -> Result<(), PredictError> {
        let ok = 0.0 < self.lower && self.lower < self.upper && self.lower <= self.d_crit && self.d_crit <= self.upper;
        if ok {
            Ok(())
        } else {
            Err(PredictError::BadThresholds)
        }
    }
}

/// `NonAc` iff `|q_i − q_j| ≤ d_crit`.
pub fn qsar_ac_binary(q_i: f64, q_j: f64, t: &AcThresholds) -> AcLabel {
    if (q_i - q_j).abs() <= t.d_crit {
        AcLabel::NonAc
    } else {
        AcLabel::Ac
    }
}

/// `NonAc` up to `lower`, `Ac` from `upper`, `HalfAc` strictly between.
pub fn qsar_ac_ternary(q_i: f64, q_j: f64, t: &AcThresholds) -> AcLabel {
    let d = (q_i - q_j).abs();
    if d <= t.lower {
        AcLabel::NonAc
    } else if d >= t.upper {
        AcLabel::Ac
    } else {
        AcLabel::HalfAc
    }
}

/// `Right` iff `q_i ≤ q_j`.
pub fn qsar_pd(q_i: f64, q_j: f64) -> PdLabel {
    if q_i <= q_j {
        PdLabel::Right
    } else {
        PdLabel::Left
    }
}

/// Activity values to classify a pair with, in the pair's own orientation:
/// a compound in the training set contributes its measured activity, any
/// other compound its prediction.
pub fn inter_mode_inputs(
    mmp: &Mmp,
    in_train: &[bool],
    known: &[f64],
    predicted: &[f64],
) -> Result<(f64, f64), PredictError> {
    match (in_train[mmp.i], in_train[mmp.j]) {
        (true, true) => Err(PredictError::MisroutedPair { i: mmp.i, j: mmp.j }),
        (true, false) => Ok((known[mmp.i], predicted[mmp.j])),
        (false, true) => Ok((predicted[mmp.i], known[mmp.j])),
        (false, false) => Ok((predicted[mmp.i], predicted[mmp.j])),
    }
}
