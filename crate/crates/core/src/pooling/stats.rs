//! Plug-in information measures and the 2×2 χ² independence test.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum StatsError {
    #[error("probability {0} lies outside [0, 1]")]
    Domain(f64),
    #[error("samples have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("sample is empty")]
    Empty,
}

fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * p.log2()
    }
}

/// Binary entropy in bits, with `0·log₂0 = 0`.
pub fn entropy(p: f64) -> Result<f64, StatsError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(StatsError::Domain(p));
    }
    Ok(-plogp(p) - plogp(1.0 - p))
}

/// Joint counts `[[n00, n01], [n10, n11]]` indexed by `[c][g]`.
pub fn contingency(c: &[bool], g: &[bool]) -> [[u64; 2]; 2] {
    let mut t = [[0u64; 2]; 2];
    for (&x, &y) in c.iter().zip(g) {
        t[usize::from(x)][usize::from(y)] += 1;
    }
    t
}

/// Plug-in mutual information (bits) from a 2×2 count table.
pub fn mutual_information_counts(t: &[[u64; 2]; 2]) -> f64 {
    let n = (t[0][0] + t[0][1] + t[1][0] + t[1][1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let rows = [(t[0][0] + t[0][1]) as f64 / n, (t[1][0] + t[1][1]) as f64 / n];
    let cols = [(t[0][0] + t[1][0]) as f64 / n, (t[0][1] + t[1][1]) as f64 / n];
    let h_c = -rows.iter().map(|&p| plogp(p)).sum::<f64>();
    let h_g = -cols.iter().map(|&p| plogp(p)).sum::<f64>();
    let h_joint = -t.iter().flatten().map(|&k| plogp(k as f64 / n)).sum::<f64>();
    (h_c + h_g - h_joint).max(0.0)
}

/// `I(c; g) = H(c) + H(g) − H(c, g)`, clamped at zero.
pub fn mutual_information(c: &[bool], g: &[bool]) -> Result<f64, StatsError> {
    if c.len() != g.len() {
        return Err(StatsError::LengthMismatch(c.len(), g.len()));
    }
    if c.is_empty() {
        return Err(StatsError::Empty);
    }
    Ok(mutual_information_counts(&contingency(c, g)))
}

/// Pearson χ² statistic without continuity correction; 0 when a margin is 0.
pub fn chi2_statistic(t: &[[u64; 2]; 2]) -> f64 {
    let [[a, b], [c, d]] = *t;
    let r1 = a + b;
    let r2 = c + d;
    let c1 = a + c;
    let c2 = b + d;
    if r1 == 0 || r2 == 0 || c1 == 0 || c2 == 0 {
        return 0.0;
    }
    let n = (r1 + r2) as f64;
    let diff = a as f64 * d as f64 - b as f64 * c as f64;
    n * diff * diff / (r1 as f64 * r2 as f64 * c1 as f64 * c2 as f64)
}

/// Upper tail of the χ² distribution with one degree of freedom.
pub fn chi2_sf_1dof(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    libm::erfc((x / 2.0).sqrt())
}

/// p-value of the χ² independence test on a 2×2 table; 1 for degenerate margins.
pub fn chi2_pvalue(t: &[[u64; 2]; 2]) -> f64 {
    chi2_sf_1dof(chi2_statistic(t))
}

/// Labels at or below the median map to `false`.
///
/// The median of an even-length sample is the midpoint of the two middle
/// values.
pub fn binarize_labels(labels: &[f64]) -> Vec<bool> {
    if labels.is_empty() {
        return Vec::new();
    }
    let mut sorted = labels.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let median = if m % 2 == 1 {
        sorted[m / 2]
    } else {
        (sorted[m / 2 - 1] + sorted[m / 2]) / 2.0
    };
    labels.iter().map(|&y| y > median).collect()
}

/// Uses labels verbatim when they are already 0/1, otherwise splits at the median.
pub fn binary_targets(labels: &[f64]) -> Vec<bool> {
    if labels.iter().all(|&y| y == 0.0 || y == 1.0) {
        labels.iter().map(|&y| y == 1.0).collect()
    } else {
        binarize_labels(labels)
    }
}
