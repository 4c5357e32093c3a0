//! Compound-level cross-validation folds and the induced MMP sets.
//!
//! Splitting the compounds into train and test partitions the pairs three
//! ways: both compounds in training (`m_train`), exactly one (`m_inter`) and
//! neither (`m_test`). `m_cores` is the part of `m_test` whose core never
//! appears in `m_train ∪ m_inter`.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mmp::Mmp;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SplitError {
    #[error("need 2 <= k <= n, got k = {k} for n = {n}")]
    BadK { k: usize, n: usize },
    #[error("{labels} class labels for {n} compounds")]
    LabelCount { labels: usize, n: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub fold: usize,
    pub d_train: Vec<usize>,
    pub d_test: Vec<usize>,
    pub m_train: Vec<usize>,
    pub m_inter: Vec<usize>,
    pub m_test: Vec<usize>,
    pub m_cores: Vec<usize>,
    pub c_train: BTreeSet<String>,
}

fn check_k(n: usize, k: usize) -> Result<(), SplitError> {
    if k < 2 || n < k {
        return Err(SplitError::BadK { k, n });
    }
    Ok(())
}

/// Shuffles `0..n` and cuts it into `k` contiguous folds; the first `n mod k`
/// folds hold one extra element. Each fold is returned sorted.
pub fn random_kfold(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, SplitError> {
    check_k(n, k)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::seeded(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        let mut fold = order[start..start + len].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += len;
    }
    Ok(folds)
}

/// Shuffles each class separately, concatenates the classes and deals the
/// result round-robin, so every fold receives a near-equal share of each class.
pub fn stratified_kfold(classes: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, SplitError> {
    let n = classes.len();
    check_k(n, k)?;
    let mut rng = rng::seeded(seed);
    let n_classes = classes.iter().max().map_or(0, |&c| c + 1);
    let mut dealt = Vec::with_capacity(n);
    for c in 0..n_classes {
        let mut members: Vec<usize> = (0..n).filter(|&i| classes[i] == c).collect();
        members.shuffle(&mut rng);
        dealt.extend(members);
    }
    let mut folds = vec![Vec::new(); k];
    for (t, i) in dealt.into_iter().enumerate() {
        folds[t % k].push(i);
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

/// Assigns every MMP to train, inter or test given a compound split.
pub fn build_split(seed: u64, fold: usize, d_train: Vec<usize>, d_test: Vec<usize>, mmps: &[Mmp]) -> SplitPlan {
    let n = d_train.len() + d_test.len();
    let mut in_train = vec![false; n];
    for &i in &d_train {
        in_train[i] = true;
    }
    let (mut m_train, mut m_inter, mut m_test) = (Vec::new(), Vec::new(), Vec::new());
    for (idx, m) in mmps.iter().enumerate() {
        match (in_train[m.i], in_train[m.j]) {
            (true, true) => m_train.push(idx),
            (false, false) => m_test.push(idx),
            _ => m_inter.push(idx),
        }
    }
    let c_train: BTreeSet<String> = m_train
        .iter()
        .chain(&m_inter)
        .map(|&idx| mmps[idx].core.clone())
        .collect();
    let m_cores = m_test
        .iter()
        .copied()
        .filter(|&idx| !c_train.contains(&mmps[idx].core))
        .collect();
    SplitPlan {
        seed,
        fold,
        d_train,
        d_test,
        m_train,
        m_inter,
        m_test,
        m_cores,
        c_train,
    }
}

fn plans_from_folds(seed: u64, folds: Vec<Vec<usize>>, mmps: &[Mmp]) -> Vec<SplitPlan> {
    (0..folds.len())
        .map(|f| {
            let d_train: Vec<usize> = {
                let mut v: Vec<usize> = folds
                    .iter()
                    .enumerate()
                    .filter(|&(g, _)| g != f)
                    .flat_map(|(_, fold)| fold.iter().copied())
                    .collect();
                v.sort_unstable();
                v
            };
            build_split(seed, f, d_train, folds[f].clone(), mmps)
        })
        .collect()
}

/// One plan per (seed, fold), seeds in the given order.
pub fn repeated_cv(n: usize, mmps: &[Mmp], k: usize, seeds: &[u64]) -> Result<Vec<SplitPlan>, SplitError> {
    let mut plans = Vec::with_capacity(k * seeds.len());
    for &seed in seeds {
        plans.extend(plans_from_folds(seed, random_kfold(n, k, seed)?, mmps));
    }
    Ok(plans)
}

/// [`repeated_cv`] with class-stratified folds.
pub fn repeated_stratified_cv(
    classes: &[usize],
    mmps: &[Mmp],
    k: usize,
    seeds: &[u64],
) -> Result<Vec<SplitPlan>, SplitError> {
    let mut plans = Vec::with_capacity(k * seeds.len());
    for &seed in seeds {
        plans.extend(plans_from_folds(seed, stratified_kfold(classes, k, seed)?, mmps));
    }
    Ok(plans)
}

impl SplitPlan {
    /// Checks the partition and core invariants against the data it was built from.
    pub fn validate(&self, n: usize, mmps: &[Mmp]) -> Result<(), String> {
        let mut seen = vec![0u8; n];
        for &i in self.d_train.iter().chain(&self.d_test) {
            if i >= n {
                return Err(format!("compound index {i} out of range"));
            }
            seen[i] += 1;
        }
        if let Some(i) = seen.iter().position(|&c| c != 1) {
            return Err(format!("compound {i} appears {} times", seen[i]));
        }
        let mut assigned = vec![0u8; mmps.len()];
        for &m in self.m_train.iter().chain(&self.m_inter).chain(&self.m_test) {
            assigned[m] += 1;
        }
        if let Some(m) = assigned.iter().position(|&c| c != 1) {
            return Err(format!("MMP {m} assigned {} times", assigned[m]));
        }
        let train: BTreeSet<usize> = self.d_train.iter().copied().collect();
        for &m in &self.m_train {
            if !(train.contains(&mmps[m].i) && train.contains(&mmps[m].j)) {
                return Err(format!("MMP {m} in m_train has a test compound"));
            }
        }
        for &m in &self.m_test {
            if train.contains(&mmps[m].i) || train.contains(&mmps[m].j) {
                return Err(format!("MMP {m} in m_test has a training compound"));
            }
        }
        let test: BTreeSet<usize> = self.m_test.iter().copied().collect();
        for &m in &self.m_cores {
            if !test.contains(&m) || self.c_train.contains(&mmps[m].core) {
                return Err(format!("MMP {m} should not be in m_cores"));
            }
        }
        let expected_cores = self
            .m_test
            .iter()
            .filter(|&&m| !self.c_train.contains(&mmps[m].core))
            .count();
        if expected_cores != self.m_cores.len() {
            return Err("m_cores is incomplete".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mmp::{AcLabel, PdLabel};

    fn pair(i: usize, j: usize, core: &str) -> Mmp {
        Mmp {
            i,
            j,
            core: core.into(),
            var_i: "[*]C".into(),
            var_j: "[*]N".into(),
            core_heavy: 6,
            var_heavy_i: 1,
            var_heavy_j: 1,
            ac_label: AcLabel::NonAc,
            pd_label: PdLabel::Right,
        }
    }

    #[test]
    fn fold_shapes() {
        let f = random_kfold(4, 2, 7).unwrap();
        assert_eq!(f.iter().map(Vec::len).collect::<Vec<_>>(), vec![2, 2]);
        let mut all: Vec<usize> = f.concat();
        all.sort();
        assert_eq!(all, vec![0, 1, 2, 3]);
        assert_eq!(random_kfold(4, 2, 7).unwrap(), f);
        let g = random_kfold(5, 2, 1).unwrap();
        let mut sizes: Vec<usize> = g.iter().map(Vec::len).collect();
        sizes.sort();
        assert_eq!(sizes, vec![2, 3]);
        assert!(random_kfold(3, 1, 0).is_err());
        assert!(random_kfold(3, 4, 0).is_err());
    }

    #[test]
    fn stratified_balances_classes() {
        let classes: Vec<usize> = (0..40).map(|i| usize::from(i < 8)).collect();
        let folds = stratified_kfold(&classes, 4, 3).unwrap();
        for fold in &folds {
            assert_eq!(fold.iter().filter(|&&i| classes[i] == 1).count(), 2);
            assert_eq!(fold.len(), 10);
        }
    }

    #[test]
    fn pair_assignment() {
        let mmps = vec![pair(0, 1, "A"), pair(1, 2, "B"), pair(2, 3, "C"), pair(0, 3, "A")];
        let all_train = build_split(0, 0, vec![0, 1, 2, 3], vec![], &mmps);
        assert!(all_train.m_test.is_empty() && all_train.m_inter.is_empty());
        let p = build_split(0, 0, vec![0, 1], vec![2, 3], &mmps);
        assert_eq!(p.m_train, vec![0]);
        assert_eq!(p.m_inter, vec![1, 3]);
        assert_eq!(p.m_test, vec![2]);
        // core C is only seen among test-test pairs
        assert_eq!(p.m_cores, vec![2]);
        p.validate(4, &mmps).unwrap();
    }

    #[test]
    fn repeated_plans() {
        let mmps = vec![pair(0, 1, "A"), pair(2, 5, "B")];
        let plans = repeated_cv(6, &mmps, 2, &[0, 1, 2]).unwrap();
        assert_eq!(plans.len(), 6);
        for p in &plans {
            p.validate(6, &mmps).unwrap();
        }
        assert_eq!(plans, repeated_cv(6, &mmps, 2, &[0, 1, 2]).unwrap());
    }
}
