//! Substructure pooling: turning identifier sets into fixed-length bit vectors.
//!
//! Hashing folds identifiers by `id mod l`. The other three methods select a
//! vocabulary of at most `l` identifiers from the training compounds and give
//! each one its own bit, so they never collide.

pub mod stats;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ecfp::{FingerprintSet, SubstructureId};
use stats::{binary_targets, chi2_statistic, mutual_information_counts};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PoolError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("this pooling method needs training labels")]
    MissingLabels,
    #[error("{labels} labels for {compounds} compounds")]
    LabelCount { labels: usize, compounds: usize },
    #[error("dimension must be at least 1")]
    ZeroDimension,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolMethod {
    Hash,
    SortSlice,
    Filter,
    Mim,
}

impl std::str::FromStr for PoolMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hash" => Ok(Self::Hash),
            "sortslice" | "sort_slice" | "sort-slice" => Ok(Self::SortSlice),
            "filter" => Ok(Self::Filter),
            "mim" => Ok(Self::Mim),
            other => Err(format!("unknown pooling method `{other}`")),
        }
    }
}

/// Training compounds (with occurrences) and optional labels.
#[derive(Debug, Clone, Copy)]
pub struct FitContext<'a> {
    pub fps: &'a [FingerprintSet],
    pub labels: Option<&'a [f64]>,
}

impl<'a> FitContext<'a> {
    pub fn new(fps: &'a [FingerprintSet], labels: Option<&'a [f64]>) -> Self {
        Self { fps, labels }
    }

    pub fn n(&self) -> usize {
        self.fps.len()
    }

    fn check(&self, need_labels: bool) -> Result<Option<Vec<bool>>, PoolError> {
        if self.fps.is_empty() {
            return Err(PoolError::EmptyTrainingSet);
        }
        match self.labels {
            Some(y) if y.len() != self.fps.len() => Err(PoolError::LabelCount {
                labels: y.len(),
                compounds: self.fps.len(),
            }),
            Some(y) => Ok(Some(binary_targets(y))),
            None if need_labels => Err(PoolError::MissingLabels),
            None => Ok(None),
        }
    }

    /// Sorted compound indices per identifier.
    fn supports(&self) -> BTreeMap<SubstructureId, Vec<usize>> {
        let mut supp: BTreeMap<SubstructureId, Vec<usize>> = BTreeMap::new();
        for (i, fp) in self.fps.iter().enumerate() {
            for id in fp.ids() {
                supp.entry(id).or_default().push(i);
            }
        }
        supp
    }
}

/// A fitted pooling operator of dimension `dim`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "PoolSpecRepr", into = "PoolSpecRepr")]
pub struct PoolSpec {
    method: PoolMethod,
    dim: usize,
    slots: Vec<SubstructureId>,
    index: HashMap<SubstructureId, usize>,
}

#[derive(Serialize, Deserialize)]
struct PoolSpecRepr {
    method: PoolMethod,
    dim: usize,
    slots: Vec<SubstructureId>,
}

impl From<PoolSpecRepr> for PoolSpec {
    fn from(r: PoolSpecRepr) -> Self {
        PoolSpec::with_slots(r.method, r.dim, r.slots)
    }
}

impl From<PoolSpec> for PoolSpecRepr {
    fn from(s: PoolSpec) -> Self {
        Self {
            method: s.method,
            dim: s.dim,
            slots: s.slots,
        }
    }
}

impl PartialEq for PoolSpec {
    fn eq(&self, other: &Self) -> bool {
        self.method == other.method && self.dim == other.dim && self.slots == other.slots
    }
}

impl PoolSpec {
    fn with_slots(method: PoolMethod, dim: usize, slots: Vec<SubstructureId>) -> Self {
        let index = slots.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        Self {
            method,
            dim,
            slots,
            index,
        }
    }

    pub fn method(&self) -> PoolMethod {
        self.method
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Vocabulary in slot order (empty for hashing).
    pub fn slots(&self) -> &[SubstructureId] {
        &self.slots
    }

    /// Bit index of one identifier, if it has one.
    pub fn slot_of(&self, id: SubstructureId) -> Option<usize> {
        match self.method {
            PoolMethod::Hash => Some(id as usize % self.dim),
            _ => self.index.get(&id).copied(),
        }
    }

    pub fn transform_ids<I: IntoIterator<Item = SubstructureId>>(&self, ids: I) -> Vec<u8> {
        let mut v = vec![0u8; self.dim];
        for id in ids {
            if let Some(i) = self.slot_of(id) {
                v[i] = 1;
            }
        }
        v
    }

    pub fn transform(&self, fp: &FingerprintSet) -> Vec<u8> {
        self.transform_ids(fp.ids())
    }

    /// Same as [`transform`](Self::transform) with `f64` entries.
    pub fn transform_f64(&self, fp: &FingerprintSet) -> Vec<f64> {
        self.transform(fp).into_iter().map(f64::from).collect()
    }
}

pub fn fit_hash(l: usize) -> Result<PoolSpec, PoolError> {
    if l == 0 {
        return Err(PoolError::ZeroDimension);
    }
    Ok(PoolSpec::with_slots(PoolMethod::Hash, l, Vec::new()))
}

/// The `l` most frequent training substructures; ties go to the larger id.
pub fn fit_sort_and_slice(ctx: &FitContext<'_>, l: usize) -> Result<PoolSpec, PoolError> {
    if l == 0 {
        return Err(PoolError::ZeroDimension);
    }
    if ctx.fps.is_empty() {
        return Err(PoolError::EmptyTrainingSet);
    }
    let mut ranked: Vec<(usize, SubstructureId)> = ctx.supports().into_iter().map(|(id, s)| (s.len(), id)).collect();
    ranked.sort_unstable_by(|a, b| b.cmp(a));
    let slots = ranked.into_iter().take(l).map(|(_, id)| id).collect();
    Ok(PoolSpec::with_slots(PoolMethod::SortSlice, l, slots))
}

/// χ²-filtered vocabulary.
///
/// 1. drop identifiers present in at most one training compound;
/// 2. drop identifiers that strictly contain an occurrence of another
///    identifier with the same support;
/// 3. drop the identifier with the weakest label dependence (largest p,
///    ties: larger id first) until `l` remain.
///
/// Removals in steps 1 and 2 go from the largest id downwards and every step
/// stops as soon as `l` identifiers remain. Slots are ordered by p ascending,
/// then id ascending.
pub fn fit_filter(ctx: &FitContext<'_>, l: usize) -> Result<PoolSpec, PoolError> {
    if l == 0 {
        return Err(PoolError::ZeroDimension);
    }
    let y = ctx.check(true)?.expect("labels checked");
    let supports = ctx.supports();
    let mut alive: BTreeSet<SubstructureId> = supports.keys().copied().collect();

    let singletons: Vec<SubstructureId> = supports
        .iter()
        .filter(|(_, s)| s.len() <= 1)
        .map(|(&id, _)| id)
        .collect();
    for id in singletons.into_iter().rev() {
        if alive.len() <= l {
            break;
        }
        alive.remove(&id);
    }

    if alive.len() > l {
        let non_closed = non_closed_ids(ctx, &supports, &alive);
        for id in non_closed.into_iter().rev() {
            if alive.len() <= l {
                break;
            }
            alive.remove(&id);
        }
    }

    // a larger statistic is a smaller p-value; ranking on the statistic
    // avoids the p-value underflowing to 0 for strong dependences
    let mut ranked: Vec<(f64, SubstructureId)> = alive
        .iter()
        .map(|&id| {
            let t = table(&y, &supports[&id]);
            (chi2_statistic(&t), id)
        })
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    ranked.truncate(l);
    let slots = ranked.into_iter().map(|(_, id)| id).collect();
    Ok(PoolSpec::with_slots(PoolMethod::Filter, l, slots))
}

/// Mutual-information-maximising vocabulary.
///
/// Identifiers sharing a support set are collapsed onto the smallest id
/// (removing the largest duplicates first, stopping at `l`), then the `l`
/// identifiers with the highest mutual information with the label are kept,
/// ties going to the larger id. Slots follow that ranking.
pub fn fit_mim(ctx: &FitContext<'_>, l: usize) -> Result<PoolSpec, PoolError> {
    if l == 0 {
        return Err(PoolError::ZeroDimension);
    }
    let y = ctx.check(true)?.expect("labels checked");
    let supports = ctx.supports();
    let mut alive: BTreeSet<SubstructureId> = supports.keys().copied().collect();

    let mut first_with: HashMap<&[usize], SubstructureId> = HashMap::new();
    let mut duplicates = Vec::new();
    for (&id, s) in &supports {
        if first_with.contains_key(s.as_slice()) {
            duplicates.push(id);
        } else {
            first_with.insert(s, id);
        }
    }
    for id in duplicates.into_iter().rev() {
        if alive.len() <= l {
            break;
        }
        alive.remove(&id);
    }

    let mut ranked: Vec<(f64, SubstructureId)> = alive
        .iter()
        .map(|&id| (mutual_information_counts(&table(&y, &supports[&id])), id))
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.cmp(&a.1)));
    ranked.truncate(l);
    let slots = ranked.into_iter().map(|(_, id)| id).collect();
    Ok(PoolSpec::with_slots(PoolMethod::Mim, l, slots))
}

/// Dispatches on `method`; hashing ignores the context.
pub fn fit(method: PoolMethod, ctx: &FitContext<'_>, l: usize) -> Result<PoolSpec, PoolError> {
    match method {
        PoolMethod::Hash => fit_hash(l),
        PoolMethod::SortSlice => fit_sort_and_slice(ctx, l),
        PoolMethod::Filter => fit_filter(ctx, l),
        PoolMethod::Mim => fit_mim(ctx, l),
    }
}

/// Label × presence counts, indexed `[label][present]`.
fn table(y: &[bool], support: &[usize]) -> [[u64; 2]; 2] {
    let mut t = [[0u64; 2]; 2];
    let mut present = vec![false; y.len()];
    for &i in support {
        present[i] = true;
    }
    for (label, p) in y.iter().zip(present) {
        t[usize::from(*label)][usize::from(p)] += 1;
    }
    t
}

/// Identifiers in `alive` that strictly contain an occurrence of another
/// live identifier with the same support, in ascending order.
fn non_closed_ids(
    ctx: &FitContext<'_>,
    supports: &BTreeMap<SubstructureId, Vec<usize>>,
    alive: &BTreeSet<SubstructureId>,
) -> Vec<SubstructureId> {
    let mut groups: HashMap<&[usize], Vec<SubstructureId>> = HashMap::new();
    for &id in alive {
        groups.entry(supports[&id].as_slice()).or_default().push(id);
    }
    let mut out = Vec::new();
    for (support, ids) in groups {
        if ids.len() < 2 {
            continue;
        }
        for &big in &ids {
            let contains_other = ids.iter().any(|&small| {
                small != big
                    && support.iter().any(|&c| {
                        let fp = &ctx.fps[c];
                        let outer = &fp.occurrences[&big];
                        let inner = &fp.occurrences[&small];
                        inner.iter().any(|o| outer.iter().any(|x| o.strictly_within(x)))
                    })
            });
            if contains_other {
                out.push(big);
            }
        }
    }
    out.sort_unstable();
    out
}
