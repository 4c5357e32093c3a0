//! Matched molecular pairs from single acyclic bond cuts, activity-cliff
//! labels and dataset cleaning.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::molgraph::{canonical_smiles, Atom, Bond, BondOrder, MolGraph};
use crate::smiles::parse_smiles;

/// Largest variable part, in heavy atoms.
pub const MAX_VARIABLE_HEAVY: usize = 13;
/// Largest heavy-atom difference between the two variable parts of a pair.
pub const MAX_VARIABLE_DIFFERENCE: usize = 8;
/// The core must have at least this many times the variable part's heavy atoms.
pub const CORE_RATIO: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CutFragmentation {
    pub core: String,
    pub variable: String,
    pub core_heavy: usize,
    pub var_heavy: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AcLabel {
    #[serde(rename = "AC")]
    Ac,
    #[serde(rename = "HalfAC")]
    HalfAc,
    #[serde(rename = "NonAC")]
    NonAc,
}

impl AcLabel {
    /// Position of the label in the one-hot encoding (AC, half-AC, non-AC).
    pub fn index(self) -> usize {
        match self {
            AcLabel::Ac => 0,
            AcLabel::HalfAc => 1,
            AcLabel::NonAc => 2,
        }
    }

    pub fn from_index(i: usize) -> Self {
        match i {
            0 => AcLabel::Ac,
            1 => AcLabel::HalfAc,
            _ => AcLabel::NonAc,
        }
    }

    pub fn one_hot(self) -> [f64; 3] {
        let mut v = [0.0; 3];
        v[self.index()] = 1.0;
        v
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AcLabel::Ac => "AC",
            AcLabel::HalfAc => "HalfAC",
            AcLabel::NonAc => "NonAC",
        }
    }
}

/// Which compound of an ordered pair is more potent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PdLabel {
    Left,
    Right,
}

impl PdLabel {
    /// 1 for `Left`, 0 for `Right`.
    pub fn as_f64(self) -> f64 {
        match self {
            PdLabel::Left => 1.0,
            PdLabel::Right => 0.0,
        }
    }

    pub fn as_u8(self) -> u8 {
        self.as_f64() as u8
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mmp {
    pub i: usize,
    pub j: usize,
    pub core: String,
    pub var_i: String,
    pub var_j: String,
    pub core_heavy: usize,
    pub var_heavy_i: usize,
    pub var_heavy_j: usize,
    pub ac_label: AcLabel,
    pub pd_label: PdLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MmpError {
    #[error("{graphs} molecules but {activities} activities")]
    LengthMismatch { graphs: usize, activities: usize },
}

/// Activity-cliff class from pActivity values: a gap of at least two log
/// units is a cliff, at most one is not, anything between is a half-cliff.
pub fn label_ac(act_i: f64, act_j: f64) -> AcLabel {
    let d = (act_i - act_j).abs();
    if d >= 2.0 {
        AcLabel::Ac
    } else if d <= 1.0 {
        AcLabel::NonAc
    } else {
        AcLabel::HalfAc
    }
}

/// `Left` iff the first compound is strictly more potent.
pub fn label_pd(act_i: f64, act_j: f64) -> PdLabel {
    if act_i > act_j {
        PdLabel::Left
    } else {
        PdLabel::Right
    }
}

/// Whether a cut with these fragment sizes is admissible.
pub fn cut_is_valid(core_heavy: usize, var_heavy: usize) -> bool {
    var_heavy <= MAX_VARIABLE_HEAVY && core_heavy >= CORE_RATIO * var_heavy
}

/// Admissible fragmentations of one molecule, one per distinct
/// (core, variable) pair.
pub fn enumerate_single_cuts(g: &MolGraph) -> Vec<CutFragmentation> {
    let mut out = BTreeSet::new();
    for (b, bond) in g.bonds().iter().enumerate() {
        if bond.order != BondOrder::Single || g.is_ring_bond(b) {
            continue;
        }
        let side_a = side_of(g, bond.a, b);
        let heavy_a = side_a.iter().filter(|&&x| !g.atom(x).is_wildcard()).count();
        let heavy_b = g.heavy_atom_count() - heavy_a;
        let (core_root, var_root, core_heavy, var_heavy) = if heavy_a >= heavy_b {
            (bond.a, bond.b, heavy_a, heavy_b)
        } else {
            (bond.b, bond.a, heavy_b, heavy_a)
        };
        if !cut_is_valid(core_heavy, var_heavy) {
            continue;
        }
        out.insert(CutFragmentation {
            core: canonical_smiles(&fragment(g, core_root, b)),
            variable: canonical_smiles(&fragment(g, var_root, b)),
            core_heavy,
            var_heavy,
        });
    }
    out.into_iter().collect()
}

/// Atoms reachable from `root` without crossing bond `cut`.
fn side_of(g: &MolGraph, root: usize, cut: usize) -> Vec<usize> {
    let mut seen = vec![false; g.atom_count()];
    let mut stack = vec![root];
    let mut out = Vec::new();
    seen[root] = true;
    while let Some(u) = stack.pop() {
        out.push(u);
        for &(v, b) in g.neighbors(u) {
            if b != cut && !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    out.sort_unstable();
    out
}

/// The side of `cut` containing `root`, with a wildcard atom in place of
/// the other side.
pub fn fragment(g: &MolGraph, root: usize, cut: usize) -> MolGraph {
    let atoms_kept = side_of(g, root, cut);
    let mut map = vec![usize::MAX; g.atom_count()];
    for (new, &old) in atoms_kept.iter().enumerate() {
        map[old] = new;
    }
    let mut atoms: Vec<Atom> = atoms_kept.iter().map(|&a| g.atom(a).clone()).collect();
    let mut bonds: Vec<Bond> = g
        .bonds()
        .iter()
        .enumerate()
        .filter(|&(b, bond)| b != cut && map[bond.a] != usize::MAX)
        .map(|(_, bond)| Bond {
            a: map[bond.a],
            b: map[bond.b],
            order: bond.order,
            direction: None,
        })
        .collect();
    atoms.push(Atom::new(crate::elements::WILDCARD));
    bonds.push(Bond::new(map[root], atoms.len() - 1, BondOrder::Single));
    MolGraph::new(atoms, bonds).expect("fragment of a connected graph is connected")
}

struct Entry<'a> {
    compound: usize,
    cut: &'a CutFragmentation,
}

/// Indexes fragmentations by core and pairs up compounds sharing a core.
///
/// A pair matched under several cores keeps the core with the most heavy
/// atoms (ties: lexicographically smallest core string, then smallest
/// variable strings). Output is sorted by `(i, j)` with `i < j`.
pub fn find_mmps(graphs: &[MolGraph], activities: &[f64]) -> Result<Vec<Mmp>, MmpError> {
    if graphs.len() != activities.len() {
        return Err(MmpError::LengthMismatch {
            graphs: graphs.len(),
            activities: activities.len(),
        });
    }
    let cuts: Vec<Vec<CutFragmentation>> = {
        use rayon::prelude::*;
        graphs.par_iter().map(enumerate_single_cuts).collect()
    };
    Ok(find_mmps_from_cuts(&cuts, activities))
}

/// [`find_mmps`] on precomputed fragmentations.
pub fn find_mmps_from_cuts(cuts: &[Vec<CutFragmentation>], activities: &[f64]) -> Vec<Mmp> {
    let mut by_core: HashMap<&str, Vec<Entry<'_>>> = HashMap::new();
    for (compound, list) in cuts.iter().enumerate() {
        for cut in list {
            by_core.entry(&cut.core).or_default().push(Entry { compound, cut });
        }
    }
    // best candidate per pair: ordering key (−core_heavy, core, var_i, var_j)
    type Key<'a> = (std::cmp::Reverse<usize>, &'a str, &'a str, &'a str);
    let mut best: BTreeMap<(usize, usize), (Key<'_>, &CutFragmentation, &CutFragmentation)> = BTreeMap::new();
    for entries in by_core.values() {
        for (x, ex) in entries.iter().enumerate() {
            for ey in &entries[x + 1..] {
                if ex.compound == ey.compound || ex.cut.variable == ey.cut.variable {
                    continue;
                }
                if ex.cut.var_heavy.abs_diff(ey.cut.var_heavy) > MAX_VARIABLE_DIFFERENCE {
                    continue;
                }
                let (lo, hi) = if ex.compound < ey.compound { (ex, ey) } else { (ey, ex) };
                let key: Key<'_> = (
                    std::cmp::Reverse(lo.cut.core_heavy),
                    &lo.cut.core,
                    &lo.cut.variable,
                    &hi.cut.variable,
                );
                let slot = best.entry((lo.compound, hi.compound));
                match slot {
                    std::collections::btree_map::Entry::Vacant(v) => {
                        v.insert((key, lo.cut, hi.cut));
                    }
                    std::collections::btree_map::Entry::Occupied(mut o) => {
                        if key < o.get().0 {
                            o.insert((key, lo.cut, hi.cut));
                        }
                    }
                }
            }
        }
    }
    best.into_iter()
        .map(|((i, j), (_, ci, cj))| Mmp {
            i,
            j,
            core: ci.core.clone(),
            var_i: ci.variable.clone(),
            var_j: cj.variable.clone(),
            core_heavy: ci.core_heavy,
            var_heavy_i: ci.var_heavy,
            var_heavy_j: cj.var_heavy,
            ac_label: label_ac(activities[i], activities[j]),
            pd_label: label_pd(activities[i], activities[j]),
        })
        .collect()
}

/// How input activities are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivityUnits {
    /// Measured concentrations in nanomolar.
    Raw,
    /// Negative decadic logarithm of the molar activity.
    #[default]
    P,
}

/// pActivity of a nanomolar value.
pub fn p_from_nanomolar(x: f64) -> f64 {
    9.0 - x.log10()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanRecord {
    /// Canonical SMILES of the compound.
    pub smiles: String,
    /// pActivity after merging duplicates.
    pub activity: f64,
    /// Merged value in the input units.
    pub merged_input: f64,
    /// Input rows merged into this record.
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedRecord {
    pub row: usize,
    pub smiles: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CleanedDataset {
    pub records: Vec<CleanRecord>,
    pub dropped: Vec<DroppedRecord>,
}

/// Deduplicates by canonical SMILES and merges repeated measurements.
///
/// Raw duplicates within a factor of 10 of each other are replaced by their
/// geometric mean; p-unit duplicates within one log unit by their arithmetic
/// mean (the same thing on the log scale). Wider groups are dropped, as are
/// unparsable rows, non-finite values and non-positive raw values. Records
/// keep the order of their first row.
pub fn clean_dataset(records: &[(String, f64)], units: ActivityUnits) -> CleanedDataset {
    let mut out = CleanedDataset::default();
    let mut groups: Vec<(String, Vec<(usize, f64)>)> = Vec::new();
    let mut group_of: HashMap<String, usize> = HashMap::new();
    for (row, (smiles, value)) in records.iter().enumerate() {
        let drop = |reason: String| DroppedRecord {
            row,
            smiles: smiles.clone(),
            reason,
        };
        if !value.is_finite() || (units == ActivityUnits::Raw && *value <= 0.0) {
            out.dropped.push(drop(format!("invalid activity {value}")));
            continue;
        }
        let canon = match parse_smiles(smiles) {
            Ok(g) => canonical_smiles(&g),
            Err(e) => {
                out.dropped.push(drop(format!("unparsable SMILES: {e}")));
                continue;
            }
        };
        let idx = *group_of.entry(canon.clone()).or_insert_with(|| {
            groups.push((canon, Vec::new()));
            groups.len() - 1
        });
        groups[idx].1.push((row, *value));
    }
    for (canon, members) in groups {
        let values: Vec<f64> = members.iter().map(|&(_, v)| v).collect();
        let (lo, hi) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let (consistent, merged) = match units {
            ActivityUnits::Raw => {
                let mean_log = values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64;
                (hi / lo <= 10.0, mean_log.exp())
            }
            ActivityUnits::P => (hi - lo <= 1.0, values.iter().sum::<f64>() / values.len() as f64),
        };
        if !consistent {
            for &(row, _) in &members {
                out.dropped.push(DroppedRecord {
                    row,
                    smiles: records[row].0.clone(),
                    reason: format!("duplicate measurements disagree (range {lo}..{hi})"),
                });
            }
            continue;
        }
        let activity = match units {
            ActivityUnits::Raw => p_from_nanomolar(merged),
            ActivityUnits::P => merged,
        };
        out.records.push(CleanRecord {
            smiles: canon,
            activity,
            merged_input: merged,
            rows: members.iter().map(|&(r, _)| r).collect(),
        });
    }
    out.dropped.sort_by_key(|d| d.row);
    for d in &out.dropped {
        log::warn!("dropping row {} ({}): {}", d.row, d.smiles, d.reason);
    }
    out
}
