//! Extended-connectivity substructure enumeration.
//!
//! Identifiers are 32-bit FNV-1a hashes. A stored value `v` stands for the
//! identifier `v + 1` in `{1, …, 2^32}`; the offset never matters in practice
//! so all APIs expose the raw `u32`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::molgraph::{pharmacophoric_invariant, standard_invariant, Chirality, MolGraph};

pub type SubstructureId = u32;

const FNV_OFFSET: u32 = 2_166_136_261;
const FNV_PRIME: u32 = 16_777_619;

/// FNV-1a over the little-endian bytes of each word.
pub fn hash32(seq: &[u32]) -> SubstructureId {
    seq.iter()
        .flat_map(|w| w.to_le_bytes())
        .fold(FNV_OFFSET, |h, byte| (h ^ u32::from(byte)).wrapping_mul(FNV_PRIME))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InvariantKind {
    #[default]
    Standard,
    Pharmacophoric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("radius {0} exceeds the maximum of {MAX_RADIUS}")]
    RadiusTooLarge(u32),
}

pub const MAX_RADIUS: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct EnumerationConfig {
    pub radius: u32,
    pub invariants: InvariantKind,
    /// Appends the tetrahedral marker to the initial atom tuple.
    pub use_chirality: bool,
    /// Keeps isotope labels in the standard tuple; off by default so that
    /// labelled and unlabelled compounds share identifiers.
    pub use_isotopes: bool,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        Self {
            radius: 2,
            invariants: InvariantKind::Standard,
            use_chirality: false,
            use_isotopes: false,
        }
    }
}

impl EnumerationConfig {
    pub fn with_radius(radius: u32) -> Self {
        Self {
            radius,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.radius > MAX_RADIUS {
            return Err(ConfigError::RadiusTooLarge(self.radius));
        }
        Ok(())
    }
}

/// One circular subgraph: the atoms within `radius` bonds of `center` and the
/// bonds incident to atoms closer than `radius`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Occurrence {
    pub center: usize,
    pub radius: u32,
    /// Sorted atom indices.
    pub atoms: Vec<usize>,
    /// Sorted bond indices.
    pub bonds: Vec<usize>,
}

impl Occurrence {
    /// `true` if every atom and bond of `self` also belongs to `other` and
    /// the two differ.
    pub fn strictly_within(&self, other: &Occurrence) -> bool {
        (self.atoms.len() < other.atoms.len() || self.bonds.len() < other.bonds.len())
            && is_sorted_subset(&self.atoms, &other.atoms)
            && is_sorted_subset(&self.bonds, &other.bonds)
    }
}

fn is_sorted_subset(small: &[usize], big: &[usize]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.by_ref().any(|y| y == x))
}

/// Identifiers of one molecule together with where each one occurs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FingerprintSet {
    pub occurrences: BTreeMap<SubstructureId, Vec<Occurrence>>,
}

impl FingerprintSet {
    /// Identifiers in ascending order.
    pub fn ids(&self) -> impl Iterator<Item = SubstructureId> + '_ {
        self.occurrences.keys().copied()
    }

    pub fn id_vec(&self) -> Vec<SubstructureId> {
        self.ids().collect()
    }

    pub fn contains(&self, id: SubstructureId) -> bool {
        self.occurrences.contains_key(&id)
    }

    pub fn len(&self) -> usize {
        self.occurrences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occurrences.is_empty()
    }

    fn push(&mut self, id: SubstructureId, occ: Occurrence) {
        self.occurrences.entry(id).or_default().push(occ);
    }
}

/// Per-atom identifiers before any neighbourhood update.
pub fn initial_identifiers(g: &MolGraph, cfg: &EnumerationConfig) -> Vec<SubstructureId> {
    (0..g.atom_count())
        .map(|a| {
            let mut tuple: Vec<u32> = match cfg.invariants {
                InvariantKind::Standard => {
                    let mut t = standard_invariant(g, a);
                    if !cfg.use_isotopes {
                        t[4] = 0;
                    }
                    t.to_vec()
                }
                InvariantKind::Pharmacophoric => pharmacophoric_invariant(g, a).as_tuple().to_vec(),
            };
            if cfg.use_chirality {
                tuple.push(match g.atom(a).stereo {
                    None => 0,
                    Some(Chirality::CounterClockwise) => 1,
                    Some(Chirality::Clockwise) => 2,
                });
            }
            hash32(&tuple)
        })
        .collect()
}

/// Every (identifier, occurrence) for radii `0..=R`, before duplicate removal.
pub fn enumerate_raw(g: &MolGraph, cfg: &EnumerationConfig) -> FingerprintSet {
    let n = g.atom_count();
    let mut fp = FingerprintSet::default();
    let mut ids = initial_identifiers(g, cfg);
    let mut bond_sets: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut atom_sets: Vec<Vec<usize>> = (0..n).map(|a| vec![a]).collect();
    for a in 0..n {
        fp.push(
            ids[a],
            Occurrence {
                center: a,
                radius: 0,
                atoms: atom_sets[a].clone(),
                bonds: Vec::new(),
            },
        );
    }
    for r in 1..=cfg.radius {
        let mut next_ids = Vec::with_capacity(n);
        let mut next_bonds = Vec::with_capacity(n);
        let mut next_atoms = Vec::with_capacity(n);
        for a in 0..n {
            let mut env: Vec<(u32, u32)> = g
                .neighbors(a)
                .iter()
                .map(|&(nbr, b)| (g.bond(b).order.code(), ids[nbr]))
                .collect();
            env.sort_unstable();
            let mut seq = Vec::with_capacity(2 + 2 * env.len());
            seq.push(r);
            seq.push(ids[a]);
            for (code, id) in env {
                seq.push(code);
                seq.push(id);
            }
            next_ids.push(hash32(&seq));

            let mut bonds: Vec<usize> = g.neighbors(a).iter().map(|&(_, b)| b).collect();
            let mut atoms = vec![a];
            for &(nbr, _) in g.neighbors(a) {
                bonds.extend_from_slice(&bond_sets[nbr]);
                atoms.extend_from_slice(&atom_sets[nbr]);
            }
            bonds.sort_unstable();
            bonds.dedup();
            atoms.sort_unstable();
            atoms.dedup();
            next_bonds.push(bonds);
            next_atoms.push(atoms);
        }
        ids = next_ids;
        bond_sets = next_bonds;
        atom_sets = next_atoms;
        for a in 0..n {
            fp.push(
                ids[a],
                Occurrence {
                    center: a,
                    radius: r,
                    atoms: atom_sets[a].clone(),
                    bonds: bond_sets[a].clone(),
                },
            );
        }
    }
    fp
}

#[derive(PartialEq, Eq, Hash)]
enum CoverKey<'a> {
    Atom(usize),
    Bonds(&'a [usize]),
}

/// Keeps one entry per distinct circular subgraph.
///
/// Occurrences with equal bond sets (or, for bond-free subgraphs, equal
/// centre atoms) describe the same substructure. The survivor has the
/// smallest radius, then the smallest identifier, then the smallest centre.
/// Identifiers left without occurrences are dropped.
pub fn remove_structural_duplicates(fp: &FingerprintSet) -> FingerprintSet {
    let mut best: HashMap<CoverKey<'_>, (u32, SubstructureId, usize, &Occurrence)> = HashMap::new();
    for (&id, occs) in &fp.occurrences {
        for occ in occs {
            let key = if occ.bonds.is_empty() {
                CoverKey::Atom(occ.center)
            } else {
                CoverKey::Bonds(&occ.bonds)
            };
            let cand = (occ.radius, id, occ.center, occ);
            best.entry(key)
                .and_modify(|cur| {
                    if (cand.0, cand.1, cand.2) < (cur.0, cur.1, cur.2) {
                        *cur = cand;
                    }
                })
                .or_insert(cand);
        }
    }
    let mut out = FingerprintSet::default();
    for (_, (_, id, _, occ)) in best {
        out.push(id, occ.clone());
    }
    for occs in out.occurrences.values_mut() {
        occs.sort_by_key(|o| (o.radius, o.center));
    }
    out
}

/// Duplicate-free identifier set of one molecule.
pub fn enumerate_substructures(g: &MolGraph, cfg: &EnumerationConfig) -> FingerprintSet {
    remove_structural_duplicates(&enumerate_raw(g, cfg))
}
