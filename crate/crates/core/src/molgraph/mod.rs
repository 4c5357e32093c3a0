//! Hydrogen-depleted molecular graphs.
//!
//! A [`MolGraph`] is connected, undirected and free of self-loops and
//! parallel bonds. Ring membership is perceived once at construction time
//! (a bond is a ring bond iff it is not a bridge) and the graph is immutable
//! afterwards.

mod canon;
mod invariants;

pub use canon::{canonical_ranks, canonical_smiles, write_smiles, write_smiles_ranked};
pub use invariants::{pharmacophoric_invariant, standard_invariant, PharmacophoreFlags};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elements;

/// Tetrahedral marker as written in the input (`@` or `@@`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chirality {
    /// `@`
    CounterClockwise,
    /// `@@`
    Clockwise,
}

/// Directional single-bond marker (`/` or `\`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BondDirection {
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Atom {
    /// Atomic number; 0 is the wildcard attachment atom used for fragments.
    pub element: u8,
    pub formal_charge: i8,
    pub h_count: u8,
    pub aromatic: bool,
    pub isotope: Option<u16>,
    pub stereo: Option<Chirality>,
}

impl Atom {
    pub fn new(element: u8) -> Self {
        Self {
            element,
            formal_charge: 0,
            h_count: 0,
            aromatic: false,
            isotope: None,
            stereo: None,
        }
    }

    pub fn with_h(mut self, h_count: u8) -> Self {
        self.h_count = h_count;
        self
    }

    pub fn aromatic(mut self, aromatic: bool) -> Self {
        self.aromatic = aromatic;
        self
    }

    pub fn is_wildcard(&self) -> bool {
        self.element == elements::WILDCARD
    }
}

/// Bond type with the numeric codes used for hashing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BondOrder {
    Single = 1,
    Double = 2,
    Triple = 3,
    Aromatic = 4,
}

impl BondOrder {
    pub fn code(self) -> u32 {
        self as u32
    }

    /// Contribution to the valence sum used for implicit hydrogens.
    pub fn valence(self) -> u32 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
    pub direction: Option<BondDirection>,
}

impl Bond {
    pub fn new(a: usize, b: usize, order: BondOrder) -> Self {
        Self {
            a,
            b,
            order,
            direction: None,
        }
    }

    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph has no atoms")]
    Empty,
    #[error("bond {bond} references atom {atom}, but the graph has {n} atoms")]
    BadEndpoint { bond: usize, atom: usize, n: usize },
    #[error("bond {0} is a self-loop")]
    SelfLoop(usize),
    #[error("bond {0} duplicates an earlier bond between the same atoms")]
    DuplicateBond(usize),
    #[error("graph is not connected")]
    Disconnected,
}

/// Neighbour entry: (neighbour atom, bond index).
pub type Neighbor = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MolGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<Neighbor>>,
    ring_atom: Vec<bool>,
    ring_bond: Vec<bool>,
}

impl MolGraph {
    /// Validates the topology and perceives ring membership.
    pub fn new(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<Self, GraphError> {
        let n = atoms.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut seen = std::collections::HashSet::with_capacity(bonds.len());
        for (i, bond) in bonds.iter().enumerate() {
            for atom in [bond.a, bond.b] {
                if atom >= n {
                    return Err(GraphError::BadEndpoint { bond: i, atom, n });
                }
            }
            if bond.a == bond.b {
                return Err(GraphError::SelfLoop(i));
            }
            if !seen.insert((bond.a.min(bond.b), bond.a.max(bond.b))) {
                return Err(GraphError::DuplicateBond(i));
            }
            adjacency[bond.a].push((bond.b, i));
            adjacency[bond.b].push((bond.a, i));
        }
        if !is_connected(&adjacency) {
            return Err(GraphError::Disconnected);
        }
        let (ring_atom, ring_bond) = perceive_rings(n, &bonds, &adjacency);
        Ok(Self {
            atoms,
            bonds,
            adjacency,
            ring_atom,
            ring_bond,
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn bond(&self, i: usize) -> &Bond {
        &self.bonds[i]
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn neighbors(&self, atom: usize) -> &[Neighbor] {
        &self.adjacency[atom]
    }

    /// Number of bonded atoms (hydrogens are implicit and not counted).
    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    pub fn is_ring_atom(&self, atom: usize) -> bool {
        self.ring_atom[atom]
    }

    pub fn is_ring_bond(&self, bond: usize) -> bool {
        self.ring_bond[bond]
    }

    pub fn ring_atoms(&self) -> &[bool] {
        &self.ring_atom
    }

    pub fn ring_bonds(&self) -> &[bool] {
        &self.ring_bond
    }

    /// Bond between two atoms, if any.
    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a]
            .iter()
            .find(|&&(nbr, _)| nbr == b)
            .map(|&(_, bond)| bond)
    }

    /// Count of non-wildcard atoms.
    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| !a.is_wildcard()).count()
    }

    /// Relabels atoms so that old atom `i` becomes new atom `perm[i]`.
    ///
    /// Bonds keep their relative order. Panics if `perm` is not a
    /// permutation of `0..atom_count()`.
    pub fn permuted(&self, perm: &[usize]) -> MolGraph {
        let n = self.atoms.len();
        assert_eq!(perm.len(), n, "permutation length mismatch");
        let mut atoms = vec![None; n];
        for (old, &new) in perm.iter().enumerate() {
            assert!(atoms[new].is_none(), "not a permutation");
            atoms[new] = Some(self.atoms[old].clone());
        }
        let atoms = atoms.into_iter().map(Option::unwrap).collect();
        let bonds = self
            .bonds
            .iter()
            .map(|b| Bond {
                a: perm[b.a],
                b: perm[b.b],
                order: b.order,
                direction: b.direction,
            })
            .collect();
        MolGraph::new(atoms, bonds).expect("relabeling preserves validity")
    }
}

fn is_connected(adjacency: &[Vec<Neighbor>]) -> bool {
    let mut seen = vec![false; adjacency.len()];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &(v, _) in &adjacency[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == adjacency.len()
}

/// Ring flags from bridge detection.
///
/// A bond lies on a cycle iff it is not a bridge; an atom is a ring atom iff
/// it touches a ring bond. Uses an iterative low-link DFS so that long chains
/// cannot exhaust the call stack.
pub fn perceive_rings(n: usize, bonds: &[Bond], adjacency: &[Vec<Neighbor>]) -> (Vec<bool>, Vec<bool>) {
    let mut ring_bond = vec![true; bonds.len()];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // (atom, bond used to enter, next neighbour cursor)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(frame) = stack.last_mut() {
            let (u, via, cursor) = *frame;
            if cursor < adjacency[u].len() {
                frame.2 += 1;
                let (v, bond) = adjacency[u][cursor];
                if bond == via {
                    continue;
                }
                if disc[v] == usize::MAX {
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    stack.push((v, bond, 0));
                } else {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let Some(&(parent, _, _)) = stack.last() {
                    low[parent] = low[parent].min(low[u]);
                    if low[u] > disc[parent] {
                        ring_bond[via] = false;
                    }
                }
            }
        }
    }
    let mut ring_atom = vec![false; n];
    for (i, b) in bonds.iter().enumerate() {
        if ring_bond[i] {
            ring_atom[b.a] = true;
            ring_atom[b.b] = true;
        }
    }
    (ring_atom, ring_bond)
}
