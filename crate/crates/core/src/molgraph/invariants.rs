//! Per-atom invariant tuples consumed by the fingerprint initialisation.

use super::{BondOrder, MolGraph};
use crate::elements::{self, NITROGEN, OXYGEN, SULFUR};

/// `(atomic number, heavy degree, H count, charge + 4, isotope or 0, in ring)`.
///
/// Degree counts bonded graph atoms only; hydrogens are carried separately
/// in the third slot.
pub fn standard_invariant(g: &MolGraph, atom: usize) -> [u32; 6] {
    let a = g.atom(atom);
    [
        u32::from(a.element),
        g.degree(atom) as u32,
        u32::from(a.h_count),
        (i32::from(a.formal_charge) + 4).max(0) as u32,
        a.isotope.map_or(0, u32::from),
        u32::from(g.is_ring_atom(atom)),
    ]
}

/// Six pharmacophore bits for one atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PharmacophoreFlags {
    pub acceptor: bool,
    pub donor: bool,
    pub negative_ionisable: bool,
    pub positive_ionisable: bool,
    pub aromatic: bool,
    pub halogen: bool,
}

impl PharmacophoreFlags {
    pub fn as_tuple(&self) -> [u32; 6] {
        [
            self.acceptor,
            self.donor,
            self.negative_ionisable,
            self.positive_ionisable,
            self.aromatic,
            self.halogen,
        ]
        .map(u32::from)
    }
}

/// Rule-based pharmacophore typing.
///
/// * acceptor: N or O with charge ≤ 0
/// * donor: N or O carrying at least one hydrogen
/// * negatively ionisable: O or S with a hydrogen, single-bonded to an atom
///   that is double-bonded to another O or S (carboxylic, sulfonic,
///   phosphonic and thio acids)
/// * positively ionisable: non-aromatic N, charge ≥ 0, only single bonds
/// * aromatic: the aromatic flag
/// * halogen: F, Cl, Br or I
pub fn pharmacophoric_invariant(g: &MolGraph, atom: usize) -> PharmacophoreFlags {
    let a = g.atom(atom);
    let n_or_o = matches!(a.element, NITROGEN | OXYGEN);
    let only_single = g
        .neighbors(atom)
        .iter()
        .all(|&(_, b)| g.bond(b).order == BondOrder::Single);
    PharmacophoreFlags {
        acceptor: n_or_o && a.formal_charge <= 0,
        donor: n_or_o && a.h_count >= 1,
        negative_ionisable: is_acidic(g, atom),
        positive_ionisable: a.element == NITROGEN && !a.aromatic && a.formal_charge >= 0 && only_single,
        aromatic: a.aromatic,
        halogen: elements::is_halogen(a.element),
    }
}

fn is_acidic(g: &MolGraph, atom: usize) -> bool {
    let a = g.atom(atom);
    if !matches!(a.element, OXYGEN | SULFUR) || a.h_count == 0 {
        return false;
    }
    g.neighbors(atom).iter().any(|&(center, bond)| {
        g.bond(bond).order == BondOrder::Single
            && g.neighbors(center).iter().any(|&(other, b2)| {
                other != atom
                    && g.bond(b2).order == BondOrder::Double
                    && matches!(g.atom(other).element, OXYGEN | SULFUR)
            })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    fn pharm(smiles: &str, atom: usize) -> [u32; 6] {
        pharmacophoric_invariant(&parse_smiles(smiles).unwrap(), atom).as_tuple()
    }

    #[test]
    fn standard_tuples() {
        let g = parse_smiles("CCO").unwrap();
        assert_eq!(standard_invariant(&g, 1), [6, 2, 2, 4, 0, 0]);
        assert_eq!(standard_invariant(&g, 2), [8, 1, 1, 4, 0, 0]);
        let ring = parse_smiles("C1CC1").unwrap();
        assert_eq!(standard_invariant(&ring, 0), [6, 2, 2, 4, 0, 1]);
        let charged = parse_smiles("C[NH3+]").unwrap();
        assert_eq!(standard_invariant(&charged, 1), [7, 1, 3, 5, 0, 0]);
        let labelled = parse_smiles("[13CH3]C").unwrap();
        assert_eq!(standard_invariant(&labelled, 0), [6, 1, 3, 4, 13, 0]);
    }

    #[test]
    fn pharmacophore_examples() {
        assert_eq!(pharm("CCO", 2), [1, 1, 0, 0, 0, 0]);
        assert_eq!(pharm("CCl", 1), [0, 0, 0, 0, 0, 1]);
        assert_eq!(pharm("c1ccccc1", 0), [0, 0, 0, 0, 1, 0]);
    }

    #[test]
    fn acids_and_bases() {
        // acetic acid: hydroxyl O is acidic, carbonyl O is only an acceptor
        assert_eq!(pharm("CC(=O)O", 3), [1, 1, 1, 0, 0, 0]);
        assert_eq!(pharm("CC(=O)O", 2), [1, 0, 0, 0, 0, 0]);
        // methanesulfonic acid
        assert_eq!(pharm("CS(=O)(=O)O", 4), [1, 1, 1, 0, 0, 0]);
        // ethylamine N is basic; pyridine N is aromatic and not
        assert_eq!(pharm("CCN", 2), [1, 1, 0, 1, 0, 0]);
        assert_eq!(pharm("c1ccncc1", 3), [1, 0, 0, 0, 1, 0]);
        // imine N has a double bond
        assert_eq!(pharm("CC=N", 2)[3], 0);
        // ammonium: donor, not an acceptor, still positively ionisable
        assert_eq!(pharm("C[NH3+]", 1), [0, 1, 0, 1, 0, 0]);
    }
}
