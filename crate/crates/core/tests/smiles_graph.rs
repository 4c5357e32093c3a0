mod common;

use common::{random_graph, ring_atoms_by_deletion, ring_bonds_by_deletion, rng, CORPUS};
use forge_core::elements::{CARBON, NITROGEN, OXYGEN};
use forge_core::molgraph::{canonical_smiles, write_smiles};
use forge_core::smiles::{parse_smiles, ParseErrorKind};
use proptest::prelude::*;
use rand::seq::SliceRandom as _;
use rand::Rng as _;

#[test]
fn corpus_parses() {
    for smi in CORPUS {
        parse_smiles(smi).unwrap_or_else(|e| panic!("{smi}: {e}"));
    }
}

#[test]
fn corpus_round_trips_through_canonical_form() {
    for smi in CORPUS {
        let g = parse_smiles(smi).unwrap();
        let canon = canonical_smiles(&g);
        let again = parse_smiles(&canon).unwrap_or_else(|e| panic!("{smi} -> {canon}: {e}"));
        assert_eq!(canonical_smiles(&again), canon, "{smi}");
        assert_eq!(again.atom_count(), g.atom_count());
        assert_eq!(again.bond_count(), g.bond_count());
    }
}

#[test]
fn ring_flags_match_deletion_oracle_on_small_graphs() {
    let mut r = rng(8);
    for _ in 0..2000 {
        let n = r.random_range(1..=8);
        let extra = r.random_range(0..=4);
        let g = random_graph(&mut r, n, &[CARBON, NITROGEN, OXYGEN], extra, false);
        assert_eq!(g.ring_bonds(), ring_bonds_by_deletion(&g).as_slice());
        assert_eq!(g.ring_atoms(), ring_atoms_by_deletion(&g).as_slice());
    }
}

#[test]
fn error_positions_index_characters() {
    // a two-byte character before the fault must count as one position
    let e = parse_smiles("CC(é").unwrap_err();
    assert_eq!(e.kind, ParseErrorKind::UnknownSymbol);
    assert_eq!(e.position, 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parser_never_panics(s in "[CcNnOoSBrl()=#123%0\\[\\]@+H./\\\\*-]{0,40}") {
        if let Err(e) = parse_smiles(&s) {
            prop_assert!(e.position <= s.chars().count());
        }
    }

    #[test]
    fn random_graphs_round_trip(seed in any::<u64>(), n in 1usize..16, extra in 0usize..4) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, &[CARBON, NITROGEN, OXYGEN], extra, true);
        let text = write_smiles(&g);
        let back = parse_smiles(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(canonical_smiles(&back), canonical_smiles(&g));
    }

    #[test]
    fn canonical_form_ignores_atom_order(seed in any::<u64>(), k in 0usize..CORPUS.len()) {
        let mut r = rng(seed);
        let g = parse_smiles(CORPUS[k]).unwrap();
        let mut perm: Vec<usize> = (0..g.atom_count()).collect();
        perm.shuffle(&mut r);
        prop_assert_eq!(canonical_smiles(&g.permuted(&perm)), canonical_smiles(&g));
    }

    #[test]
    fn random_graph_canonical_form_ignores_atom_order(seed in any::<u64>(), n in 1usize..14) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, &[CARBON, NITROGEN, OXYGEN], 2, true);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut r);
        prop_assert_eq!(canonical_smiles(&g.permuted(&perm)), canonical_smiles(&g));
    }
}
