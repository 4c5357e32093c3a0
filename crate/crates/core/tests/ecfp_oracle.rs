mod common;

use common::{all_connected_graphs, ecfp_reference, ecfp_reference_raw, flatten, random_graph, rng, CORPUS};
use forge_core::ecfp::{enumerate_raw, enumerate_substructures, hash32, EnumerationConfig};
use forge_core::elements::{CARBON, NITROGEN, OXYGEN};
use forge_core::smiles::parse_smiles;
use proptest::prelude::*;
use rand::seq::SliceRandom as _;

#[test]
fn hash_matches_independent_fnv() {
    assert_eq!(hash32(&[0]), 0x4B95_F515);
    assert_eq!(hash32(&[]), 0x811C_9DC5);
    for words in [vec![1u32, 2, 3], vec![u32::MAX], vec![6, 1, 3, 4, 0, 0]] {
        assert_eq!(hash32(&words), common::fnv1a(&words));
    }
}

#[test]
fn small_graphs_match_breadth_first_reference() {
    let cfg = EnumerationConfig::with_radius(3);
    for n in 1..=4 {
        for g in all_connected_graphs(n, &[CARBON, NITROGEN, OXYGEN]) {
            assert_eq!(flatten(&enumerate_raw(&g, &cfg)), ecfp_reference_raw(&g, 3));
            assert_eq!(flatten(&enumerate_substructures(&g, &cfg)), ecfp_reference(&g, 3));
        }
    }
}

#[test]
fn random_ring_graphs_match_reference() {
    let mut r = rng(11);
    for radius in 0..=3 {
        let cfg = EnumerationConfig::with_radius(radius);
        for _ in 0..300 {
            let g = random_graph(&mut r, 9, &[CARBON, NITROGEN, OXYGEN], 3, true);
            assert_eq!(flatten(&enumerate_substructures(&g, &cfg)), ecfp_reference(&g, radius));
        }
    }
}

#[test]
fn every_identifier_keeps_an_occurrence() {
    for smi in CORPUS {
        let fp = enumerate_substructures(&parse_smiles(smi).unwrap(), &EnumerationConfig::default());
        assert!(fp.occurrences.values().all(|o| !o.is_empty()), "{smi}");
    }
}

#[test]
fn isotopes_ignored_by_default() {
    let cfg = EnumerationConfig::default();
    let plain = enumerate_substructures(&parse_smiles("CO").unwrap(), &cfg);
    let labelled = enumerate_substructures(&parse_smiles("[13CH3]O").unwrap(), &cfg);
    assert_eq!(plain.id_vec(), labelled.id_vec());
    let with = EnumerationConfig {
        use_isotopes: true,
        ..cfg
    };
    let labelled = enumerate_substructures(&parse_smiles("[13CH3]O").unwrap(), &with);
    assert_ne!(plain.id_vec(), labelled.id_vec());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn identifier_sets_ignore_atom_order(seed in any::<u64>(), k in 0usize..CORPUS.len(), radius in 0u32..4) {
        let mut r = rng(seed);
        let g = parse_smiles(CORPUS[k]).unwrap();
        let mut perm: Vec<usize> = (0..g.atom_count()).collect();
        perm.shuffle(&mut r);
        let cfg = EnumerationConfig::with_radius(radius);
        prop_assert_eq!(
            enumerate_substructures(&g, &cfg).id_vec(),
            enumerate_substructures(&g.permuted(&perm), &cfg).id_vec()
        );
    }

    #[test]
    fn radius_grows_the_set(seed in any::<u64>(), n in 1usize..12) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, &[CARBON, NITROGEN, OXYGEN], 2, true);
        let small = enumerate_raw(&g, &EnumerationConfig::with_radius(1));
        let big = enumerate_raw(&g, &EnumerationConfig::with_radius(2));
        prop_assert!(small.ids().all(|id| big.contains(id)));
    }
}
