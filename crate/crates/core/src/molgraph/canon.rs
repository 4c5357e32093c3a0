//! Canonical atom ranking and SMILES output.
//!
//! Ranking is iterated neighbourhood refinement: atoms start in classes keyed
//! by their local invariants and are split by the sorted multiset of
//! `(bond order, neighbour class)` pairs until the partition is stable. Any
//! class that is still tied is broken by promoting its lowest-index atom and
//! refining again, until every atom has its own rank.
//!
//! Stereo markers are never written; the output describes the constitution
//! only.

use super::{BondOrder, MolGraph};
use crate::elements;

type LocalKey = (u8, usize, u8, i8, u16, bool, bool);

fn local_key(g: &MolGraph, atom: usize) -> LocalKey {
    let a = g.atom(atom);
    (
        a.element,
        g.degree(atom),
        a.h_count,
        a.formal_charge,
        a.isotope.unwrap_or(0),
        a.aromatic,
        g.is_ring_atom(atom),
    )
}

/// Replaces each key by the number of distinct keys that sort below it.
fn dense_ranks<K: Ord + Clone>(keys: &[K]) -> (Vec<usize>, usize) {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    let ranks = keys
        .iter()
        .map(|k| sorted.binary_search(k).expect("key present"))
        .collect();
    (ranks, sorted.len())
}

fn refine(g: &MolGraph, mut ranks: Vec<usize>, mut classes: usize) -> (Vec<usize>, usize) {
    loop {
        let keys: Vec<(usize, Vec<(u32, usize)>)> = (0..g.atom_count())
            .map(|a| {
                let mut env: Vec<(u32, usize)> = g
                    .neighbors(a)
                    .iter()
                    .map(|&(nbr, b)| (g.bond(b).order.code(), ranks[nbr]))
                    .collect();
                env.sort_unstable();
                (ranks[a], env)
            })
            .collect();
        let (next, next_classes) = dense_ranks(&keys);
        if next_classes == classes {
            return (ranks, classes);
        }
        ranks = next;
        classes = next_classes;
    }
}

/// Bijective canonical rank per atom (`0..n`).
///
/// Invariant under atom relabelling for every graph whose symmetry classes
/// are resolved by refinement. When refinement stalls, the tied class with
/// the smallest rank is split by giving its lowest-index atom the lower rank.
pub fn canonical_ranks(g: &MolGraph) -> Vec<usize> {
    let n = g.atom_count();
    let keys: Vec<LocalKey> = (0..n).map(|a| local_key(g, a)).collect();
    let (ranks, classes) = dense_ranks(&keys);
    let (mut ranks, mut classes) = refine(g, ranks, classes);
    while classes < n {
        let mut counts = vec![0usize; classes];
        for &r in &ranks {
            counts[r] += 1;
        }
        let tied = counts.iter().position(|&c| c > 1).expect("tie exists");
        let chosen = (0..n).find(|&a| ranks[a] == tied).expect("class member");
        let split: Vec<(usize, bool)> = (0..n).map(|a| (ranks[a], a != chosen)).collect();
        let (r, c) = dense_ranks(&split);
        (ranks, classes) = refine(g, r, c);
    }
    ranks
}

/// Canonical SMILES: [`write_smiles_ranked`] driven by [`canonical_ranks`].
pub fn canonical_smiles(g: &MolGraph) -> String {
    write_smiles_ranked(g, &canonical_ranks(g))
}

/// SMILES following the graph's own atom order.
pub fn write_smiles(g: &MolGraph) -> String {
    let order: Vec<usize> = (0..g.atom_count()).collect();
    write_smiles_ranked(g, &order)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum EdgeClass {
    Unseen,
    Tree,
    Ring,
}

enum Task {
    Atom { atom: usize, via: Option<usize> },
    Text(&'static str),
}

/// Writes a SMILES string whose depth-first traversal starts at the atom of
/// lowest rank and always visits lower-ranked neighbours first.
///
/// `ranks` must assign distinct values to the atoms; any total order works,
/// which makes this usable for randomised rewritings as well.
pub fn write_smiles_ranked(g: &MolGraph, ranks: &[usize]) -> String {
    let n = g.atom_count();
    assert_eq!(ranks.len(), n, "one rank per atom");
    let start = (0..n).min_by_key(|&a| ranks[a]).expect("non-empty graph");

    // pass 1: spanning tree and ring-closure bonds
    let mut edge = vec![EdgeClass::Unseen; g.bond_count()];
    let mut visited = vec![false; n];
    let mut children: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut ring_open: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut ring_close: Vec<Vec<usize>> = vec![Vec::new(); n];
    let sorted_neighbors = |u: usize| {
        let mut nbrs = g.neighbors(u).to_vec();
        nbrs.sort_by_key(|&(v, _)| ranks[v]);
        nbrs
    };
    let mut stack: Vec<(usize, Vec<(usize, usize)>, usize)> = vec![(start, sorted_neighbors(start), 0)];
    visited[start] = true;
    while let Some((u, nbrs, cursor)) = stack.last_mut() {
        let u = *u;
        if *cursor == nbrs.len() {
            stack.pop();
            continue;
        }
        let (v, b) = nbrs[*cursor];
        *cursor += 1;
        if edge[b] != EdgeClass::Unseen {
            continue;
        }
        if visited[v] {
            edge[b] = EdgeClass::Ring;
            ring_open[v].push(b);
            ring_close[u].push(b);
        } else {
            edge[b] = EdgeClass::Tree;
            children[u].push((v, b));
            visited[v] = true;
            let next = sorted_neighbors(v);
            stack.push((v, next, 0));
        }
    }

    // pass 2: emit text
    let mut out = String::new();
    let mut digit_of_bond = vec![0usize; g.bond_count()];
    let mut in_use: Vec<bool> = Vec::new();
    let mut tasks = vec![Task::Atom { atom: start, via: None }];
    while let Some(task) = tasks.pop() {
        let (u, via) = match task {
            Task::Text(t) => {
                out.push_str(t);
                continue;
            }
            Task::Atom { atom, via } => (atom, via),
        };
        if let Some(b) = via {
            out.push_str(bond_symbol(g, b));
        }
        write_atom(g, u, &mut out);
        let closing: Vec<usize> = ring_close[u].iter().map(|&b| digit_of_bond[b]).collect();
        for &d in &closing {
            push_ring_digit(&mut out, d);
        }
        for &b in &ring_open[u] {
            let d = match in_use.iter().position(|&used| !used) {
                Some(free) => free,
                None => {
                    in_use.push(false);
                    in_use.len() - 1
                }
            };
            in_use[d] = true;
            digit_of_bond[b] = d;
            out.push_str(bond_symbol(g, b));
            push_ring_digit(&mut out, d);
        }
        for d in closing {
            in_use[d] = false;
        }
        let kids = &children[u];
        if let Some((&(last, last_bond), rest)) = kids.split_last() {
            tasks.push(Task::Atom {
                atom: last,
                via: Some(last_bond),
            });
            for &(child, b) in rest.iter().rev() {
                tasks.push(Task::Text(")"));
                tasks.push(Task::Atom {
                    atom: child,
                    via: Some(b),
                });
                tasks.push(Task::Text("("));
            }
        }
    }
    out
}

fn push_ring_digit(out: &mut String, slot: usize) {
    let label = slot + 1;
    if label < 10 {
        out.push(char::from(b'0' + label as u8));
    } else {
        out.push_str(&format!("%{label:02}"));
    }
}

fn bond_symbol(g: &MolGraph, b: usize) -> &'static str {
    let bond = g.bond(b);
    let both_aromatic = g.atom(bond.a).aromatic && g.atom(bond.b).aromatic;
    match bond.order {
        BondOrder::Single if both_aromatic => "-",
        BondOrder::Single => "",
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
        BondOrder::Aromatic if both_aromatic => "",
        BondOrder::Aromatic => ":",
    }
}

fn write_atom(g: &MolGraph, u: usize, out: &mut String) {
    let a = g.atom(u);
    if a.is_wildcard() {
        out.push_str("[*]");
        return;
    }
    let bond_sum: u32 = g.neighbors(u).iter().map(|&(_, b)| g.bond(b).order.valence()).sum();
    let bare = elements::is_organic_subset(a.element)
        && a.formal_charge == 0
        && a.isotope.is_none()
        && (!a.aromatic || elements::is_bare_aromatic(a.element))
        && elements::implicit_hydrogens(a.element, a.aromatic, bond_sum) == Some(a.h_count);
    let sym = elements::symbol(a.element);
    if bare {
        if a.aromatic {
            out.push_str(&sym.to_ascii_lowercase());
        } else {
            out.push_str(sym);
        }
        return;
    }
    out.push('[');
    if let Some(iso) = a.isotope {
        out.push_str(&iso.to_string());
    }
    if a.aromatic {
        out.push_str(&sym.to_ascii_lowercase());
    } else {
        out.push_str(sym);
    }
    match a.h_count {
        0 => {}
        1 => out.push('H'),
        h => out.push_str(&format!("H{h}")),
    }
    match a.formal_charge {
        0 => {}
        1 => out.push('+'),
        -1 => out.push('-'),
        c if c > 0 => out.push_str(&format!("+{c}")),
        c => out.push_str(&format!("-{}", -c)),
    }
    out.push(']');
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    fn canon(s: &str) -> String {
        canonical_smiles(&parse_smiles(s).unwrap())
    }

    fn all_permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in all_permutations(n - 1) {
            for pos in 0..n {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn ethanol_orders_agree() {
        assert_eq!(canon("OCC"), canon("CCO"));
        assert_eq!(canon("C(O)C"), canon("CCO"));
        let g = parse_smiles("CCO").unwrap();
        for perm in all_permutations(3) {
            assert_eq!(canonical_smiles(&g.permuted(&perm)), canon("CCO"));
            let mut ranks = canonical_ranks(&g.permuted(&perm));
            ranks.sort();
            assert_eq!(ranks, vec![0, 1, 2]);
        }
    }

    #[test]
    fn cyclopropane_single_string_over_all_relabelings() {
        let g = parse_smiles("C1CC1").unwrap();
        let outputs: std::collections::BTreeSet<String> = all_permutations(3)
            .iter()
            .map(|p| canonical_smiles(&g.permuted(p)))
            .collect();
        assert_eq!(outputs.len(), 1);
    }

    #[test]
    fn benzene_reparses_aromatic() {
        let s = canon("c1ccccc1");
        let g = parse_smiles(&s).unwrap();
        assert_eq!(g.atom_count(), 6);
        assert!(g.atoms().iter().all(|a| a.aromatic && a.h_count == 1));
        assert!(g.bonds().iter().all(|b| b.order == BondOrder::Aromatic));
    }

    #[test]
    fn rewritings_share_canonical_form() {
        let groups: &[&[&str]] = &[
            &["CC(=O)O", "OC(C)=O", "C(C)(O)=O"],
            &["c1ccccc1O", "Oc1ccccc1", "c1cc(O)ccc1"],
            &["C1CCCCC1N", "NC1CCCCC1", "C1(N)CCCCC1"],
            &["CC(C)(C)Br", "BrC(C)(C)C"],
            &["c1ccc2ccccc2c1", "c1cccc2c1cccc2"],
            &["C[NH3+]", "[NH3+]C"],
            &["O=C1CCC(=O)N1", "N1C(=O)CCC1=O"],
            &["C#N", "N#C"],
            &["c1ccccc1-c1ccccc1", "c1ccc(cc1)-c1ccccc1"],
        ];
        for group in groups {
            let first = canon(group[0]);
            for s in &group[1..] {
                assert_eq!(canon(s), first, "{s} vs {}", group[0]);
            }
        }
        assert_ne!(canon("CCO"), canon("COC"));
        assert_ne!(canon("c1ccccc1"), canon("C1CCCCC1"));
    }

    #[test]
    fn writer_round_trips() {
        for s in [
            "CCO",
            "c1ccccc1-c1ccccc1",
            "C1CC2CCC1C2",
            "[13CH3]C(=O)[O-]",
            "O=c1cccc[nH]1",
            "C1CCC2(CC1)CCCC2",
            "FC(F)(F)c1ccc(Cl)cc1",
            "C=1CCCCC1",
        ] {
            let g = parse_smiles(s).unwrap();
            let w = write_smiles(&g);
            let h = parse_smiles(&w).unwrap_or_else(|e| panic!("{s} -> {w}: {e}"));
            assert_eq!(canonical_smiles(&h), canonical_smiles(&g), "{s} -> {w}");
            assert_eq!(h.atom_count(), g.atom_count());
        }
    }

    #[test]
    fn many_rings_use_percent_digits() {
        // 11 fused cyclopropanes need more than nine open ring labels at once
        let g = parse_smiles("C12C3C4C5C6C7C8C9C%10C%11C%12C1C2C3C4C5C6C7C8C9C%10C%11%12").unwrap();
        let s = write_smiles(&g);
        let h = parse_smiles(&s).unwrap();
        assert_eq!(canonical_smiles(&g), canonical_smiles(&h));
    }
}
