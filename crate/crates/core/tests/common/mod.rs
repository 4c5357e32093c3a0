//! Fixtures, random generators and reference implementations shared by the
//! integration tests. The references are written from the definitions and do
//! not call the routines they check.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use forge_core::ecfp::{FingerprintSet, Occurrence};
use forge_core::elements;
use forge_core::mmp::{label_ac, label_pd, AcLabel, Mmp, PdLabel};
use forge_core::molgraph::{canonical_smiles, Atom, Bond, BondOrder, MolGraph};
use rand::seq::IndexedRandom as _;
use rand::Rng as _;
use rand::SeedableRng as _;

pub type TestRng = rand_xoshiro::Xoshiro256PlusPlus;

pub fn rng(seed: u64) -> TestRng {
    TestRng::seed_from_u64(seed)
}

/// Fifty drug-like molecules covering rings, charges, isotopes, stereo and
/// two-digit ring labels.
pub const CORPUS: [&str; 50] = [
    "CC(=O)Oc1ccccc1C(=O)O",
    "CN1C=NC2=C1C(=O)N(C(=O)N2C)C",
    "CC(C)Cc1ccc(cc1)C(C)C(=O)O",
    "CC(=O)Nc1ccc(O)cc1",
    "OC(=O)c1ccccc1O",
    "c1ccc2c(c1)cccc2",
    "c1ccc2[nH]ccc2c1",
    "C1CCC(CC1)N",
    "CCN(CC)CCOC(=O)c1ccc(N)cc1",
    "COc1ccc2nc(S(=O)Cc3ncc(C)c(OC)c3C)[nH]c2c1",
    "CC(C)NCC(O)COc1cccc2ccccc12",
    "CN(C)CCCN1c2ccccc2CCc2ccccc21",
    "O=C(O)C[C@H](N)C(=O)O",
    "N[C@@H](Cc1ccccc1)C(=O)O",
    "C/C=C/C(=O)O",
    "F/C=C\\F",
    "[NH4+]",
    "C[N+](C)(C)C",
    "[O-]C(=O)c1ccccc1",
    "[13CH4]",
    "[2H]C([2H])([2H])O",
    "C1CC2CCC1C2",
    "C12C3C4C1C5C2C3C45",
    "C1CCCCCCCCCCC1",
    "c1ccc(cc1)-c1ccccc1",
    "ClC(Cl)(Cl)Cl",
    "BrCCBr",
    "IC1=CC=CC=C1",
    "C#N",
    "CC#CC",
    "OCC(O)CO",
    "NC(=O)N",
    "CS(=O)(=O)N",
    "OP(=O)(O)O",
    "c1ccsc1",
    "c1ccoc1",
    "c1cnc[nH]1",
    "c1ccncc1",
    "c1cncnc1",
    "B(O)(O)c1ccccc1",
    "C1=CC=CC=C1",
    "CC(C)(C)OC(=O)NC1CCN(CC1)C(=O)c1ccc(F)cc1",
    "O=C1NC(=O)C(N1)(c1ccccc1)c1ccccc1",
    "CC1=C(C(=O)OC)C(C(=O)OC)=C(C)N1",
    "CN1CCC[C@H]1c1cccnc1",
    "C%10CC%10",
    "C1CC1C1CC1",
    "c1ccc2cc3ccccc3cc2c1",
    "OC1C(O)C(O)C(O)C(O)C1O",
    "CC(C)C[C@H](NC(=O)[C@@H](Cc1ccccc1)NC(=O)c1cnccn1)B(O)O",
];

/// Random connected graph over `elems`: a random tree plus up to `extra`
/// additional bonds, bond orders single unless `allow_double`. Hydrogen
/// counts follow the default valence where one exists.
pub fn random_graph(r: &mut TestRng, n: usize, elems: &[u8], extra: usize, allow_double: bool) -> MolGraph {
    let mut atoms: Vec<Atom> = (0..n).map(|_| Atom::new(*elems.choose(r).unwrap())).collect();
    let mut bonds = Vec::new();
    let mut present = BTreeSet::new();
    let mut valence = vec![0u32; n];
    let cap = |e: u8| match e {
        elements::CARBON => 4,
        elements::NITROGEN => 3,
        elements::OXYGEN => 2,
        _ => 1,
    };
    for v in 1..n {
        let u = r.random_range(0..v);
        bonds.push(Bond::new(u, v, BondOrder::Single));
        present.insert((u, v));
        valence[u] += 1;
        valence[v] += 1;
    }
    for _ in 0..extra {
        if n < 3 {
            break;
        }
        let u = r.random_range(0..n);
        let v = r.random_range(0..n);
        let key = (u.min(v), u.max(v));
        if u == v || present.contains(&key) {
            continue;
        }
        present.insert(key);
        bonds.push(Bond::new(key.0, key.1, BondOrder::Single));
        valence[u] += 1;
        valence[v] += 1;
    }
    if allow_double {
        for b in bonds.iter_mut() {
            if r.random_bool(0.2) && valence[b.a] < cap(atoms[b.a].element) && valence[b.b] < cap(atoms[b.b].element) {
                b.order = BondOrder::Double;
                valence[b.a] += 1;
                valence[b.b] += 1;
            }
        }
    }
    for (a, atom) in atoms.iter_mut().enumerate() {
        atom.h_count = elements::implicit_hydrogens(atom.element, false, valence[a]).unwrap_or(0);
    }
    MolGraph::new(atoms, bonds).expect("random tree is connected")
}

/// Every connected labelled graph on `n` atoms with single bonds and every
/// assignment of elements from `elems`.
pub fn all_connected_graphs(n: usize, elems: &[u8]) -> Vec<MolGraph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let edges: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        if !connected(n, &edges) {
            continue;
        }
        let labellings = elems.len().pow(n as u32);
        for mut code in 0..labellings {
            let mut atoms = Vec::with_capacity(n);
            for _ in 0..n {
                atoms.push(Atom::new(elems[code % elems.len()]));
                code /= elems.len();
            }
            let bonds = edges.iter().map(|&(a, b)| Bond::new(a, b, BondOrder::Single)).collect();
            out.push(MolGraph::new(atoms, bonds).unwrap());
        }
    }
    out
}

pub fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    if n == 0 {
        return false;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &(a, b) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == u && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn edge_list(g: &MolGraph) -> Vec<(usize, usize)> {
    g.bonds().iter().map(|b| (b.a, b.b)).collect()
}

/// A bond is in a ring iff deleting it leaves the graph connected.
pub fn ring_bonds_by_deletion(g: &MolGraph) -> Vec<bool> {
    let edges = edge_list(g);
    (0..edges.len())
        .map(|k| {
            let rest: Vec<_> = edges
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &e)| e)
                .collect();
            connected(g.atom_count(), &rest)
        })
        .collect()
}

pub fn ring_atoms_by_deletion(g: &MolGraph) -> Vec<bool> {
    let rb = ring_bonds_by_deletion(g);
    (0..g.atom_count())
        .map(|a| {
            g.bonds()
                .iter()
                .enumerate()
                .any(|(k, b)| rb[k] && (b.a == a || b.b == a))
        })
        .collect()
}

pub fn distances(g: &MolGraph, from: usize) -> Vec<usize> {
    let mut d = vec![usize::MAX; g.atom_count()];
    let mut q = VecDeque::from([from]);
    d[from] = 0;
    while let Some(u) = q.pop_front() {
        for b in g.bonds() {
            let v = if b.a == u {
                b.b
            } else if b.b == u {
                b.a
            } else {
                continue;
            };
            if d[v] == usize::MAX {
                d[v] = d[u] + 1;
                q.push_back(v);
            }
        }
    }
    d
}

/// 32-bit FNV-1a over the little-endian bytes of `words`.
pub fn fnv1a(words: &[u32]) -> u32 {
    let mut h: u64 = 0x811c_9dc5;
    for w in words {
        for byte in w.to_le_bytes() {
            h ^= u64::from(byte);
            h = (h * 0x0100_0193) & 0xffff_ffff;
        }
    }
    h as u32
}

/// One circular substructure: (identifier, centre, radius, atoms, bonds).
pub type RefOccurrence = (u32, usize, u32, Vec<usize>, Vec<usize>);

fn bond_code(order: BondOrder) -> u32 {
    match order {
        BondOrder::Single => 1,
        BondOrder::Double => 2,
        BondOrder::Triple => 3,
        BondOrder::Aromatic => 4,
    }
}

/// Breadth-first reference for the raw (pre-deduplication) enumeration with
/// standard invariants, no isotopes and no chirality.
pub fn ecfp_reference_raw(g: &MolGraph, radius: u32) -> Vec<RefOccurrence> {
    let n = g.atom_count();
    let ring = ring_atoms_by_deletion(g);
    let dist: Vec<Vec<usize>> = (0..n).map(|a| distances(g, a)).collect();
    let degree = |a: usize| g.bonds().iter().filter(|b| b.a == a || b.b == a).count() as u32;
    let mut ids: Vec<u32> = (0..n)
        .map(|a| {
            let at = g.atom(a);
            fnv1a(&[
                u32::from(at.element),
                degree(a),
                u32::from(at.h_count),
                (i32::from(at.formal_charge) + 4) as u32,
                0,
                u32::from(ring[a]),
            ])
        })
        .collect();
    let mut out = Vec::new();
    for r in 0..=radius {
        if r > 0 {
            ids = (0..n)
                .map(|a| {
                    let mut env: Vec<(u32, u32)> = g
                        .bonds()
                        .iter()
                        .filter_map(|b| {
                            let nb = if b.a == a {
                                b.b
                            } else if b.b == a {
                                b.a
                            } else {
                                return None;
                            };
                            Some((bond_code(b.order), ids[nb]))
                        })
                        .collect();
                    env.sort();
                    let mut seq = vec![r, ids[a]];
                    for (c, id) in env {
                        seq.push(c);
                        seq.push(id);
                    }
                    fnv1a(&seq)
                })
                .collect();
        }
        for a in 0..n {
            let atoms: Vec<usize> = (0..n).filter(|&v| dist[a][v] <= r as usize).collect();
            let bonds: Vec<usize> = g
                .bonds()
                .iter()
                .enumerate()
                .filter(|(_, b)| r > 0 && dist[a][b.a].min(dist[a][b.b]) < r as usize)
                .map(|(k, _)| k)
                .collect();
            out.push((ids[a], a, r, atoms, bonds));
        }
    }
    out.sort();
    out
}

/// Reference duplicate removal: one survivor per bond set (per centre when
/// the bond set is empty), minimising (radius, id, centre).
pub fn ecfp_reference(g: &MolGraph, radius: u32) -> Vec<RefOccurrence> {
    let mut best: BTreeMap<(bool, Vec<usize>), RefOccurrence> = BTreeMap::new();
    for occ in ecfp_reference_raw(g, radius) {
        let key = if occ.4.is_empty() {
            (false, vec![occ.1])
        } else {
            (true, occ.4.clone())
        };
        let better = |cur: &RefOccurrence| (occ.2, occ.0, occ.1) < (cur.2, cur.0, cur.1);
        match best.get(&key) {
            Some(cur) if !better(cur) => {}
            _ => {
                best.insert(key, occ);
            }
        }
    }
    let mut out: Vec<RefOccurrence> = best.into_values().collect();
    out.sort();
    out
}

/// Flattens an enumerated fingerprint into the reference shape.
pub fn flatten(fp: &forge_core::ecfp::FingerprintSet) -> Vec<RefOccurrence> {
    let mut out: Vec<RefOccurrence> = fp
        .occurrences
        .iter()
        .flat_map(|(&id, occs)| {
            occs.iter()
                .map(move |o| (id, o.center, o.radius, o.atoms.clone(), o.bonds.clone()))
        })
        .collect();
    out.sort();
    out
}

/// Atoms on `root`'s side of bond `cut`.
fn side(g: &MolGraph, root: usize, cut: usize) -> Vec<usize> {
    let edges: Vec<(usize, usize)> = g
        .bonds()
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != cut)
        .map(|(_, b)| (b.a, b.b))
        .collect();
    let mut seen = vec![false; g.atom_count()];
    let mut stack = vec![root];
    seen[root] = true;
    while let Some(u) = stack.pop() {
        for &(a, b) in &edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == u && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    (0..g.atom_count()).filter(|&a| seen[a]).collect()
}

/// Canonical SMILES of one side of a cut with a wildcard in place of the
/// other side.
fn capped(g: &MolGraph, keep: &[usize], attach: usize) -> String {
    let index = |a: usize| keep.iter().position(|&x| x == a);
    let mut atoms: Vec<Atom> = keep.iter().map(|&a| g.atom(a).clone()).collect();
    let mut bonds: Vec<Bond> = g
        .bonds()
        .iter()
        .filter_map(|b| Some(Bond::new(index(b.a)?, index(b.b)?, b.order)))
        .collect();
    atoms.push(Atom::new(0));
    bonds.push(Bond::new(index(attach).unwrap(), atoms.len() - 1, BondOrder::Single));
    canonical_smiles(&MolGraph::new(atoms, bonds).unwrap())
}

/// All (core, variable, core heavy, variable heavy) splits of one molecule
/// that satisfy the size rules, by direct enumeration over bonds.
pub fn reference_cuts(g: &MolGraph) -> BTreeSet<(String, String, usize, usize)> {
    let ring = ring_bonds_by_deletion(g);
    let heavy = |atoms: &[usize]| atoms.iter().filter(|&&a| g.atom(a).element != 0).count();
    let mut out = BTreeSet::new();
    for (k, b) in g.bonds().iter().enumerate() {
        if b.order != BondOrder::Single || ring[k] {
            continue;
        }
        for (core_root, var_root) in [(b.a, b.b), (b.b, b.a)] {
            let core = side(g, core_root, k);
            let var = side(g, var_root, k);
            let (hc, hv) = (heavy(&core), heavy(&var));
            if hv <= 13 && hc >= 2 * hv {
                out.insert((capped(g, &core, core_root), capped(g, &var, var_root), hc, hv));
            }
        }
    }
    out
}

/// All-pairs reference for matched molecular pairs.
pub fn reference_mmps(graphs: &[MolGraph], activities: &[f64]) -> Vec<Mmp> {
    let cuts: Vec<_> = graphs.iter().map(reference_cuts).collect();
    let mut out = Vec::new();
    for i in 0..graphs.len() {
        for j in i + 1..graphs.len() {
            let mut best: Option<(std::cmp::Reverse<usize>, String, String, String, usize, usize)> = None;
            for (ci, vi, hci, hvi) in &cuts[i] {
                for (cj, vj, _, hvj) in &cuts[j] {
                    if ci != cj || vi == vj || hvi.abs_diff(*hvj) > 8 {
                        continue;
                    }
                    let cand = (std::cmp::Reverse(*hci), ci.clone(), vi.clone(), vj.clone(), *hvi, *hvj);
                    if best.as_ref().is_none_or(|b| cand < *b) {
                        best = Some(cand);
                    }
                }
            }
            if let Some((std::cmp::Reverse(hc), core, var_i, var_j, hvi, hvj)) = best {
                out.push(Mmp {
                    i,
                    j,
                    core,
                    var_i,
                    var_j,
                    core_heavy: hc,
                    var_heavy_i: hvi,
                    var_heavy_j: hvj,
                    ac_label: label_ac(activities[i], activities[j]),
                    pd_label: label_pd(activities[i], activities[j]),
                });
            }
        }
    }
    out
}

/// Attachment points written so that the last atom bonds to the core.
pub const SUBSTITUENTS: [&str; 14] = [
    "C", "CC", "CCC", "O", "CO", "N", "CN", "Cl", "F", "FC(F)(F)", "CC(C)", "OCC", "c1ccccc1", "C1CC1",
];

/// Cores whose first atom receives the substituent.
pub const CORES: [&str; 8] = [
    "c1ccc(O)cc1",
    "c1ccncc1",
    "C1CCN(C)CC1",
    "c1ccc2ccccc2c1",
    "C(=O)Nc1ccccc1",
    "c1cc(Cl)ccc1C",
    "C1CCOCC1",
    "c1ccc(C(=O)O)cc1",
];

/// Up to `max` distinct molecules (by canonical SMILES) built from the
/// substituent and core lists, with random activities in 4..10.
pub fn random_series(r: &mut TestRng, max: usize) -> (Vec<MolGraph>, Vec<f64>) {
    let n = r.random_range(2..=max);
    let mut seen = BTreeSet::new();
    let mut graphs = Vec::new();
    let mut acts = Vec::new();
    let mut attempts = 0;
    while graphs.len() < n && attempts < 200 {
        attempts += 1;
        let core = if r.random_bool(0.7) {
            CORES[r.random_range(0..2)]
        } else {
            *CORES.choose(r).unwrap()
        };
        let smi = format!("{}{}", SUBSTITUENTS.choose(r).unwrap(), core);
        let g = forge_core::smiles::parse_smiles(&smi).unwrap();
        if seen.insert(canonical_smiles(&g)) {
            graphs.push(g);
            acts.push(r.random_range(4.0..10.0));
        }
    }
    (graphs, acts)
}

pub fn flip(pd: PdLabel) -> PdLabel {
    match pd {
        PdLabel::Left => PdLabel::Right,
        PdLabel::Right => PdLabel::Left,
    }
}

pub const AC_LABELS: [AcLabel; 3] = [AcLabel::Ac, AcLabel::HalfAc, AcLabel::NonAc];

/// MCC from the four counts by the textbook formula.
pub fn mcc_reference(tp: f64, tn: f64, fp: f64, fn_: f64) -> f64 {
    let den = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
    if den == 0.0 {
        0.0
    } else {
        (tp * tn - fp * fn_) / den
    }
}

/// Fraction of (positive, negative) pairs ranked correctly, ties half.
pub fn auroc_reference(scores: &[f64], labels: &[bool]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &li) in labels.iter().enumerate() {
        for (j, &lj) in labels.iter().enumerate() {
            if li && !lj {
                den += 1.0;
                if scores[i] > scores[j] {
                    num += 1.0;
                } else if scores[i] == scores[j] {
                    num += 0.5;
                }
            }
        }
    }
    num / den
}

pub fn workspace_root() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// One training pair for the twin gradient check.
pub struct GradPair {
    pub x_i: Vec<f64>,
    pub x_j: Vec<f64>,
    pub ac: AcLabel,
    pub pd: PdLabel,
}

pub fn random_twin_pairs(r: &mut TestRng, input: usize, count: usize) -> Vec<GradPair> {
    (0..count)
        .map(|_| GradPair {
            x_i: (0..input).map(|_| r.random_range(-1.0..1.0)).collect(),
            x_j: (0..input).map(|_| r.random_range(-1.0..1.0)).collect(),
            ac: *AC_LABELS.choose(r).unwrap(),
            pd: if r.random() { PdLabel::Left } else { PdLabel::Right },
        })
        .collect()
}

/// Largest relative error between the analytic gradient of the summed pair
/// loss and central differences with step `h`, where relative error is
/// `|g - fd| / max(|g|, |fd|, floor)`.
pub fn twin_gradient_error(
    model: &forge_core::neural::TwinModel,
    pairs: &[GradPair],
    w: &forge_core::neural::ClassWeights,
    h: f64,
    floor: f64,
) -> f64 {
    let theta = model.params();
    let mut grads = vec![0.0; theta.len()];
    for p in pairs {
        model.accumulate_gradient(&p.x_i, &p.x_j, p.ac, p.pd, w, &mut grads);
    }
    let total = |m: &forge_core::neural::TwinModel| -> f64 {
        pairs
            .iter()
            .map(|p| m.loss(&p.x_i, &p.x_j, p.ac, p.pd, w).unwrap())
            .sum()
    };
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for k in 0..theta.len() {
        let mut t = theta.clone();
        t[k] = theta[k] + h;
        probe.set_params(&t);
        let up = total(&probe);
        t[k] = theta[k] - h;
        probe.set_params(&t);
        let down = total(&probe);
        let fd = (up - down) / (2.0 * h);
        let err = (grads[k] - fd).abs() / grads[k].abs().max(fd.abs()).max(floor);
        worst = worst.max(err);
    }
    worst
}

/// Adds uniform noise to every parameter so that biases are non-zero and no
/// ReLU sits exactly on its kink.
pub fn jitter(model: &mut forge_core::neural::TwinModel, r: &mut TestRng, scale: f64) {
    let theta: Vec<f64> = model
        .params()
        .into_iter()
        .map(|t| t + r.random_range(-scale..scale))
        .collect();
    model.set_params(&theta);
}

/// Fingerprint whose identifiers occupy disjoint single atoms.
pub fn flat(ids: &BTreeSet<u32>) -> FingerprintSet {
    let mut fp = FingerprintSet::default();
    for (k, &id) in ids.iter().enumerate() {
        fp.occurrences.insert(
            id,
            vec![Occurrence {
                center: k,
                radius: 0,
                atoms: vec![k],
                bonds: vec![],
            }],
        );
    }
    fp
}

/// `n` compounds drawing from `m` identifiers with random inclusion rates.
pub fn random_context(r: &mut TestRng, n: usize, m: usize) -> (Vec<FingerprintSet>, Vec<f64>) {
    let ids: Vec<u32> = (0..m).map(|_| r.random()).collect();
    let rates: Vec<f64> = (0..m).map(|_| r.random_range(0.0..0.8)).collect();
    let fps = (0..n)
        .map(|_| {
            let set: BTreeSet<u32> = ids
                .iter()
                .zip(&rates)
                .filter(|(_, &p)| r.random_bool(p))
                .map(|(&id, _)| id)
                .collect();
            flat(&set)
        })
        .collect();
    let labels = (0..n).map(|_| r.random_range(4.0..9.0)).collect();
    (fps, labels)
}

pub fn supports(fps: &[FingerprintSet]) -> BTreeMap<u32, usize> {
    let mut s = BTreeMap::new();
    for fp in fps {
        for id in fp.ids() {
            *s.entry(id).or_default() += 1;
        }
    }
    s
}

/// Random MMP list over `n` compounds with a handful of cores.
pub fn random_mmps(r: &mut TestRng, n: usize) -> Vec<Mmp> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for _ in 0..r.random_range(0..3 * n) {
        let i = r.random_range(0..n);
        let j = r.random_range(0..n);
        if i == j || !seen.insert((i.min(j), i.max(j))) {
            continue;
        }
        out.push(Mmp {
            i: i.min(j),
            j: i.max(j),
            core: format!("core{}", r.random_range(0..5)),
            var_i: "[*]C".into(),
            var_j: "[*]N".into(),
            core_heavy: 8,
            var_heavy_i: 1,
            var_heavy_j: 1,
            ac_label: AcLabel::NonAc,
            pd_label: PdLabel::Left,
        });
    }
    out
}
