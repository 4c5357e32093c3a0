//! Seeded generator for synthetic structure-activity data.
//!
//! Compounds are chains of ring fragments from twenty families joined by
//! neutral linkers. Each family carries a fixed additive effect; the label
//! of a compound is 6 plus the effects of its fragments plus Gaussian noise.
//! Compounds come in congeneric series: a shared core (one or two bridging
//! fragments with linkers) capped by a varying terminal fragment, which
//! yields a dense matched-pair graph.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::mmp::ActivityUnits;
use crate::molgraph::{write_smiles, MolGraph};
use crate::rng;
use crate::smiles::parse_smiles;

/// Family fragments as (bridging form, terminal form). The bridging form
/// is entered at its first atom and continues from its last open atom; the
/// ring digit `1` is renumbered per position.
pub const FAMILIES: [(&str, &str); 20] = [
    ("c1ccc(cc1)", "c1ccccc1"),
    ("c1cnc(cc1)", "c1ccncc1"),
    ("c1cnc(nc1)", "c1cncnc1"),
    ("c1ccc(s1)", "c1cccs1"),
    ("c1ccc(o1)", "c1ccco1"),
    ("c1cc(n[nH]1)", "c1cc[nH]n1"),
    ("c1cnc(s1)", "c1cncs1"),
    ("C1CCC(CC1)", "C1CCCCC1"),
    ("C1CC1", "C1CC1"),
    ("N1CCC(CC1)", "N1CCCCC1"),
    ("N1CCN(CC1)", "N1CCNCC1"),
    ("C1COCCN1", "N1CCOCC1"),
    ("N1CCC(C1)", "N1CCCC1"),
    ("c1cnc(o1)", "c1cnco1"),
    ("C1CCOC(C1)", "C1CCOCC1"),
    ("C1CCC(C1)", "C1CCCC1"),
    ("c1cnc([nH]1)", "c1cnc[nH]1"),
    ("c1cnc(cn1)", "c1cnccn1"),
    ("c1cc(F)c(cc1)", "c1ccc(F)cc1"),
    ("c1cc(Cl)c(cc1)", "c1ccc(Cl)cc1"),
];

/// Activity-neutral linkers between fragments.
pub const LINKERS: [&str; 7] = ["C(=O)N", "NC(=O)", "O", "C", "S(=O)(=O)N", "CC", "N"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n: usize,
    pub seed: u64,
    /// Standard deviation of the additive label noise (p units).
    pub noise: f64,
    pub units: ActivityUnits,
    /// Extra rows that repeat an earlier molecule under a different atom
    /// order with a nearby measurement.
    pub duplicates: usize,
}

impl SynthConfig {
    /// The bundled 300-molecule benchmark (`data/sar.csv`).
    pub const SAR: Self = Self {
        n: 300,
        seed: 20_240_501,
        noise: 0.25,
        units: ActivityUnits::P,
        duplicates: 0,
    };

    /// The bundled 60-molecule toy set in nanomolar (`data/toy60.csv`).
    pub const TOY60: Self = Self {
        n: 60,
        seed: 60,
        noise: 0.25,
        units: ActivityUnits::Raw,
        duplicates: 6,
    };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthRow {
    pub id: String,
    pub smiles: String,
    pub label: f64,
}

/// Per-family additive effects for a seed.
pub fn effects(seed: u64) -> Vec<f64> {
    let mut r = rng::derive(seed, 1);
    (0..FAMILIES.len()).map(|_| r.random_range(-1.5..1.5)).collect()
}

/// A series core: bridging fragments, each followed by a linker.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Core {
    parts: Vec<(usize, usize)>,
}

fn renumber(fragment: &str, digit: usize) -> String {
    fragment.replace('1', &digit.to_string())
}

fn assemble(core: &Core, terminal: usize) -> String {
    let mut s = String::new();
    for (k, &(fam, link)) in core.parts.iter().enumerate() {
        s.push_str(&renumber(FAMILIES[fam].0, k + 1));
        s.push_str(LINKERS[link]);
    }
    s.push_str(&renumber(FAMILIES[terminal].1, core.parts.len() + 1));
    s
}

/// Rewrites a molecule under a random atom order.
fn rewrite(g: &MolGraph, r: &mut rng::Rng) -> String {
    let mut perm: Vec<usize> = (0..g.atom_count()).collect();
    perm.shuffle(r);
    write_smiles(&g.permuted(&perm))
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

/// Generates `cfg.n` distinct molecules plus `cfg.duplicates` rewritten
/// repeats. Labels are rounded to four decimals.
pub fn generate(cfg: &SynthConfig) -> Vec<SynthRow> {
    let fam = effects(cfg.seed);
    let mut r = rng::derive(cfg.seed, 2);
    let normal = Normal::new(0.0, cfg.noise.max(0.0)).unwrap_or_else(|_| Normal::new(0.0, 0.0).unwrap());
    let to_units = |p: f64| match cfg.units {
        ActivityUnits::P => round4(p),
        ActivityUnits::Raw => round4(10f64.powf(9.0 - p)),
    };
    // about a dozen compounds per series
    let n_cores = (cfg.n / 12).max(4);
    let mut cores = Vec::with_capacity(n_cores);
    while cores.len() < n_cores {
        let len = r.random_range(1..=2);
        let core = Core {
            parts: (0..len)
                .map(|_| (r.random_range(0..FAMILIES.len()), r.random_range(0..LINKERS.len())))
                .collect(),
        };
        if !cores.contains(&core) {
            cores.push(core);
        }
    }
    let mut seen = std::collections::HashSet::new();
    let mut rows = Vec::with_capacity(cfg.n + cfg.duplicates);
    let mut graphs = Vec::new();
    let mut p_values = Vec::new();
    let max_distinct = n_cores * FAMILIES.len();
    while rows.len() < cfg.n.min(max_distinct) {
        let c = r.random_range(0..n_cores);
        let t = r.random_range(0..FAMILIES.len());
        if !seen.insert((c, t)) {
            continue;
        }
        let smiles = assemble(&cores[c], t);
        let g = parse_smiles(&smiles).expect("generator emits valid SMILES");
        let effect: f64 = cores[c].parts.iter().map(|&(f, _)| fam[f]).sum::<f64>() + fam[t];
        let p = 6.0 + effect + normal.sample(&mut r);
        rows.push(SynthRow {
            id: format!("syn{:04}", rows.len()),
            smiles,
            label: to_units(p),
        });
        graphs.push(g);
        p_values.push(p);
    }
    let n = rows.len();
    for d in 0..cfg.duplicates.min(n) {
        let k = r.random_range(0..n);
        let shift = r.random_range(-0.15..0.15);
        rows.push(SynthRow {
            id: format!("syn{:04}", n + d),
            smiles: rewrite(&graphs[k], &mut r),
            label: to_units(p_values[k] + shift),
        });
    }
    rows
}

/// CSV text with header `id,smiles,label`.
pub fn to_csv(rows: &[SynthRow]) -> String {
    let mut out = String::from("id,smiles,label\n");
    for row in rows {
        out.push_str(&format!("{},{},{}\n", row.id, row.smiles, row.label));
    }
    out
}
