//! Periodic table lookups and default valence rules.

/// Element symbols indexed by atomic number. Index 0 is the wildcard `*`.
const SYMBOLS: [&str; 119] = [
    "*", "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl", "Ar", "K", "Ca",
    "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",
    "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce",
    "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir",
    "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np", "Pu", "Am", "Cm",
    "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc",
    "Lv", "Ts", "Og",
];

pub const WILDCARD: u8 = 0;
pub const HYDROGEN: u8 = 1;
pub const BORON: u8 = 5;
pub const CARBON: u8 = 6;
pub const NITROGEN: u8 = 7;
pub const OXYGEN: u8 = 8;
pub const FLUORINE: u8 = 9;
pub const PHOSPHORUS: u8 = 15;
pub const SULFUR: u8 = 16;
pub const CHLORINE: u8 = 17;
pub const SELENIUM: u8 = 34;
pub const ARSENIC: u8 = 33;
pub const BROMINE: u8 = 35;
pub const IODINE: u8 = 53;

pub fn symbol(element: u8) -> &'static str {
    SYMBOLS.get(element as usize).copied().unwrap_or("?")
}

/// Looks up an element by its exact (case-sensitive) symbol.
pub fn by_symbol(sym: &str) -> Option<u8> {
    SYMBOLS
        .iter()
        .position(|s| *s == sym)
        .filter(|&i| i > 0)
        .map(|i| i as u8)
}

pub fn is_halogen(element: u8) -> bool {
    matches!(element, FLUORINE | CHLORINE | BROMINE | IODINE)
}

/// Elements that may be written without brackets.
pub fn is_organic_subset(element: u8) -> bool {
    matches!(
        element,
        BORON | CARBON | NITROGEN | OXYGEN | PHOSPHORUS | SULFUR | FLUORINE | CHLORINE | BROMINE | IODINE
    )
}

/// Elements that may carry the aromatic flag inside brackets.
pub fn can_be_aromatic(element: u8) -> bool {
    matches!(
        element,
        BORON | CARBON | NITROGEN | OXYGEN | PHOSPHORUS | SULFUR | SELENIUM | ARSENIC
    )
}

/// Organic-subset elements that may be written bare in lowercase.
pub fn is_bare_aromatic(element: u8) -> bool {
    matches!(element, BORON | CARBON | NITROGEN | OXYGEN | PHOSPHORUS | SULFUR)
}

/// Allowed valences for the organic subset, lowest first.
pub fn default_valences(element: u8) -> &'static [u8] {
    match element {
        BORON => &[3],
        CARBON => &[4],
        NITROGEN => &[3, 5],
        OXYGEN => &[2],
        PHOSPHORUS => &[3, 5],
        SULFUR => &[2, 4, 6],
        FLUORINE | CHLORINE | BROMINE | IODINE => &[1],
        _ => &[],
    }
}

/// Implicit hydrogen count of an unbracketed organic-subset atom.
///
/// `bond_sum` counts single, aromatic, double and triple bonds as 1, 1, 2
/// and 3. An aromatic atom contributes one extra unit of valence for its
/// share of the delocalised system. Returns `None` when the bonds exceed the
/// highest allowed valence.
pub fn implicit_hydrogens(element: u8, aromatic: bool, bond_sum: u32) -> Option<u8> {
    let valences = default_valences(element);
    if valences.is_empty() {
        return Some(0);
    }
    let target = bond_sum + u32::from(aromatic);
    if let Some(v) = valences.iter().map(|&v| u32::from(v)).find(|&v| v >= target) {
        return Some((v - target) as u8);
    }
    // aromatic atom with an exocyclic double bond, e.g. the carbonyl carbon of a pyridone
    if aromatic && valences.iter().any(|&v| u32::from(v) >= bond_sum) {
        return Some(0);
    }
    None
}
