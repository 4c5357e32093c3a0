//! SMILES reader for a practical subset of the language.
//!
//! Accepted: the organic subset (`B C N O P S F Cl Br I`, aromatic
//! `b c n o p s`), bracket atoms `[<isotope><symbol><@|@@><Hn><charge>]`,
//! bonds `- = # : / \`, branches and ring bonds `0-9` / `%nn`. Aromaticity is
//! read verbatim from lowercase symbols; there is no kekulisation or
//! perception step. Multi-fragment input (`.`) is rejected.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::elements;
use crate::molgraph::{Atom, Bond, BondDirection, BondOrder, Chirality, MolGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParseErrorKind {
    UnknownSymbol,
    UnbalancedParenthesis,
    UnclosedRing,
    BadBracketAtom,
    ValenceOverflow,
    EmptyInput,
    DisconnectedParts,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ParseErrorKind::UnknownSymbol => "unexpected symbol",
            ParseErrorKind::UnbalancedParenthesis => "unbalanced parenthesis",
            ParseErrorKind::UnclosedRing => "invalid ring bond",
            ParseErrorKind::BadBracketAtom => "malformed bracket atom",
            ParseErrorKind::ValenceOverflow => "valence exceeded",
            ParseErrorKind::EmptyInput => "empty input",
            ParseErrorKind::DisconnectedParts => "multiple fragments",
        };
        f.write_str(s)
    }
}

/// Failure with the 0-based character index in the original input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Accept `*` attachment atoms (used for MMP fragments).
    pub allow_wildcard: bool,
}

/// Parses a single-fragment SMILES string into a [`MolGraph`].
pub fn parse_smiles(input: &str) -> Result<MolGraph, ParseError> {
    parse_smiles_with(input, ParseOptions::default())
}

pub fn parse_smiles_with(input: &str, options: ParseOptions) -> Result<MolGraph, ParseError> {
    let trimmed = input.trim_start();
    let lead = input[..input.len() - trimmed.len()].chars().count();
    let body = trimmed.trim_end();
    if body.is_empty() {
        return Err(ParseError {
            position: 0,
            kind: ParseErrorKind::EmptyInput,
        });
    }
    if let Some(idx) = body.chars().position(|c| !c.is_ascii()) {
        return Err(ParseError {
            position: lead + idx,
            kind: ParseErrorKind::UnknownSymbol,
        });
    }
    Parser {
        s: body.as_bytes(),
        offset: lead,
        options,
        i: 0,
        atoms: Vec::new(),
        atom_pos: Vec::new(),
        bracketed: Vec::new(),
        bonds: Vec::new(),
    }
    .run()
}

#[derive(Clone, Copy)]
struct BondToken {
    order: Option<BondOrder>,
    direction: Option<BondDirection>,
}

impl BondToken {
    fn from_byte(c: u8) -> Option<Self> {
        let (order, direction) = match c {
            b'-' => (BondOrder::Single, None),
            b'=' => (BondOrder::Double, None),
            b'#' => (BondOrder::Triple, None),
            b':' => (BondOrder::Aromatic, None),
            b'/' => (BondOrder::Single, Some(BondDirection::Up)),
            b'\\' => (BondOrder::Single, Some(BondDirection::Down)),
            _ => return None,
        };
        Some(Self {
            order: Some(order),
            direction,
        })
    }

    fn same_as(&self, other: &Self) -> bool {
        self.order == other.order
    }
}

struct RingOpen {
    atom: usize,
    bond: Option<BondToken>,
    position: usize,
}

struct Parser<'a> {
    s: &'a [u8],
    offset: usize,
    options: ParseOptions,
    i: usize,
    atoms: Vec<Atom>,
    atom_pos: Vec<usize>,
    bracketed: Vec<bool>,
    bonds: Vec<Bond>,
}

impl Parser<'_> {
    fn err(&self, at: usize, kind: ParseErrorKind) -> ParseError {
        ParseError {
            position: self.offset + at,
            kind,
        }
    }

    fn run(mut self) -> Result<MolGraph, ParseError> {
        use ParseErrorKind::*;
        let mut prev: Option<usize> = None;
        let mut pending: Option<(BondToken, usize)> = None;
        // (branch point, position of '(', atom count when opened)
        let mut branches: Vec<(usize, usize, usize)> = Vec::new();
        let mut rings: HashMap<u32, RingOpen> = HashMap::new();
        let mut bond_set: std::collections::HashSet<(usize, usize)> = Default::default();

        while self.i < self.s.len() {
            let start = self.i;
            let c = self.s[start];
            if let Some(tok) = BondToken::from_byte(c) {
                if pending.is_some() || prev.is_none() {
                    return Err(self.err(start, UnknownSymbol));
                }
                pending = Some((tok, start));
                self.i += 1;
                continue;
            }
            match c {
                b'(' => {
                    let Some(p) = prev else {
                        return Err(self.err(start, UnbalancedParenthesis));
                    };
                    if let Some((_, at)) = pending {
                        return Err(self.err(at, UnknownSymbol));
                    }
                    branches.push((p, start, self.atoms.len()));
                    self.i += 1;
                }
                b')' => {
                    let Some((p, _, count)) = branches.pop() else {
                        return Err(self.err(start, UnbalancedParenthesis));
                    };
                    if let Some((_, at)) = pending {
                        return Err(self.err(at, UnknownSymbol));
                    }
                    if self.atoms.len() == count {
                        return Err(self.err(start, UnbalancedParenthesis));
                    }
                    prev = Some(p);
                    self.i += 1;
                }
                b'.' => return Err(self.err(start, DisconnectedParts)),
                b'0'..=b'9' | b'%' => {
                    let number = self.ring_number()?;
                    let Some(atom) = prev else {
                        return Err(self.err(start, UnclosedRing));
                    };
                    let here = pending.take().map(|(t, _)| t);
                    match rings.remove(&number) {
                        Some(open) => {
                            let tok = match (open.bond, here) {
                                (Some(a), Some(b)) if !a.same_as(&b) => return Err(self.err(start, UnclosedRing)),
                                (Some(a), _) => Some(a),
                                (None, b) => b,
                            };
                            if open.atom == atom || !bond_set.insert((open.atom.min(atom), open.atom.max(atom))) {
                                return Err(self.err(start, UnclosedRing));
                            }
                            self.add_bond(open.atom, atom, tok);
                        }
                        None => {
                            rings.insert(
                                number,
                                RingOpen {
                                    atom,
                                    bond: here,
                                    position: start,
                                },
                            );
                        }
                    }
                }
                _ => {
                    let atom = self.atom()?;
                    if let Some(p) = prev {
                        bond_set.insert((p.min(atom), p.max(atom)));
                        self.add_bond(p, atom, pending.take().map(|(t, _)| t));
                    } else if let Some((_, at)) = pending {
                        return Err(self.err(at, UnknownSymbol));
                    }
                    prev = Some(atom);
                }
            }
        }

        if let Some((_, at)) = pending {
            return Err(self.err(at, UnknownSymbol));
        }
        if let Some(&(_, at, _)) = branches.first() {
            return Err(self.err(at, UnbalancedParenthesis));
        }
        if let Some(open) = rings.values().min_by_key(|r| r.position) {
            return Err(self.err(open.position, UnclosedRing));
        }
        self.assign_hydrogens()?;
        MolGraph::new(self.atoms, self.bonds).map_err(|_| ParseError {
            position: self.offset,
            kind: DisconnectedParts,
        })
    }

    fn add_bond(&mut self, a: usize, b: usize, tok: Option<BondToken>) {
        let both_aromatic = self.atoms[a].aromatic && self.atoms[b].aromatic;
        let order = tok.and_then(|t| t.order).unwrap_or(if both_aromatic {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        });
        let mut bond = Bond::new(a, b, order);
        bond.direction = tok.and_then(|t| t.direction);
        self.bonds.push(bond);
    }

    fn ring_number(&mut self) -> Result<u32, ParseError> {
        let start = self.i;
        let c = self.s[start];
        if c == b'%' {
            let digits = self.s.get(start + 1..start + 3);
            match digits {
                Some(d) if d.iter().all(u8::is_ascii_digit) => {
                    self.i += 3;
                    Ok(u32::from(d[0] - b'0') * 10 + u32::from(d[1] - b'0'))
                }
                _ => Err(self.err(start, ParseErrorKind::UnclosedRing)),
            }
        } else {
            self.i += 1;
            Ok(u32::from(c - b'0'))
        }
    }

    fn push_atom(&mut self, atom: Atom, at: usize, bracketed: bool) -> usize {
        self.atoms.push(atom);
        self.atom_pos.push(at);
        self.bracketed.push(bracketed);
        self.atoms.len() - 1
    }

    fn atom(&mut self) -> Result<usize, ParseError> {
        let start = self.i;
        let c = self.s[start];
        let next = self.s.get(start + 1).copied();
        let (element, aromatic, len) = match (c, next) {
            (b'[', _) => return self.bracket_atom(),
            (b'*', _) if self.options.allow_wildcard => (elements::WILDCARD, false, 1),
            (b'C', Some(b'l')) => (elements::CHLORINE, false, 2),
            (b'B', Some(b'r')) => (elements::BROMINE, false, 2),
            (b'B' | b'C' | b'N' | b'O' | b'P' | b'S' | b'F' | b'I', _) => {
                let z = elements::by_symbol(std::str::from_utf8(&[c]).unwrap_or("")).unwrap_or(0);
                (z, false, 1)
            }
            (b'b' | b'c' | b'n' | b'o' | b'p' | b's', _) => {
                let up = [c.to_ascii_uppercase()];
                let z = elements::by_symbol(std::str::from_utf8(&up).unwrap_or("")).unwrap_or(0);
                (z, true, 1)
            }
            _ => return Err(self.err(start, ParseErrorKind::UnknownSymbol)),
        };
        self.i += len;
        Ok(self.push_atom(Atom::new(element).aromatic(aromatic), start, false))
    }

    fn bracket_atom(&mut self) -> Result<usize, ParseError> {
        let open = self.i;
        let bad = |p: &Self| p.err(open, ParseErrorKind::BadBracketAtom);
        let Some(close_rel) = self.s[open..].iter().position(|&b| b == b']') else {
            return Err(bad(self));
        };
        let body = &self.s[open + 1..open + close_rel];
        let mut k = 0;

        let digits = body.iter().take_while(|b| b.is_ascii_digit()).count();
        let isotope = if digits > 0 {
            let text = std::str::from_utf8(&body[..digits]).unwrap_or("");
            k = digits;
            Some(text.parse::<u16>().map_err(|_| bad(self))?)
        } else {
            None
        };

        let (element, aromatic) = match body.get(k) {
            Some(b'*') if self.options.allow_wildcard => {
                k += 1;
                (elements::WILDCARD, false)
            }
            Some(c) if c.is_ascii_uppercase() => {
                let two = body
                    .get(k..k + 2)
                    .filter(|t| t[1].is_ascii_lowercase())
                    .and_then(|t| std::str::from_utf8(t).ok())
                    .and_then(elements::by_symbol);
                if let Some(z) = two {
                    k += 2;
                    (z, false)
                } else {
                    let one = std::str::from_utf8(&body[k..k + 1])
                        .ok()
                        .and_then(elements::by_symbol)
                        .ok_or_else(|| bad(self))?;
                    k += 1;
                    (one, false)
                }
            }
            Some(c) if c.is_ascii_lowercase() => {
                let two = body.get(k..k + 2).filter(|t| *t == b"se" || *t == b"as");
                let len = if two.is_some() { 2 } else { 1 };
                let upper: String = std::str::from_utf8(&body[k..k + len])
                    .unwrap_or("")
                    .to_ascii_uppercase();
                let upper = if len == 2 {
                    format!("{}{}", &upper[..1], upper[1..].to_ascii_lowercase())
                } else {
                    upper
                };
                let z = elements::by_symbol(&upper)
                    .filter(|&z| elements::can_be_aromatic(z))
                    .ok_or_else(|| bad(self))?;
                k += len;
                (z, true)
            }
            _ => return Err(bad(self)),
        };

        let mut stereo = None;
        if body.get(k) == Some(&b'@') {
            if body.get(k + 1) == Some(&b'@') {
                stereo = Some(Chirality::Clockwise);
                k += 2;
            } else {
                stereo = Some(Chirality::CounterClockwise);
                k += 1;
            }
        }

        let mut h_count = 0u8;
        if body.get(k) == Some(&b'H') {
            k += 1;
            h_count = 1;
            if let Some(&d) = body.get(k).filter(|b| b.is_ascii_digit()) {
                h_count = d - b'0';
                k += 1;
            }
        }

        let mut charge = 0i32;
        if let Some(&sign) = body.get(k).filter(|&&b| b == b'+' || b == b'-') {
            let unit = if sign == b'+' { 1 } else { -1 };
            k += 1;
            let digits = body[k..].iter().take_while(|b| b.is_ascii_digit()).count();
            if digits > 0 {
                let text = std::str::from_utf8(&body[k..k + digits]).unwrap_or("");
                let magnitude: i32 = text.parse().map_err(|_| bad(self))?;
                charge = unit * magnitude;
                k += digits;
            } else {
                charge = unit;
                while body.get(k) == Some(&sign) {
                    charge += unit;
                    k += 1;
                }
            }
        }

        if k != body.len() || h_count > 8 || charge.abs() > 4 {
            return Err(bad(self));
        }
        if element == elements::WILDCARD && (h_count > 0 || charge != 0 || isotope.is_some()) {
            return Err(bad(self));
        }
        let atom = Atom {
            element,
            formal_charge: charge as i8,
            h_count,
            aromatic,
            isotope,
            stereo,
        };
        self.i = open + close_rel + 1;
        Ok(self.push_atom(atom, open, true))
    }

    fn assign_hydrogens(&mut self) -> Result<(), ParseError> {
        let mut bond_sum = vec![0u32; self.atoms.len()];
        for b in &self.bonds {
            bond_sum[b.a] += b.order.valence();
            bond_sum[b.b] += b.order.valence();
        }
        for idx in 0..self.atoms.len() {
            if self.bracketed[idx] || self.atoms[idx].is_wildcard() {
                continue;
            }
            let a = &self.atoms[idx];
            let h = elements::implicit_hydrogens(a.element, a.aromatic, bond_sum[idx])
                .ok_or_else(|| self.err(self.atom_pos[idx], ParseErrorKind::ValenceOverflow))?;
            self.atoms[idx].h_count = h;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ParseErrorKind::*;

    fn kind(s: &str) -> (ParseErrorKind, usize) {
        let e = parse_smiles(s).unwrap_err();
        (e.kind, e.position)
    }

    #[test]
    fn ethanol() {
        let g = parse_smiles("CCO").unwrap();
        let elems: Vec<u8> = g.atoms().iter().map(|a| a.element).collect();
        let hs: Vec<u8> = g.atoms().iter().map(|a| a.h_count).collect();
        assert_eq!(elems, vec![6, 6, 8]);
        assert_eq!(hs, vec![3, 2, 1]);
        assert_eq!(g.bond_count(), 2);
        assert!(g.bonds().iter().all(|b| b.order == BondOrder::Single));
    }

    #[test]
    fn cyclopropane_and_benzene() {
        let g = parse_smiles("C1CC1").unwrap();
        assert!(g.ring_atoms().iter().all(|&r| r));
        assert!(g.ring_bonds().iter().all(|&r| r));
        let b = parse_smiles("c1ccccc1").unwrap();
        assert_eq!(b.atom_count(), 6);
        assert_eq!(b.bond_count(), 6);
        assert!(b.atoms().iter().all(|a| a.aromatic && a.h_count == 1));
        assert!(b.bonds().iter().all(|x| x.order == BondOrder::Aromatic));
    }

    #[test]
    fn error_kinds_and_positions() {
        assert_eq!(kind("C("), (UnbalancedParenthesis, 1));
        assert_eq!(kind("CC)"), (UnbalancedParenthesis, 2));
        assert_eq!(kind("C()C"), (UnbalancedParenthesis, 2));
        assert_eq!(kind("(C)"), (UnbalancedParenthesis, 0));
        assert_eq!(kind("C1CC"), (UnclosedRing, 1));
        assert_eq!(kind("C11"), (UnclosedRing, 2));
        assert_eq!(kind("C12CC12"), (UnclosedRing, 6));
        assert_eq!(kind("C=1CC#1"), (UnclosedRing, 6));
        assert_eq!(kind("CXC"), (UnknownSymbol, 1));
        assert_eq!(kind("C*"), (UnknownSymbol, 1));
        assert_eq!(kind("C=="), (UnknownSymbol, 2));
        assert_eq!(kind("C="), (UnknownSymbol, 1));
        assert_eq!(kind("=C"), (UnknownSymbol, 0));
        assert_eq!(kind("Cé"), (UnknownSymbol, 1));
        assert_eq!(kind("C[Xx]"), (BadBracketAtom, 1));
        assert_eq!(kind("C[C"), (BadBracketAtom, 1));
        assert_eq!(kind("[CH9]"), (BadBracketAtom, 0));
        assert_eq!(kind("[C+5]"), (BadBracketAtom, 0));
        assert_eq!(kind("[c@TH1]"), (BadBracketAtom, 0));
        assert_eq!(kind("O=O=O"), (ValenceOverflow, 2));
        assert_eq!(kind("FC(F)(F)(F)F"), (ValenceOverflow, 1));
        assert_eq!(kind("   "), (EmptyInput, 0));
        assert_eq!(kind(""), (EmptyInput, 0));
        assert_eq!(kind("CC.O"), (DisconnectedParts, 2));
        assert_eq!(kind("  C("), (UnbalancedParenthesis, 3));
    }

    #[test]
    fn bracket_atoms() {
        let g = parse_smiles("[13CH3][C@@H](N)[O-]").unwrap();
        assert_eq!(g.atom(0).isotope, Some(13));
        assert_eq!(g.atom(0).h_count, 3);
        assert_eq!(g.atom(1).stereo, Some(Chirality::Clockwise));
        assert_eq!(g.atom(1).h_count, 1);
        assert_eq!(g.atom(3).formal_charge, -1);
        assert_eq!(g.atom(3).h_count, 0);
        let n = parse_smiles("[nH]1cccc1").unwrap();
        assert!(n.atom(0).aromatic);
        assert_eq!(n.atom(0).h_count, 1);
        assert_eq!(parse_smiles("[Fe++]").unwrap().atom(0).formal_charge, 2);
        assert_eq!(parse_smiles("[Cu+2]").unwrap().atom(0).formal_charge, 2);
        assert_eq!(parse_smiles("C[se]C").unwrap().atom(1).element, elements::SELENIUM);
        assert_eq!(parse_smiles("[H]").unwrap().atom(0).element, elements::HYDROGEN);
        assert_eq!(parse_smiles("ClCBr").unwrap().atom(2).element, elements::BROMINE);
    }

    #[test]
    fn explicit_bonds_and_stereo() {
        let g = parse_smiles("c1ccccc1-c1ccccc1").unwrap();
        assert_eq!(g.bond(5).order, BondOrder::Aromatic);
        let link = g.bond_between(5, 6).unwrap();
        assert_eq!(g.bond(link).order, BondOrder::Single);
        let e = parse_smiles("F/C=C\\F").unwrap();
        assert_eq!(e.bond(0).direction, Some(BondDirection::Up));
        assert_eq!(e.bond(2).direction, Some(BondDirection::Down));
        let r = parse_smiles("C=1CCCCC1").unwrap();
        assert_eq!(r.bond(r.bond_between(0, 5).unwrap()).order, BondOrder::Double);
        assert_eq!(r.atom(0).h_count, 1);
        let pct = parse_smiles("C%12CC%12").unwrap();
        assert_eq!(pct.bond_count(), 3);
        let z = parse_smiles("C0CC0").unwrap();
        assert_eq!(z.bond_count(), 3);
    }

    #[test]
    fn hypervalent_and_pyridone() {
        assert_eq!(parse_smiles("CS(=O)(=O)C").unwrap().atom(1).h_count, 0);
        assert_eq!(parse_smiles("CP(=O)(O)O").unwrap().atom(1).h_count, 0);
        let g = parse_smiles("O=c1cccc[nH]1").unwrap();
        assert_eq!(g.atom(1).h_count, 0);
    }

    #[test]
    fn wildcard_only_when_allowed() {
        let opts = ParseOptions { allow_wildcard: true };
        let g = parse_smiles_with("*CC", opts).unwrap();
        assert!(g.atom(0).is_wildcard());
        assert_eq!(g.atom(0).h_count, 0);
        assert_eq!(g.atom(1).h_count, 2);
        assert!(parse_smiles_with("[*]CC", opts).is_ok());
        assert!(parse_smiles("[*]CC").is_err());
    }
}
