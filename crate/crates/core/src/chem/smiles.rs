//! Parser for the SMILES subset used to write polymer repeating units.
//!
//! Supported: organic-subset atoms (`B C N O P S F Cl Br I`), aromatic
//! lowercase atoms (`b c n o p s`), bracket atoms with hydrogen count and
//! charge, bonds `- = # :`, branches, ring closures `0-9` and `%nn`, and the
//! `*` attachment point. Isotopes, chirality marks and atom classes inside
//! brackets are accepted and dropped.

use std::collections::HashMap;

use super::element::Element;
use super::molecule::{Atom, Bond, BondOrder, Molecule};
use super::ChemError;

struct OpenRing {
    atom: usize,
    order: Option<BondOrder>,
    offset: usize,
}

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    prev: Option<usize>,
    pending: Option<(BondOrder, usize)>,
    branches: Vec<(usize, usize)>,
    rings: HashMap<u32, OpenRing>,
}

pub fn parse_smiles(text: &str) -> Result<Molecule, ChemError> {
    if text.trim().is_empty() {
        return Err(ChemError::EmptyInput);
    }
    let mut p = Parser {
        text,
        bytes: text.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        bonds: Vec::new(),
        prev: None,
        pending: None,
        branches: Vec::new(),
        rings: HashMap::new(),
    };
    p.run()?;
    Molecule::from_parts(p.atoms, p.bonds, text.to_string())
}

impl<'a> Parser<'a> {
    fn run(&mut self) -> Result<(), ChemError> {
        while self.pos < self.bytes.len() {
            let offset = self.pos;
            let c = self.bytes[offset] as char;
            match c {
                '(' => {
                    let Some(prev) = self.prev else {
                        return Err(self.unexpected(offset));
                    };
                    if self.pending.is_some() {
                        return Err(self.unexpected(offset));
                    }
                    self.branches.push((prev, offset));
                    self.pos += 1;
                }
                ')' => {
                    let Some((anchor, _)) = self.branches.pop() else {
                        return Err(self.unexpected(offset));
                    };
                    if self.pending.is_some() || self.prev == Some(anchor) {
                        // dangling bond or empty branch
                        return Err(self.unexpected(offset));
                    }
                    self.prev = Some(anchor);
                    self.pos += 1;
                }
                '-' | '=' | '#' | ':' => {
                    if self.pending.is_some() || self.prev.is_none() {
                        return Err(self.unexpected(offset));
                    }
                    let order = match c {
                        '-' => BondOrder::Single,
                        '=' => BondOrder::Double,
                        '#' => BondOrder::Triple,
                        _ => BondOrder::Aromatic,
                    };
                    self.pending = Some((order, offset));
                    self.pos += 1;
                }
                '0'..='9' => {
                    self.pos += 1;
                    self.ring_closure(c as u32 - '0' as u32, offset)?;
                }
                '%' => {
                    let digits = self.text.get(offset + 1..offset + 3).unwrap_or("");
                    if digits.len() != 2 || !digits.bytes().all(|b| b.is_ascii_digit()) {
                        return Err(self.unexpected(offset));
                    }
                    self.pos += 3;
                    self.ring_closure(digits.parse().unwrap(), offset)?;
                }
                '[' => {
                    let atom = self.bracket_atom()?;
                    self.add_atom(atom, offset)?;
                }
                _ => {
                    let atom = self.organic_atom()?;
                    self.add_atom(atom, offset)?;
                }
            }
        }
        if let Some(&(_, offset)) = self.branches.first() {
            return Err(ChemError::UnclosedBranch { offset });
        }
        if let Some(open) = self.rings.values().min_by_key(|r| r.offset) {
            return Err(ChemError::UnpairedRingClosure {
                offset: open.offset,
            });
        }
        if let Some((_, offset)) = self.pending {
            return Err(self.unexpected(offset));
        }
        Ok(())
    }

    fn unexpected(&self, offset: usize) -> ChemError {
        ChemError::UnexpectedChar {
            offset,
            ch: self.text[offset..].chars().next().unwrap_or('?'),
        }
    }

    fn add_atom(&mut self, atom: Atom, offset: usize) -> Result<(), ChemError> {
        let idx = self.atoms.len();
        self.atoms.push(atom);
        if let Some(prev) = self.prev {
            let explicit = self.pending.take();
            let order = self.bond_order(prev, idx, explicit.map(|p| p.0), offset)?;
            self.bonds.push(Bond {
                a: prev,
                b: idx,
                order,
            });
        } else if self.pending.is_some() {
            return Err(self.unexpected(offset));
        }
        self.prev = Some(idx);
        Ok(())
    }

    fn bond_order(
        &self,
        a: usize,
        b: usize,
        explicit: Option<BondOrder>,
        offset: usize,
    ) -> Result<BondOrder, ChemError> {
        let both_aromatic = self.atoms[a].aromatic && self.atoms[b].aromatic;
        match explicit {
            Some(BondOrder::Aromatic) if !both_aromatic => Err(ChemError::InvalidBond {
                offset,
                reason: "aromatic bond between non-aromatic atoms".into(),
            }),
            Some(order) => Ok(order),
            None if both_aromatic => Ok(BondOrder::Aromatic),
            None => Ok(BondOrder::Single),
        }
    }

    fn ring_closure(&mut self, label: u32, offset: usize) -> Result<(), ChemError> {
        let Some(prev) = self.prev else {
            return Err(self.unexpected(offset));
        };
        let here = self.pending.take().map(|p| p.0);
        match self.rings.remove(&label) {
            None => {
                self.rings.insert(
                    label,
                    OpenRing {
                        atom: prev,
                        order: here,
                        offset,
                    },
                );
            }
            Some(open) => {
                let explicit = match (open.order, here) {
                    (Some(x), Some(y)) if x != y => {
                        return Err(ChemError::InvalidBond {
                            offset,
                            reason: "ring closure bond orders disagree".into(),
                        })
                    }
                    (x, y) => x.or(y),
                };
                if open.atom == prev || self.bonds.iter().any(|b| b.other(prev) == Some(open.atom))
                {
                    return Err(ChemError::InvalidBond {
                        offset,
                        reason: "ring closure duplicates an existing bond".into(),
                    });
                }
                let order = self.bond_order(open.atom, prev, explicit, offset)?;
                self.bonds.push(Bond {
                    a: open.atom,
                    b: prev,
                    order,
                });
            }
        }
        Ok(())
    }

    fn organic_atom(&mut self) -> Result<Atom, ChemError> {
        let offset = self.pos;
        let rest = &self.text[offset..];
        let (symbol, aromatic, len) = if rest.starts_with("Cl") {
            ("Cl", false, 2)
        } else if rest.starts_with("Br") {
            ("Br", false, 2)
        } else {
            match self.bytes[offset] {
                b'*' => ("*", false, 1),
                b'B' => ("B", false, 1),
                b'C' => ("C", false, 1),
                b'N' => ("N", false, 1),
                b'O' => ("O", false, 1),
                b'P' => ("P", false, 1),
                b'S' => ("S", false, 1),
                b'F' => ("F", false, 1),
                b'I' => ("I", false, 1),
                b'b' => ("B", true, 1),
                b'c' => ("C", true, 1),
                b'n' => ("N", true, 1),
                b'o' => ("O", true, 1),
                b'p' => ("P", true, 1),
                b's' => ("S", true, 1),
                b if b.is_ascii_alphabetic() => {
                    let end = rest
                        .char_indices()
                        .skip(1)
                        .find(|(_, ch)| !ch.is_ascii_lowercase())
                        .map_or(rest.len(), |(i, _)| i);
                    return Err(ChemError::UnknownElement {
                        offset,
                        symbol: rest[..end.min(2)].to_string(),
                    });
                }
                _ => return Err(self.unexpected(offset)),
            }
        };
        self.pos += len;
        Ok(Atom {
            element: Element::from_symbol(symbol).expect("organic subset symbol"),
            aromatic,
            formal_charge: 0,
            explicit_h: None,
            ring_member: false,
            degree: 0,
        })
    }

    fn bracket_atom(&mut self) -> Result<Atom, ChemError> {
        let open = self.pos;
        let Some(close_rel) = self.text[open..].find(']') else {
            return Err(ChemError::UnclosedBracket { offset: open });
        };
        let close = open + close_rel;
        let body = &self.text[open + 1..close];
        let b = body.as_bytes();
        let mut i = 0;

        while i < b.len() && b[i].is_ascii_digit() {
            i += 1; // isotope
        }
        let sym_at = open + 1 + i;
        let (element, aromatic) = if i < b.len() && b[i] == b'*' {
            i += 1;
            (Element::WILDCARD, false)
        } else if i < b.len() && b[i].is_ascii_uppercase() {
            let two = body.get(i..i + 2).and_then(|s| {
                let bs = s.as_bytes();
                if bs[1].is_ascii_lowercase() {
                    Element::from_symbol(s)
                } else {
                    None
                }
            });
            if let Some(e) = two {
                i += 2;
                (e, false)
            } else {
                let s = &body[i..i + 1];
                i += 1;
                match Element::from_symbol(s) {
                    Some(e) => (e, false),
                    None => {
                        return Err(ChemError::UnknownElement {
                            offset: sym_at,
                            symbol: s.to_string(),
                        })
                    }
                }
            }
        } else if i < b.len() && b[i].is_ascii_lowercase() {
            let two = body.get(i..i + 2).filter(|s| *s == "se" || *s == "as");
            let sym = match two {
                Some(s) => s.to_string(),
                None => body[i..i + 1].to_string(),
            };
            let mut cap = sym.clone();
            cap[..1].make_ascii_uppercase();
            match Element::from_symbol(&cap).filter(|e| e.can_be_aromatic()) {
                Some(e) => {
                    i += sym.len();
                    (e, true)
                }
                None => {
                    return Err(ChemError::UnknownElement {
                        offset: sym_at,
                        symbol: sym,
                    })
                }
            }
        } else {
            return Err(ChemError::UnknownElement {
                offset: sym_at,
                symbol: String::new(),
            });
        };

        while i < b.len() && b[i] == b'@' {
            i += 1; // chirality
        }
        let mut h = 0u8;
        if i < b.len() && b[i] == b'H' {
            i += 1;
            h = 1;
            if i < b.len() && b[i].is_ascii_digit() {
                h = b[i] - b'0';
                i += 1;
            }
        }
        let mut charge: i8 = 0;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            let sign: i8 = if b[i] == b'+' { 1 } else { -1 };
            let sign_char = b[i];
            i += 1;
            if i < b.len() && b[i].is_ascii_digit() {
                let start = i;
                while i < b.len() && b[i].is_ascii_digit() {
                    i += 1;
                }
                let mag: i8 = body[start..i]
                    .parse()
                    .map_err(|_| self.unexpected(open + 1 + start))?;
                charge = sign * mag;
            } else {
                charge = sign;
                while i < b.len() && b[i] == sign_char {
                    charge += sign;
                    i += 1;
                }
            }
        }
        if i < b.len() && b[i] == b':' {
            i += 1;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1; // atom class
            }
        }
        if i != b.len() {
            return Err(self.unexpected(open + 1 + i));
        }
        if element.is_wildcard() && (charge != 0 || h != 0) {
            return Err(ChemError::InvalidAtom {
                offset: open,
                reason: "attachment point cannot carry charge or hydrogens".into(),
            });
        }
        self.pos = close + 1;
        Ok(Atom {
            element,
            aromatic,
            formal_charge: charge,
            explicit_h: Some(h),
            ring_member: false,
            degree: 0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(m: &Molecule, sym: &str) -> usize {
        m.atoms.iter().filter(|a| a.element.symbol() == sym).count()
    }

    #[test]
    fn single_atom() {
        let m = parse_smiles("C").unwrap();
        assert_eq!(m.atom_count(), 1);
        assert_eq!(m.bond_count(), 0);
        assert_eq!(m.hydrogen_count(0), 4);
    }

    #[test]
    fn polyethylene_unit() {
        let m = parse_smiles("*CC*").unwrap();
        assert_eq!(m.atom_count(), 4);
        assert_eq!(count(&m, "C"), 2);
        assert_eq!(count(&m, "*"), 2);
        assert_eq!(m.bond_count(), 3);
        assert!(m.bonds.iter().all(|b| b.order == BondOrder::Single));
        let chain: Vec<_> = m.bonds.iter().map(|b| (b.a, b.b)).collect();
        assert_eq!(chain, vec![(0, 1), (1, 2), (2, 3)]);
        assert_eq!(m.hydrogen_count(1), 2);
    }

    #[test]
    fn methyl_acetate() {
        // C0 C1 (=O2) O3 C4
        let m = parse_smiles("CC(=O)OC").unwrap();
        assert_eq!(m.atom_count(), 5);
        assert_eq!(count(&m, "C"), 3);
        assert_eq!(count(&m, "O"), 2);
        assert_eq!(m.bond_count(), 4);
        let doubles: Vec<_> = m
            .bonds
            .iter()
            .filter(|b| b.order == BondOrder::Double)
            .collect();
        assert_eq!(doubles.len(), 1);
        assert_eq!((doubles[0].a, doubles[0].b), (1, 2));
        assert_eq!(m.atoms[1].degree, 3);
        assert_eq!(m.hydrogen_count(1), 0);
        assert_eq!(m.hydrogen_count(2), 0);
        assert_eq!(m.hydrogen_count(4), 3);
    }

    #[test]
    fn unclosed_branch_offset() {
        assert_eq!(
            parse_smiles("C(").unwrap_err(),
            ChemError::UnclosedBranch { offset: 1 }
        );
        assert_eq!(
            parse_smiles("CC(C(O)C").unwrap_err(),
            ChemError::UnclosedBranch { offset: 2 }
        );
    }

    #[test]
    fn error_kinds() {
        assert_eq!(parse_smiles("").unwrap_err(), ChemError::EmptyInput);
        assert_eq!(parse_smiles("  ").unwrap_err(), ChemError::EmptyInput);
        assert_eq!(
            parse_smiles("C1CC").unwrap_err(),
            ChemError::UnpairedRingClosure { offset: 1 }
        );
        assert!(matches!(
            parse_smiles("CXC").unwrap_err(),
            ChemError::UnknownElement { offset: 1, .. }
        ));
        assert!(matches!(
            parse_smiles("C[Qq]").unwrap_err(),
            ChemError::UnknownElement { offset: 2, .. }
        ));
        assert!(matches!(
            parse_smiles("C)").unwrap_err(),
            ChemError::UnexpectedChar { offset: 1, ch: ')' }
        ));
        assert!(matches!(
            parse_smiles("C1C1").unwrap_err(),
            ChemError::InvalidBond { .. }
        ));
        assert!(matches!(
            parse_smiles("C:C").unwrap_err(),
            ChemError::InvalidBond { .. }
        ));
        assert!(matches!(
            parse_smiles("CC=").unwrap_err(),
            ChemError::UnexpectedChar { offset: 2, .. }
        ));
        assert!(matches!(
            parse_smiles("C[CH2").unwrap_err(),
            ChemError::UnclosedBracket { offset: 1 }
        ));
        assert!(matches!(
            parse_smiles("[*+]C").unwrap_err(),
            ChemError::InvalidAtom { .. }
        ));
    }

    #[test]
    fn aromatic_ring() {
        let m = parse_smiles("c1ccccc1O").unwrap();
        assert_eq!(m.atom_count(), 7);
        assert_eq!(m.bond_count(), 7);
        let aromatic = m
            .bonds
            .iter()
            .filter(|b| b.order == BondOrder::Aromatic)
            .count();
        assert_eq!(aromatic, 6);
        assert!(m.atoms[..6].iter().all(|a| a.ring_member && a.aromatic));
        assert!(!m.atoms[6].ring_member);
        assert_eq!(m.hydrogen_count(1), 1);
        assert_eq!(m.hydrogen_count(5), 0);
        assert_eq!(m.hydrogen_count(6), 1);
    }

    #[test]
    fn bracket_atoms() {
        let m = parse_smiles("[NH4+]").unwrap();
        assert_eq!(m.atoms[0].formal_charge, 1);
        assert_eq!(m.hydrogen_count(0), 4);
        let m = parse_smiles("C[O-]").unwrap();
        assert_eq!(m.atoms[1].formal_charge, -1);
        assert_eq!(m.hydrogen_count(1), 0);
        let m = parse_smiles("[Fe++]").unwrap();
        assert_eq!(m.atoms[0].formal_charge, 2);
        let m = parse_smiles("c1cc[nH]c1").unwrap();
        assert!(m.atoms[3].aromatic);
        assert_eq!(m.hydrogen_count(3), 1);
        let m = parse_smiles("[13CH3:2][*]").unwrap();
        assert_eq!(m.atom_count(), 2);
        assert!(m.atoms[1].element.is_wildcard());
        let m = parse_smiles("[Si](C)(C)O").unwrap();
        assert_eq!(m.atoms[0].element.symbol(), "Si");
        assert_eq!(m.atoms[0].degree, 3);
    }

    #[test]
    fn percent_ring_and_explicit_ring_bond() {
        let m = parse_smiles("C%12CCC%12").unwrap();
        assert_eq!(m.bond_count(), 4);
        assert!(m.atoms.iter().all(|a| a.ring_member));
        let m = parse_smiles("C=1CCC1").unwrap();
        let closing = m.bonds.last().unwrap();
        assert_eq!(closing.order, BondOrder::Double);
    }

    #[test]
    fn halogens_and_two_letter() {
        let m = parse_smiles("*CC(*)Cl").unwrap();
        assert_eq!(m.atom_count(), 5);
        assert_eq!(count(&m, "Cl"), 1);
        let m = parse_smiles("BrCCBr").unwrap();
        assert_eq!(count(&m, "Br"), 2);
    }
}
