//! Element symbols recognised by the parser.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Chemical element, or the `*` attachment point of a repeating unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Element(u8);

const SYMBOLS: [&str; 55] = [
    "*", "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S",
    "Cl", "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge",
    "As", "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd",
    "In", "Sn", "Sb", "Te", "I", "Xe",
];

impl Element {
    pub const WILDCARD: Element = Element(0);
    pub const B: Element = Element(5);
    pub const C: Element = Element(6);
    pub const N: Element = Element(7);
    pub const O: Element = Element(8);
    pub const F: Element = Element(9);
    pub const P: Element = Element(15);
    pub const S: Element = Element(16);
    pub const CL: Element = Element(17);
    pub const BR: Element = Element(35);
    pub const I: Element = Element(53);

    /// Atomic number; 0 for the attachment wildcard.
    pub fn number(self) -> u8 {
        self.0
    }

    pub fn symbol(self) -> &'static str {
        SYMBOLS[self.0 as usize]
    }

    pub fn is_wildcard(self) -> bool {
        self.0 == 0
    }

    pub fn from_symbol(sym: &str) -> Option<Element> {
        SYMBOLS
            .iter()
            .position(|s| *s == sym)
            .map(|i| Element(i as u8))
    }

    /// Normal valences used for implicit hydrogens of organic-subset atoms.
    pub(crate) fn default_valences(self) -> &'static [u8] {
        match self.0 {
            5 => &[3],
            6 => &[4],
            7 => &[3, 5],
            8 => &[2],
            15 => &[3, 5],
            16 => &[2, 4, 6],
            9 | 17 | 35 | 53 => &[1],
            _ => &[],
        }
    }

    /// Elements that may appear in lowercase aromatic form.
    pub(crate) fn can_be_aromatic(self) -> bool {
        matches!(self.0, 5 | 6 | 7 | 8 | 15 | 16 | 33 | 34)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbols_round_trip() {
        for (i, s) in SYMBOLS.iter().enumerate() {
            let e = Element::from_symbol(s).unwrap();
            assert_eq!(e.number() as usize, i);
            assert_eq!(e.symbol(), *s);
        }
        assert_eq!(Element::from_symbol("Xx"), None);
        assert_eq!(Element::CL.symbol(), "Cl");
    }
}
