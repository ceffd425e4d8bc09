use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::element::Element;
use super::ChemError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Bond order in half-units, so aromatic bonds count 1.5.
    pub(crate) fn half_units(self) -> u32 {
        match self {
            BondOrder::Single => 2,
            BondOrder::Double => 4,
            BondOrder::Triple => 6,
            BondOrder::Aromatic => 3,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub element: Element,
    pub aromatic: bool,
    pub formal_charge: i8,
    /// Hydrogen count written in a bracket atom; `None` for organic-subset atoms.
    pub explicit_h: Option<u8>,
    pub ring_member: bool,
    pub degree: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

impl Bond {
    pub fn other(&self, atom: usize) -> Option<usize> {
        if self.a == atom {
            Some(self.b)
        } else if self.b == atom {
            Some(self.a)
        } else {
            None
        }
    }
}

/// Molecular graph of a repeating unit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Molecule {
    pub atoms: Vec<Atom>,
    pub bonds: Vec<Bond>,
    /// SMILES the graph was parsed from. Edited molecules keep their parent's text.
    pub source_text: String,
}

impl Molecule {
    /// Builds a molecule from raw parts, filling in `degree` and `ring_member`
    /// from the bond list and checking the graph invariants.
    pub(crate) fn from_parts(
        mut atoms: Vec<Atom>,
        bonds: Vec<Bond>,
        source_text: String,
    ) -> Result<Molecule, ChemError> {
        let mut seen = HashSet::new();
        for bond in &bonds {
            if bond.a == bond.b || bond.a >= atoms.len() || bond.b >= atoms.len() {
                return Err(ChemError::InvalidGraph(format!(
                    "bond {}-{} does not join two distinct atoms",
                    bond.a, bond.b
                )));
            }
            if !seen.insert((bond.a.min(bond.b), bond.a.max(bond.b))) {
                return Err(ChemError::InvalidGraph(format!(
                    "duplicate bond {}-{}",
                    bond.a, bond.b
                )));
            }
        }
        for atom in atoms.iter_mut() {
            atom.degree = 0;
            atom.ring_member = false;
        }
        for bond in &bonds {
            atoms[bond.a].degree += 1;
            atoms[bond.b].degree += 1;
        }
        let mut mol = Molecule {
            atoms,
            bonds,
            source_text,
        };
        for (a, b) in mol.ring_bonds() {
            mol.atoms[a].ring_member = true;
            mol.atoms[b].ring_member = true;
        }
        Ok(mol)
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    /// `(neighbor, order)` pairs for every bond incident to `atom`.
    pub fn neighbors(&self, atom: usize) -> impl Iterator<Item = (usize, BondOrder)> + '_ {
        self.bonds
            .iter()
            .filter_map(move |b| b.other(atom).map(|n| (n, b.order)))
    }

    pub(crate) fn adjacency(&self) -> Vec<Vec<(usize, BondOrder)>> {
        let mut adj = vec![Vec::new(); self.atoms.len()];
        for bond in &self.bonds {
            adj[bond.a].push((bond.b, bond.order));
            adj[bond.b].push((bond.a, bond.order));
        }
        adj
    }

    /// Total hydrogens on an atom: the bracket count when written, otherwise
    /// the implicit count from the lowest normal valence that fits the bonds.
    pub fn hydrogen_count(&self, atom: usize) -> u8 {
        let a = &self.atoms[atom];
        if let Some(h) = a.explicit_h {
            return h;
        }
        if a.element.is_wildcard() {
            return 0;
        }
        let used: u32 = self.neighbors(atom).map(|(_, o)| o.half_units()).sum();
        let valences = a.element.default_valences();
        let Some(&valence) = valences
            .iter()
            .find(|&&v| 2 * u32::from(v) >= used)
            .or(valences.last())
        else {
            return 0;
        };
        let free = (2 * u32::from(valence)).saturating_sub(used);
        (free / 2) as u8
    }

    /// Bonds lying on at least one cycle (non-bridges), as `(a, b)` pairs.
    fn ring_bonds(&self) -> Vec<(usize, usize)> {
        let adj = self.adjacency();
        let n = self.atoms.len();
        let mut out = Vec::new();
        for bond in &self.bonds {
            // b is reachable from a without this bond iff the bond closes a cycle
            let mut seen = vec![false; n];
            let mut stack = vec![bond.a];
            seen[bond.a] = true;
            let mut found = false;
            while let Some(u) = stack.pop() {
                for &(v, _) in &adj[u] {
                    if (u == bond.a && v == bond.b) || (u == bond.b && v == bond.a) {
                        continue;
                    }
                    if v == bond.b {
                        found = true;
                        break;
                    }
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
                if found {
                    break;
                }
            }
            if found {
                out.push((bond.a, bond.b));
            }
        }
        out
    }

    /// Removes `victims` and every incident bond, compacting the remaining
    /// indices in their original order. Degrees, ring membership and implicit
    /// hydrogens of the survivors are recomputed.
    pub fn delete_atoms(&self, victims: &BTreeSet<usize>) -> Result<Molecule, ChemError> {
        if let Some(&bad) = victims.iter().find(|&&v| v >= self.atoms.len()) {
            return Err(ChemError::IndexOutOfRange {
                index: bad,
                len: self.atoms.len(),
            });
        }
        if victims.len() == self.atoms.len() {
            return Err(ChemError::EmptyResult);
        }
        let mut remap = vec![usize::MAX; self.atoms.len()];
        let mut atoms = Vec::with_capacity(self.atoms.len() - victims.len());
        for (i, atom) in self.atoms.iter().enumerate() {
            if !victims.contains(&i) {
                remap[i] = atoms.len();
                atoms.push(atom.clone());
            }
        }
        let bonds = self
            .bonds
            .iter()
            .filter(|b| !victims.contains(&b.a) && !victims.contains(&b.b))
            .map(|b| Bond {
                a: remap[b.a],
                b: remap[b.b],
                order: b.order,
            })
            .collect();
        Molecule::from_parts(atoms, bonds, self.source_text.clone())
    }
}
