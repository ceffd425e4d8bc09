//! Molecular graphs of repeating units, circular fingerprints, and the
//! structure edits used by the interpretability workflow.

mod element;
mod fingerprint;
mod molecule;
mod smiles;

use std::collections::BTreeSet;

use thiserror::Error;

pub use element::Element;
pub use fingerprint::{
    atom_invariants, canonical_pair_order, ecfp_explained, ecfp_fingerprint, tanimoto, BitOrigin,
    Fingerprint, FingerprintParams, PairOrder, DEFAULT_RADIUS, DEFAULT_WIDTH,
};
pub use molecule::{Atom, Bond, BondOrder, Molecule};
pub use smiles::parse_smiles;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChemError {
    #[error("empty SMILES")]
    EmptyInput,
    #[error("unclosed branch opened at offset {offset}")]
    UnclosedBranch { offset: usize },
    #[error("unclosed bracket atom at offset {offset}")]
    UnclosedBracket { offset: usize },
    #[error("ring closure at offset {offset} is never paired")]
    UnpairedRingClosure { offset: usize },
    #[error("unknown element '{symbol}' at offset {offset}")]
    UnknownElement { offset: usize, symbol: String },
    #[error("unexpected '{ch}' at offset {offset}")]
    UnexpectedChar { offset: usize, ch: char },
    #[error("invalid bond at offset {offset}: {reason}")]
    InvalidBond { offset: usize, reason: String },
    #[error("invalid atom at offset {offset}: {reason}")]
    InvalidAtom { offset: usize, reason: String },
    #[error("invalid molecular graph: {0}")]
    InvalidGraph(String),
    #[error("index {index} out of range for {len} entries")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("edit would delete every atom")]
    EmptyResult,
    #[error("fingerprint widths differ ({left} vs {right})")]
    WidthMismatch { left: usize, right: usize },
    #[error("fingerprint width {0} is not a power of two")]
    InvalidWidth(usize),
}

/// Removes the given atoms from a molecule. See [`Molecule::delete_atoms`].
pub fn delete_atoms(m: &Molecule, victims: &BTreeSet<usize>) -> Result<Molecule, ChemError> {
    m.delete_atoms(victims)
}

/// Parses and fingerprints in one step.
pub fn fingerprint_smiles(
    smiles: &str,
    params: FingerprintParams,
) -> Result<Fingerprint, ChemError> {
    ecfp_fingerprint(&parse_smiles(smiles)?, params.radius, params.width)
}
