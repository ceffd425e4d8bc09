//! Circular (ECFP-style) fingerprints.
//!
//! Every atom starts from a hash of its local invariants. Each round rehashes
//! the atom's identifier together with the sorted `(bond order, neighbor id)`
//! pairs of its neighbors. Every identifier from every round, round 0
//! included, sets bit `id % width`.
//!
//! Hashing is 64-bit FNV-1a over a little-endian byte encoding, so the bits
//! are identical on every platform.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::molecule::Molecule;
use super::ChemError;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub const DEFAULT_WIDTH: usize = 2048;
pub const DEFAULT_RADIUS: u32 = 2;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Fnv1a(u64);

impl Fnv1a {
    pub(crate) fn new() -> Self {
        Fnv1a(FNV_OFFSET)
    }

    pub(crate) fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(FNV_PRIME);
        }
    }

    pub(crate) fn finish(self) -> u64 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FingerprintParams {
    pub radius: u32,
    pub width: usize,
}

impl Default for FingerprintParams {
    fn default() -> Self {
        FingerprintParams {
            radius: DEFAULT_RADIUS,
            width: DEFAULT_WIDTH,
        }
    }
}

/// Fixed-width bit vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    words: Vec<u64>,
    width: usize,
    radius: u32,
}

impl fmt::Debug for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fingerprint")
            .field("width", &self.width)
            .field("radius", &self.radius)
            .field("on", &self.on_bits().collect::<Vec<_>>())
            .finish()
    }
}

impl Fingerprint {
    pub fn empty(width: usize, radius: u32) -> Result<Fingerprint, ChemError> {
        if width == 0 || !width.is_power_of_two() {
            return Err(ChemError::InvalidWidth(width));
        }
        Ok(Fingerprint {
            words: vec![0; width.div_ceil(64)],
            width,
            radius,
        })
    }

    /// Builds a fingerprint with the listed bits set.
    pub fn from_bits(
        width: usize,
        radius: u32,
        bits: impl IntoIterator<Item = usize>,
    ) -> Result<Fingerprint, ChemError> {
        let mut fp = Fingerprint::empty(width, radius)?;
        for bit in bits {
            if bit >= width {
                return Err(ChemError::IndexOutOfRange {
                    index: bit,
                    len: width,
                });
            }
            fp.set(bit);
        }
        Ok(fp)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub(crate) fn set(&mut self, bit: usize) {
        self.words[bit / 64] |= 1u64 << (bit % 64);
    }

    pub fn get(&self, bit: usize) -> bool {
        bit < self.width && self.words[bit / 64] & (1u64 << (bit % 64)) != 0
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Indices of set bits in increasing order.
    pub fn on_bits(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + tz)
            })
        })
    }

    /// Every set bit of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &Fingerprint) -> bool {
        self.width == other.width
            && self
                .words
                .iter()
                .zip(&other.words)
                .all(|(a, b)| a & !b == 0)
    }

    /// 0.0/1.0 per bit, for feeding a network.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.width];
        for bit in self.on_bits() {
            out[bit] = 1.0;
        }
        out
    }

    /// Lexicographic comparison of the bit sequences, bit 0 first, 0 < 1.
    pub fn lex_cmp(&self, other: &Fingerprint) -> Result<Ordering, ChemError> {
        check_widths(self, other)?;
        for (a, b) in self.words.iter().zip(&other.words) {
            if a != b {
                return Ok(a.reverse_bits().cmp(&b.reverse_bits()));
            }
        }
        Ok(Ordering::Equal)
    }
}

fn check_widths(a: &Fingerprint, b: &Fingerprint) -> Result<(), ChemError> {
    if a.width != b.width {
        return Err(ChemError::WidthMismatch {
            left: a.width,
            right: b.width,
        });
    }
    Ok(())
}

/// Round-0 identifier of every atom, from (element, degree, formal charge,
/// hydrogen count, ring membership, aromaticity).
pub fn atom_invariants(m: &Molecule) -> Vec<u64> {
    (0..m.atom_count())
        .map(|i| {
            let a = &m.atoms[i];
            let mut h = Fnv1a::new();
            h.write(&[
                a.element.number(),
                a.degree,
                a.formal_charge as u8,
                m.hydrogen_count(i),
                u8::from(a.ring_member),
                u8::from(a.aromatic),
            ]);
            h.finish()
        })
        .collect()
}

/// Where a set bit came from: the environment of radius `radius` centred on `atom`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitOrigin {
    pub bit: usize,
    pub atom: usize,
    pub radius: u32,
    pub identifier: u64,
}

/// Identifiers per round: `rounds[r][atom]`.
pub(crate) fn environment_ids(m: &Molecule, radius: u32) -> Vec<Vec<u64>> {
    let adj = m.adjacency();
    let mut rounds = vec![atom_invariants(m)];
    for r in 1..=radius {
        let prev = rounds.last().unwrap();
        let next = (0..m.atom_count())
            .map(|i| {
                let mut env: Vec<(u8, u64)> =
                    adj[i].iter().map(|&(n, o)| (o.code(), prev[n])).collect();
                env.sort_unstable();
                let mut h = Fnv1a::new();
                h.write(&r.to_le_bytes());
                h.write(&prev[i].to_le_bytes());
                for (order, id) in env {
                    h.write(&[order]);
                    h.write(&id.to_le_bytes());
                }
                h.finish()
            })
            .collect();
        rounds.push(next);
    }
    rounds
}

pub fn ecfp_fingerprint(m: &Molecule, radius: u32, width: usize) -> Result<Fingerprint, ChemError> {
    Ok(ecfp_explained(m, radius, width)?.0)
}

/// Fingerprint plus the (atom, radius) environment behind every bit setting.
pub fn ecfp_explained(
    m: &Molecule,
    radius: u32,
    width: usize,
) -> Result<(Fingerprint, Vec<BitOrigin>), ChemError> {
    let mut fp = Fingerprint::empty(width, radius)?;
    let mut origins = Vec::new();
    for (r, ids) in environment_ids(m, radius).into_iter().enumerate() {
        for (atom, id) in ids.into_iter().enumerate() {
            let bit = (id % width as u64) as usize;
            fp.set(bit);
            origins.push(BitOrigin {
                bit,
                atom,
                radius: r as u32,
                identifier: id,
            });
        }
    }
    Ok((fp, origins))
}

pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, ChemError> {
    check_widths(a, b)?;
    let (mut inter, mut union) = (0u32, 0u32);
    for (x, y) in a.words.iter().zip(&b.words) {
        inter += (x & y).count_ones();
        union += (x | y).count_ones();
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(f64::from(inter) / f64::from(union))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairOrder {
    Keep,
    Swap,
}

/// `Swap` iff `fb` sorts strictly before `fa`.
pub fn canonical_pair_order(fa: &Fingerprint, fb: &Fingerprint) -> Result<PairOrder, ChemError> {
    Ok(match fb.lex_cmp(fa)? {
        Ordering::Less => PairOrder::Swap,
        _ => PairOrder::Keep,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smiles;

    fn fp(s: &str, r: u32) -> Fingerprint {
        ecfp_fingerprint(&parse_smiles(s).unwrap(), r, 2048).unwrap()
    }

    #[test]
    fn fnv_reference_vectors() {
        let mut h = Fnv1a::new();
        h.write(b"");
        assert_eq!(h.finish(), 0xcbf29ce484222325);
        let mut h = Fnv1a::new();
        h.write(b"a");
        assert_eq!(h.finish(), 0xaf63dc4c8601ec8c);
        let mut h = Fnv1a::new();
        h.write(b"foobar");
        assert_eq!(h.finish(), 0x85944171f73967e8);
    }

    #[test]
    fn invariants_distinguish_and_repeat() {
        let m = parse_smiles("*CC*").unwrap();
        let codes = atom_invariants(&m);
        assert_eq!(codes[1], codes[2]);
        assert_eq!(codes[0], codes[3]);
        assert_ne!(codes[0], codes[1]);
        assert_eq!(codes, atom_invariants(&parse_smiles("*CC*").unwrap()));
        let o = atom_invariants(&parse_smiles("O").unwrap());
        let c = atom_invariants(&parse_smiles("C").unwrap());
        assert_ne!(o, c);
    }

    #[test]
    fn radius_accumulates() {
        for s in ["*CC(*)c1ccccc1", "*CCO*", "CC(=O)OC"] {
            let r0 = fp(s, 0);
            let r1 = fp(s, 1);
            let r2 = fp(s, 2);
            assert!(r0.is_subset_of(&r1));
            assert!(r1.is_subset_of(&r2));
            assert!(r0.count_ones() >= 1);
        }
    }

    #[test]
    fn tanimoto_cases() {
        let a = Fingerprint::from_bits(8, 0, [1, 2, 3]).unwrap();
        let b = Fingerprint::from_bits(8, 0, [2, 3, 4]).unwrap();
        assert_eq!(tanimoto(&a, &b).unwrap(), 0.5);
        assert_eq!(tanimoto(&a, &a).unwrap(), 1.0);
        let c = Fingerprint::from_bits(8, 0, [5, 6]).unwrap();
        assert_eq!(tanimoto(&a, &c).unwrap(), 0.0);
        let z = Fingerprint::empty(8, 0).unwrap();
        assert_eq!(tanimoto(&z, &z).unwrap(), 1.0);
        let wide = Fingerprint::empty(16, 0).unwrap();
        assert_eq!(
            tanimoto(&a, &wide).unwrap_err(),
            ChemError::WidthMismatch { left: 8, right: 16 }
        );
    }

    #[test]
    fn width_must_be_power_of_two() {
        assert_eq!(
            Fingerprint::empty(100, 2).unwrap_err(),
            ChemError::InvalidWidth(100)
        );
        assert!(Fingerprint::empty(0, 2).is_err());
    }

    #[test]
    fn pair_order() {
        let f = fp("*CC*", 2);
        let g = fp("*CC(*)c1ccccc1", 2);
        assert_eq!(canonical_pair_order(&f, &f).unwrap(), PairOrder::Keep);
        let fg = canonical_pair_order(&f, &g).unwrap();
        let gf = canonical_pair_order(&g, &f).unwrap();
        assert_ne!(fg, gf);
        let (first, second) = if fg == PairOrder::Swap {
            (&g, &f)
        } else {
            (&f, &g)
        };
        assert_eq!(
            canonical_pair_order(first, second).unwrap(),
            PairOrder::Keep
        );
    }

    #[test]
    fn lex_order_reads_bit_zero_first() {
        let a = Fingerprint::from_bits(128, 0, [0]).unwrap();
        let b = Fingerprint::from_bits(128, 0, [1, 100]).unwrap();
        // a has a 1 where b has a 0 at the first differing position
        assert_eq!(a.lex_cmp(&b).unwrap(), Ordering::Greater);
        assert_eq!(canonical_pair_order(&a, &b).unwrap(), PairOrder::Swap);
    }

    #[test]
    fn explain_covers_every_bit() {
        let m = parse_smiles("*CC(*)c1ccccc1").unwrap();
        let (fp, origins) = ecfp_explained(&m, 2, 2048).unwrap();
        assert_eq!(origins.len(), 3 * m.atom_count());
        for bit in fp.on_bits() {
            assert!(origins.iter().any(|o| o.bit == bit));
        }
    }
}
