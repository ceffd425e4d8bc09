use std::collections::HashMap;

use rayon::prelude::*;

use super::{BlendEntry, DataError};
use crate::chem::{
    canonical_pair_order, fingerprint_smiles, Fingerprint, FingerprintParams, PairOrder,
};

/// Regression target assigned to incompatible blends; compatible blends get 0.
pub const DEFAULT_LAMBDA: f64 = 10.0;

/// Compositions are snapped to multiples of 2^-20. On that grid `1 - c` is
/// exact, so a swapped pair with complemented fraction lands on the very same
/// value instead of one ulp away.
pub const COMPOSITION_GRID: f64 = 1_048_576.0;

pub fn snap_composition(c: f64) -> f64 {
    (c * COMPOSITION_GRID).round() / COMPOSITION_GRID
}

/// Network-ready form of a blend, with the polymers in canonical order.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelInput {
    pub fp_first: Fingerprint,
    pub fp_second: Fingerprint,
    /// Fraction of the canonical-first polymer.
    pub composition: f64,
    pub target: f64,
}

impl ModelInput {
    /// Orders two fingerprints canonically, flipping the composition if they
    /// swap. When the fingerprints are identical either order describes the
    /// same blend, so the composition is folded onto `[0, 0.5]`.
    pub fn canonical(
        fa: Fingerprint,
        fb: Fingerprint,
        fraction_a: f64,
        target: f64,
    ) -> Result<ModelInput, DataError> {
        let mut fraction_a = snap_composition(fraction_a);
        if fa == fb {
            fraction_a = fraction_a.min(1.0 - fraction_a);
        }
        Ok(match canonical_pair_order(&fa, &fb)? {
            PairOrder::Keep => ModelInput {
                fp_first: fa,
                fp_second: fb,
                composition: fraction_a,
                target,
            },
            PairOrder::Swap => ModelInput {
                fp_first: fb,
                fp_second: fa,
                composition: 1.0 - fraction_a,
                target,
            },
        })
    }
}

pub fn vectorize(
    e: &BlendEntry,
    lambda: f64,
    params: FingerprintParams,
) -> Result<ModelInput, DataError> {
    let fa = fingerprint_smiles(&e.smiles_a, params)?;
    let fb = fingerprint_smiles(&e.smiles_b, params)?;
    let target = if e.label.is_incompatible() {
        lambda
    } else {
        0.0
    };
    ModelInput::canonical(fa, fb, e.fraction_a, target)
}

/// Vectorizes a whole dataset, fingerprinting each distinct SMILES once.
/// Output order matches input order.
pub fn vectorize_all(
    entries: &[BlendEntry],
    lambda: f64,
    params: FingerprintParams,
) -> Result<Vec<ModelInput>, DataError> {
    let mut unique: Vec<&str> = entries
        .iter()
        .flat_map(|e| [e.smiles_a.as_str(), e.smiles_b.as_str()])
        .collect();
    unique.sort_unstable();
    unique.dedup();
    let fps: HashMap<&str, Fingerprint> = unique
        .par_iter()
        .map(|s| fingerprint_smiles(s, params).map(|fp| (*s, fp)))
        .collect::<Result<_, _>>()?;
    entries
        .iter()
        .map(|e| {
            let target = if e.label.is_incompatible() {
                lambda
            } else {
                0.0
            };
            ModelInput::canonical(
                fps[e.smiles_a.as_str()].clone(),
                fps[e.smiles_b.as_str()].clone(),
                e.fraction_a,
                target,
            )
        })
        .collect()
}
