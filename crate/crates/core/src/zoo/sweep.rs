use serde::{Deserialize, Serialize};

use super::{ModelInstance, ZooError};
use crate::chem::{fingerprint_smiles, Fingerprint};
use crate::data::ModelInput;

/// Scores of one polymer pair across the composition range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    /// Fraction of the first-named polymer, ascending from 0 to 1.
    pub fractions: Vec<f64>,
    pub scores: Vec<f64>,
    pub criterion: f64,
}

impl Sweep {
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.fractions
            .iter()
            .copied()
            .zip(self.scores.iter().copied())
    }
}

pub fn composition_sweep(
    model: &ModelInstance,
    smiles_a: &str,
    smiles_b: &str,
    steps: usize,
) -> Result<Sweep, ZooError> {
    if steps < 2 {
        return Err(ZooError::InvalidConfig(format!(
            "sweep needs at least 2 steps, got {steps}"
        )));
    }
    let params = model.dims.fingerprint_params();
    let fa = fingerprint_smiles(smiles_a, params)?;
    let fb = fingerprint_smiles(smiles_b, params)?;
    sweep_fingerprints(model, &fa, &fb, steps)
}

/// [`composition_sweep`] on precomputed fingerprints, e.g. of edited structures.
pub fn sweep_fingerprints(
    model: &ModelInstance,
    fa: &Fingerprint,
    fb: &Fingerprint,
    steps: usize,
) -> Result<Sweep, ZooError> {
    if steps < 2 {
        return Err(ZooError::InvalidConfig(format!(
            "sweep needs at least 2 steps, got {steps}"
        )));
    }
    let last = (steps - 1) as f64;
    let fractions: Vec<f64> = (0..steps).map(|k| k as f64 / last).collect();
    let inputs = fractions
        .iter()
        .map(|&f| ModelInput::canonical(fa.clone(), fb.clone(), f, 0.0))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Sweep {
        fractions,
        scores: model.predict_batch(&inputs)?,
        criterion: model.criterion,
    })
}
