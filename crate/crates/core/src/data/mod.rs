//! Blend datasets: CSV schema, splitting protocols, vectorization into
//! network inputs, and a synthetic generator.

mod io;
mod split;
mod synth;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use thiserror::Error;

use crate::chem::ChemError;

pub use io::{load_entries, read_entries, write_entries, LoadReport, RowReject, CSV_HEADER};
pub use split::{
    balanced_split, pair_key, random_split, split, Split, SplitManifest, SplitMode, SplitSpec,
    SubsetStats,
};
pub use synth::{
    default_pool, gen_synthetic, synthetic_label, SynthConfig, DEFAULT_ALPHA, DEFAULT_T0,
};

mod vectorize;
pub use vectorize::{
    snap_composition, vectorize, vectorize_all, ModelInput, COMPOSITION_GRID, DEFAULT_LAMBDA,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Compatible,
    Incompatible,
}

impl Label {
    pub fn is_incompatible(self) -> bool {
        self == Label::Incompatible
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Compatible => "compatible",
            Label::Incompatible => "incompatible",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "compatible" => Ok(Label::Compatible),
            "incompatible" => Ok(Label::Incompatible),
            other => Err(format!(
                "label must be compatible or incompatible, got '{other}'"
            )),
        }
    }
}

/// One dataset row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlendEntry {
    pub smiles_a: String,
    pub smiles_b: String,
    /// Fraction of polymer A as reported by the source, in `[0, 1]`.
    pub fraction_a: f64,
    pub label: Label,
    pub source_id: String,
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("dataset file not found: {0}")]
    MissingFile(PathBuf),
    #[error("bad header: expected '{expected}', found '{found}'")]
    BadHeader { expected: String, found: String },
    #[error("row {row}: {reason}")]
    BadRow { row: u64, reason: String },
    #[error("need at least {needed} entries, got {got}")]
    TooFewEntries { needed: usize, got: usize },
    #[error("balanced split needs at least 2 distinct polymer pairs per class ({compatible} compatible, {incompatible} incompatible)")]
    TooFewPairs {
        compatible: usize,
        incompatible: usize,
    },
    #[error("{subset} subset drew no {missing} entries")]
    SingleClassSubset {
        subset: &'static str,
        missing: Label,
    },
    #[error("invalid split spec: {0}")]
    InvalidSpec(String),
    #[error("synthetic pool needs at least 8 distinct parseable units, got {0}")]
    PoolTooSmall(usize),
    #[error("invalid synthetic config: {0}")]
    InvalidSynth(String),
    #[error(transparent)]
    Chem(#[from] ChemError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
