//! Polymer blend compatibility prediction from repeating-unit structure and
//! blend composition.
//!
//! - [`chem`]: SMILES parsing, circular fingerprints, structure edits
//! - [`data`]: dataset CSVs, random and pair-disjoint balanced splits, vectorization
//! - [`autodiff`]: dense layers with exact reverse-mode gradients and Adam
//! - [`zoo`]: the difference network, its ablations and competitor architectures
//! - [`thermo`]: Flory–Huggins and solubility-parameter baselines
//! - [`stats`]: confusion metrics and the exact binomial confidence test
//! - [`attrib`]: Shapley attribution, sampled and exact
//! - [`plot`]: small hand-written SVG charts

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attrib;
pub mod autodiff;
pub mod chem;
pub mod data;
pub mod plot;
pub mod stats;
pub mod thermo;
pub mod zoo;
