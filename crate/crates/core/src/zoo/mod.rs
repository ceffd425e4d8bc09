//! HDDN, its ablations and the competitor architectures: construction,
//! prediction, training, checkpoints and composition sweeps.

mod arch;
mod checkpoint;
mod sweep;
mod train;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::{AutodiffError, NodeId, ParamSet, Tape, Tensor};
use crate::chem::{ChemError, FingerprintParams};
use crate::data::{DataError, Label, ModelInput, DEFAULT_LAMBDA};

pub use checkpoint::{
    load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_MAGIC,
    CHECKPOINT_VERSION,
};
pub use sweep::{composition_sweep, sweep_fingerprints, Sweep};
pub use train::{accuracy, train, train_observed, TrainConfig, TrainHistory};

#[derive(Debug, Error)]
pub enum ZooError {
    #[error("bad dimensions: {0}")]
    BadDims(String),
    #[error("unknown variant {0:?}")]
    UnknownVariant(String),
    #[error("input width {found} does not match model width {expected}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("{0} set is empty")]
    EmptySet(&'static str),
    #[error("training loss became non-finite in epoch {epoch}")]
    DivergedLoss { epoch: usize },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("not a checkpoint (bad magic)")]
    BadMagic,
    #[error("checkpoint version {found} is not supported")]
    VersionMismatch { found: u64 },
    #[error("corrupt checkpoint: {0}")]
    CorruptPayload(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Chem(#[from] ChemError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelVariant {
    #[serde(rename = "HDDN")]
    Hddn,
    #[serde(rename = "HDDN-noc")]
    NoC,
    #[serde(rename = "HDDN-nodense")]
    NoDense,
    #[serde(rename = "HDDN-nodiff")]
    NoDiff,
    #[serde(rename = "HDDN-noabs")]
    NoAbs,
    #[serde(rename = "MLP")]
    Mlp,
    #[serde(rename = "CDN")]
    Cdn,
    #[serde(rename = "DN")]
    Dn,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 8] = [
        ModelVariant::Hddn,
        ModelVariant::NoC,
        ModelVariant::NoDense,
        ModelVariant::NoDiff,
        ModelVariant::NoAbs,
        ModelVariant::Mlp,
        ModelVariant::Cdn,
        ModelVariant::Dn,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ModelVariant::Hddn => "HDDN",
            ModelVariant::NoC => "HDDN-noc",
            ModelVariant::NoDense => "HDDN-nodense",
            ModelVariant::NoDiff => "HDDN-nodiff",
            ModelVariant::NoAbs => "HDDN-noabs",
            ModelVariant::Mlp => "MLP",
            ModelVariant::Cdn => "CDN",
            ModelVariant::Dn => "DN",
        }
    }

    /// Variants whose two polymers pass through shared feature weights.
    pub fn is_siamese(self) -> bool {
        !matches!(self, ModelVariant::NoDiff | ModelVariant::Mlp)
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ModelVariant {
    type Err = ZooError;

    fn from_str(s: &str) -> Result<Self, ZooError> {
        ModelVariant::ALL
            .into_iter()
            .find(|v| v.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| ZooError::UnknownVariant(s.to_string()))
    }
}

fn default_radius() -> u32 {
    2
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub fp_width: usize,
    #[serde(default = "default_radius")]
    pub fp_radius: u32,
    pub feature_width: usize,
    pub n_dense_layers: usize,
    pub decision_widths: Vec<usize>,
}

impl Default for Dims {
    fn default() -> Self {
        Dims {
            fp_width: 2048,
            fp_radius: 2,
            feature_width: 256,
            n_dense_layers: 3,
            decision_widths: vec![64, 16],
        }
    }
}

impl Dims {
    /// Small shapes for gradient checks and quick experiments.
    pub fn toy() -> Self {
        Dims {
            fp_width: 16,
            fp_radius: 2,
            feature_width: 8,
            n_dense_layers: 2,
            decision_widths: vec![8, 4],
        }
    }

    pub fn fingerprint_params(&self) -> FingerprintParams {
        FingerprintParams {
            radius: self.fp_radius,
            width: self.fp_width,
        }
    }

    pub fn validate(&self) -> Result<(), ZooError> {
        if self.fp_width == 0 || self.feature_width == 0 {
            return Err(ZooError::BadDims("widths must be positive".into()));
        }
        if self.decision_widths.contains(&0) {
            return Err(ZooError::BadDims("decision widths must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelInstance {
    pub variant: ModelVariant,
    pub dims: Dims,
    pub lambda: f64,
    pub criterion: f64,
    params: ParamSet,
    arch: arch::Arch,
}

pub fn build_model(
    variant: ModelVariant,
    dims: &Dims,
    seed: u64,
) -> Result<ModelInstance, ZooError> {
    dims.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (params, arch) = arch::init_params(variant, dims, &mut rng);
    Ok(ModelInstance {
        variant,
        dims: dims.clone(),
        lambda: DEFAULT_LAMBDA,
        criterion: DEFAULT_LAMBDA / 2.0,
        params,
        arch,
    })
}

/// Dense batch tensors `(first, second, composition)` for a set of inputs.
pub fn batch_tensors(inputs: &[&ModelInput]) -> (Tensor, Tensor, Tensor) {
    let width = inputs.first().map_or(0, |i| i.fp_first.width());
    let mut a = Vec::with_capacity(inputs.len() * width);
    let mut b = Vec::with_capacity(inputs.len() * width);
    let mut c = Vec::with_capacity(inputs.len());
    for i in inputs {
        a.extend(i.fp_first.to_dense());
        b.extend(i.fp_second.to_dense());
        c.push(i.composition);
    }
    let n = inputs.len();
    (
        Tensor::from_vec(n, width, a).expect("sized"),
        Tensor::from_vec(n, width, b).expect("sized"),
        Tensor::from_vec(n, 1, c).expect("sized"),
    )
}

impl ModelInstance {
    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    pub(crate) fn from_parts(
        variant: ModelVariant,
        dims: Dims,
        lambda: f64,
        criterion: f64,
        params: ParamSet,
    ) -> Result<ModelInstance, ZooError> {
        dims.validate()?;
        let arch = arch::arch_for(variant, &dims, &params)?;
        Ok(ModelInstance {
            variant,
            dims,
            lambda,
            criterion,
            params,
            arch,
        })
    }

    /// Records the forward pass on a tape; the tape may carry a perturbed copy
    /// of this model's parameters.
    pub fn record(
        &self,
        tape: &mut Tape<'_>,
        a: NodeId,
        b: NodeId,
        c: NodeId,
    ) -> Result<NodeId, ZooError> {
        Ok(self.arch.record(tape, a, b, c)?)
    }

    fn check_width(&self, found: usize) -> Result<(), ZooError> {
        if found != self.dims.fp_width {
            return Err(ZooError::ShapeMismatch {
                expected: self.dims.fp_width,
                found,
            });
        }
        Ok(())
    }

    /// Scores on dense inputs: `a`, `b` are rows × fp_width, `c` rows × 1.
    pub fn forward_dense(&self, a: &Tensor, b: &Tensor, c: &Tensor) -> Result<Vec<f64>, ZooError> {
        self.check_width(a.cols())?;
        self.check_width(b.cols())?;
        if c.cols() != 1 || a.rows() != b.rows() || a.rows() != c.rows() {
            return Err(ZooError::ShapeMismatch {
                expected: a.rows(),
                found: c.rows(),
            });
        }
        let mut tape = Tape::new(&self.params);
        let (na, nb, nc) = (
            tape.constant(a.clone()),
            tape.constant(b.clone()),
            tape.constant(c.clone()),
        );
        let out = self.record(&mut tape, na, nb, nc)?;
        Ok(tape.value(out).as_slice().to_vec())
    }

    pub fn predict(&self, input: &ModelInput) -> Result<f64, ZooError> {
        Ok(self.predict_batch(std::slice::from_ref(input))?[0])
    }

    /// Scores in input order. Rows are independent, so the chunked parallel
    /// evaluation returns exactly what a sequential pass would.
    pub fn predict_batch(&self, inputs: &[ModelInput]) -> Result<Vec<f64>, ZooError> {
        for i in inputs {
            self.check_width(i.fp_first.width())?;
            self.check_width(i.fp_second.width())?;
        }
        let chunks: Vec<Vec<f64>> = inputs
            .par_chunks(64)
            .map(|chunk| {
                let refs: Vec<&ModelInput> = chunk.iter().collect();
                let (a, b, c) = batch_tensors(&refs);
                self.forward_dense(&a, &b, &c)
            })
            .collect::<Result<_, _>>()?;
        Ok(chunks.concat())
    }

    pub fn classify(&self, score: f64) -> Label {
        classify(score, self.criterion)
    }
}

/// Incompatible iff `score >= criterion`.
pub fn classify(score: f64, criterion: f64) -> Label {
    if score >= criterion {
        Label::Incompatible
    } else {
        Label::Compatible
    }
}

pub fn predict(model: &ModelInstance, input: &ModelInput) -> Result<f64, ZooError> {
    model.predict(input)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::Fingerprint;

    fn input(width: usize, a: &[usize], b: &[usize], c: f64) -> ModelInput {
        ModelInput {
            fp_first: Fingerprint::from_bits(width, 2, a.iter().copied()).unwrap(),
            fp_second: Fingerprint::from_bits(width, 2, b.iter().copied()).unwrap(),
            composition: c,
            target: 0.0,
        }
    }

    #[test]
    fn default_hddn_forward_runs() {
        let m = build_model(ModelVariant::Hddn, &Dims::default(), 0).unwrap();
        let s = m
            .predict(&input(2048, &[1, 700, 2000], &[5, 6], 0.3))
            .unwrap();
        assert!(s.is_finite());
    }

    #[test]
    fn seeded_init_is_reproducible() {
        let a = build_model(ModelVariant::Cdn, &Dims::toy(), 9).unwrap();
        let b = build_model(ModelVariant::Cdn, &Dims::toy(), 9).unwrap();
        assert_eq!(a, b);
        let c = build_model(ModelVariant::Cdn, &Dims::toy(), 10).unwrap();
        assert_ne!(a.params(), c.params());
    }

    #[test]
    fn nodiff_first_layer_sees_both_fingerprints() {
        let m = build_model(ModelVariant::NoDiff, &Dims::default(), 0).unwrap();
        assert_eq!(m.params().values()[0].rows(), 4096);
        let mlp = build_model(ModelVariant::Mlp, &Dims::default(), 0).unwrap();
        assert_eq!(mlp.params().values()[0].rows(), 4097);
    }

    #[test]
    fn cdn_grows_and_dn_keeps_width() {
        let d = Dims::toy();
        let cdn = build_model(ModelVariant::Cdn, &d, 0).unwrap();
        let shapes: Vec<_> = cdn
            .params()
            .iter()
            .map(|(_, n, t)| (n.to_string(), t.shape()))
            .collect();
        assert_eq!(shapes[2], ("dense0.w".into(), (8, 8)));
        assert_eq!(shapes[4], ("dense1.w".into(), (16, 8)));
        assert_eq!(shapes[6], ("decision0.w".into(), (25, 8)));
        let dn = build_model(ModelVariant::Dn, &d, 0).unwrap();
        let w = dn.params().get(dn.params().id_of("decision1.w").unwrap());
        assert_eq!(w.shape(), (8, 8));
    }

    #[test]
    fn identical_polymers_depend_only_on_composition() {
        let d = Dims::toy();
        let m = build_model(ModelVariant::Hddn, &d, 4).unwrap();
        let s1 = m.predict(&input(16, &[1, 2, 3], &[1, 2, 3], 0.25)).unwrap();
        let s2 = m.predict(&input(16, &[7, 9], &[7, 9], 0.25)).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn hand_computed_two_bit_network() {
        // fp width 2, feature width 2, one dense layer, no decision hidden layers,
        // every weight 1 and every bias 0.
        let dims = Dims {
            fp_width: 2,
            fp_radius: 2,
            feature_width: 2,
            n_dense_layers: 1,
            decision_widths: vec![],
        };
        let mut m = build_model(ModelVariant::Hddn, &dims, 0).unwrap();
        for t in m.params_mut().values_mut() {
            let bias = t.rows() == 1;
            for v in t.as_mut_slice() {
                *v = if bias { 0.0 } else { 1.0 };
            }
        }
        // A = (1,0): projection (1,1), dense (2,2). B = (0,1): the same.
        // |f(A) − f(B)| = (0,0); head input (0,0,0.5) → 0.5.
        let s = m.predict(&input(2, &[0], &[1], 0.5)).unwrap();
        assert_eq!(s, 0.5);
        // A = (1,1): projection (2,2), dense (4,4). B = (0,1): (2,2).
        // |diff| = (2,2); head input (2,2,0.5) → 4.5.
        let s = m.predict(&input(2, &[0, 1], &[1], 0.5)).unwrap();
        assert_eq!(s, 4.5);
    }

    #[test]
    fn width_guard() {
        let m = build_model(ModelVariant::Hddn, &Dims::toy(), 0).unwrap();
        assert!(matches!(
            m.predict(&input(32, &[1], &[2], 0.5)),
            Err(ZooError::ShapeMismatch {
                expected: 16,
                found: 32
            })
        ));
    }

    #[test]
    fn classify_tie_goes_incompatible() {
        assert_eq!(classify(0.0, 5.0), Label::Compatible);
        assert_eq!(classify(10.0, 5.0), Label::Incompatible);
        assert_eq!(classify(5.0, 5.0), Label::Incompatible);
    }

    #[test]
    fn variant_tags_round_trip() {
        for v in ModelVariant::ALL {
            assert_eq!(v.tag().parse::<ModelVariant>().unwrap(), v);
            let json = serde_json::to_string(&v).unwrap();
            assert_eq!(json, format!("\"{}\"", v.tag()));
        }
        assert!("HDDN-xyz".parse::<ModelVariant>().is_err());
    }

    #[test]
    fn bad_dims() {
        let mut d = Dims::toy();
        d.feature_width = 0;
        assert!(matches!(
            build_model(ModelVariant::Hddn, &d, 0),
            Err(ZooError::BadDims(_))
        ));
    }

    #[test]
    fn batch_matches_single() {
        let m = build_model(ModelVariant::Dn, &Dims::toy(), 2).unwrap();
        let inputs: Vec<_> = (0..150)
            .map(|i| {
                input(
                    16,
                    &[i % 16, (i * 7) % 16],
                    &[(i * 3) % 16],
                    (i as f64) / 150.0,
                )
            })
            .collect();
        let batch = m.predict_batch(&inputs).unwrap();
        for (i, s) in inputs.iter().zip(batch) {
            assert_eq!(m.predict(i).unwrap(), s);
        }
    }
}
