//! Shapley attribution over fingerprint bits and the composition input.
//!
//! A model input is flattened to `[first bits (W) | second bits (W) | composition]`.
//! Masking a feature replaces it with the baseline value at that position.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::Tensor;
use crate::chem::Fingerprint;
use crate::data::ModelInput;
use crate::zoo::{sweep_fingerprints, ModelInstance, Sweep, ZooError};

pub const MAX_EXACT_FEATURES: usize = 20;
const PERMUTATIONS_PER_CHUNK: usize = 8;

#[derive(Debug, Error)]
pub enum AttribError {
    #[error("no features to attribute")]
    EmptyFeatures,
    #[error("{0} features exceed the exact-enumeration limit of {MAX_EXACT_FEATURES}")]
    TooManyFeatures(usize),
    #[error("at least one sample is required")]
    NoSamples,
    #[error("feature {feature:?} is outside a width-{width} input")]
    BadFeature { feature: Feature, width: usize },
    #[error("bit {0} is set in neither structure of either pair")]
    DimensionNotSet(usize),
    #[error(transparent)]
    Zoo(#[from] ZooError),
}

/// One attributable position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "bit", rename_all = "lowercase")]
pub enum Feature {
    First(usize),
    Second(usize),
    Composition,
}

impl Feature {
    fn slot(self, width: usize) -> usize {
        match self {
            Feature::First(b) => b,
            Feature::Second(b) => width + b,
            Feature::Composition => 2 * width,
        }
    }
}

/// Flattens an input into `[first | second | composition]`.
pub fn flatten(input: &ModelInput) -> Vec<f64> {
    let mut v = input.fp_first.to_dense();
    v.extend(input.fp_second.to_dense());
    v.push(input.composition);
    v
}

/// Active bits of both polymers, then the composition slot.
pub fn default_features(input: &ModelInput) -> Vec<Feature> {
    input
        .fp_first
        .on_bits()
        .map(Feature::First)
        .chain(input.fp_second.on_bits().map(Feature::Second))
        .chain(std::iter::once(Feature::Composition))
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    /// All-zero fingerprints, mean background composition (0.5 without background).
    #[default]
    ZeroFingerprint,
    /// Per-position mean of the background set.
    BackgroundMean,
}

pub fn baseline_vector(width: usize, background: &[ModelInput], kind: BaselineKind) -> Vec<f64> {
    let mut base = vec![0.0; 2 * width + 1];
    if background.is_empty() {
        base[2 * width] = 0.5;
        return base;
    }
    let n = background.len() as f64;
    match kind {
        BaselineKind::ZeroFingerprint => {
            base[2 * width] = background.iter().map(|b| b.composition).sum::<f64>() / n;
        }
        BaselineKind::BackgroundMean => {
            for b in background {
                for (acc, v) in base.iter_mut().zip(flatten(b)) {
                    *acc += v;
                }
            }
            base.iter_mut().for_each(|v| *v /= n);
        }
    }
    base
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributionReport {
    pub features: Vec<Feature>,
    pub values: Vec<f64>,
    pub baseline_value: f64,
    pub instance_value: f64,
    /// `|f(x) − f(b) − Σφ|`
    pub residual: f64,
    /// Permutations drawn; `None` for exact enumeration.
    pub samples: Option<usize>,
}

impl AttributionReport {
    pub fn value_of(&self, f: Feature) -> Option<f64> {
        self.features
            .iter()
            .position(|&g| g == f)
            .map(|i| self.values[i])
    }
}

/// Batch evaluation of a set function over flattened inputs.
pub trait Payoff: Sync {
    fn eval(&self, rows: &[Vec<f64>]) -> Vec<f64>;
}

impl<F> Payoff for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn eval(&self, rows: &[Vec<f64>]) -> Vec<f64> {
        rows.iter().map(|r| self(r)).collect()
    }
}

/// Scores flattened inputs with a trained model.
pub struct ModelPayoff<'a> {
    pub model: &'a ModelInstance,
}

impl Payoff for ModelPayoff<'_> {
    fn eval(&self, rows: &[Vec<f64>]) -> Vec<f64> {
        let w = self.model.dims.fp_width;
        let n = rows.len();
        let mut a = Vec::with_capacity(n * w);
        let mut b = Vec::with_capacity(n * w);
        let mut c = Vec::with_capacity(n);
        for r in rows {
            a.extend_from_slice(&r[..w]);
            b.extend_from_slice(&r[w..2 * w]);
            c.push(r[2 * w]);
        }
        let (a, b, c) = (
            Tensor::from_vec(n, w, a).expect("sized"),
            Tensor::from_vec(n, w, b).expect("sized"),
            Tensor::from_vec(n, 1, c).expect("sized"),
        );
        self.model
            .forward_dense(&a, &b, &c)
            .expect("rows were built at the model width")
    }
}

fn masked(x: &[f64], base: &[f64], slots: &[usize], mask: u64) -> Vec<f64> {
    let mut row = base.to_vec();
    for (j, &s) in slots.iter().enumerate() {
        if mask >> j & 1 == 1 {
            row[s] = x[s];
        }
    }
    row
}

/// Exact Shapley values by enumerating all `2^m` coalitions of `slots`.
pub fn exact_shapley_values(
    f: &dyn Payoff,
    x: &[f64],
    base: &[f64],
    slots: &[usize],
) -> Result<(Vec<f64>, f64, f64), AttribError> {
    let m = slots.len();
    if m == 0 {
        return Err(AttribError::EmptyFeatures);
    }
    if m > MAX_EXACT_FEATURES {
        return Err(AttribError::TooManyFeatures(m));
    }
    let total = 1u64 << m;
    let masks: Vec<u64> = (0..total).collect();
    let values: Vec<f64> = masks
        .par_chunks(256)
        .map(|chunk| {
            let rows: Vec<Vec<f64>> = chunk.iter().map(|&s| masked(x, base, slots, s)).collect();
            f.eval(&rows)
        })
        .collect::<Vec<_>>()
        .concat();
    // w(s) = s! (m − s − 1)! / m! = 1 / (m · C(m − 1, s))
    let mut weight = vec![0.0; m];
    let mut choose = 1.0;
    for (s, w) in weight.iter_mut().enumerate() {
        *w = 1.0 / (m as f64 * choose);
        choose = choose * (m - 1 - s) as f64 / (s + 1) as f64;
    }
    let mut phi = vec![0.0; m];
    for (j, p) in phi.iter_mut().enumerate() {
        let bit = 1u64 << j;
        *p = (0..total)
            .filter(|s| s & bit == 0)
            .map(|s| {
                weight[s.count_ones() as usize] * (values[(s | bit) as usize] - values[s as usize])
            })
            .sum();
    }
    Ok((phi, values[0], values[(total - 1) as usize]))
}

/// Permutation-sampling Shapley estimates. Permutations are drawn up front from
/// the seed and reduced in index order, so results do not depend on threading.
pub fn sampled_shapley_values(
    f: &dyn Payoff,
    x: &[f64],
    base: &[f64],
    slots: &[usize],
    n_samples: usize,
    seed: u64,
) -> Result<(Vec<f64>, f64, f64), AttribError> {
    let m = slots.len();
    if m == 0 {
        return Err(AttribError::EmptyFeatures);
    }
    if n_samples == 0 {
        return Err(AttribError::NoSamples);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perms: Vec<Vec<usize>> = (0..n_samples)
        .map(|_| {
            let mut p: Vec<usize> = (0..m).collect();
            p.shuffle(&mut rng);
            p
        })
        .collect();
    let ends = f.eval(&[base.to_vec(), x.to_vec()]);
    let partials: Vec<Vec<f64>> = perms
        .par_chunks(PERMUTATIONS_PER_CHUNK)
        .map(|chunk| {
            let mut rows = Vec::with_capacity(chunk.len() * m);
            for p in chunk {
                let mut row = base.to_vec();
                for &j in p {
                    row[slots[j]] = x[slots[j]];
                    rows.push(row.clone());
                }
            }
            let vals = f.eval(&rows);
            let mut acc = vec![0.0; m];
            for (k, p) in chunk.iter().enumerate() {
                let mut prev = ends[0];
                for (t, &j) in p.iter().enumerate() {
                    let v = vals[k * m + t];
                    acc[j] += v - prev;
                    prev = v;
                }
            }
            acc
        })
        .collect();
    let mut phi = vec![0.0; m];
    for part in partials {
        for (p, v) in phi.iter_mut().zip(part) {
            *p += v;
        }
    }
    phi.iter_mut().for_each(|p| *p /= n_samples as f64);
    Ok((phi, ends[0], ends[1]))
}

type Prepared = (Vec<Feature>, Vec<usize>, Vec<f64>, Vec<f64>);

#[derive(Clone, Debug)]
pub struct AttributionRequest<'a> {
    pub model: &'a ModelInstance,
    pub instance: &'a ModelInput,
    pub background: &'a [ModelInput],
    pub baseline: BaselineKind,
    /// Defaults to [`default_features`] when `None`.
    pub features: Option<Vec<Feature>>,
    pub n_samples: usize,
    pub seed: u64,
}

impl<'a> AttributionRequest<'a> {
    pub fn new(model: &'a ModelInstance, instance: &'a ModelInput) -> Self {
        AttributionRequest {
            model,
            instance,
            background: &[],
            baseline: BaselineKind::default(),
            features: None,
            n_samples: 1000,
            seed: 0,
        }
    }

    /// Features, their flat slots, the flattened instance and the baseline.
    fn prepare(&self) -> Result<Prepared, AttribError> {
        let width = self.model.dims.fp_width;
        for fp in [&self.instance.fp_first, &self.instance.fp_second] {
            if fp.width() != width {
                return Err(ZooError::ShapeMismatch {
                    expected: width,
                    found: fp.width(),
                }
                .into());
            }
        }
        let features = self
            .features
            .clone()
            .unwrap_or_else(|| default_features(self.instance));
        if features.is_empty() {
            return Err(AttribError::EmptyFeatures);
        }
        for &f in &features {
            if matches!(f, Feature::First(b) | Feature::Second(b) if b >= width) {
                return Err(AttribError::BadFeature { feature: f, width });
            }
        }
        let slots = features.iter().map(|f| f.slot(width)).collect();
        let x = flatten(self.instance);
        let base = baseline_vector(width, self.background, self.baseline);
        Ok((features, slots, x, base))
    }
}

fn report(
    features: Vec<Feature>,
    (values, baseline_value, instance_value): (Vec<f64>, f64, f64),
    samples: Option<usize>,
) -> AttributionReport {
    let residual = (instance_value - baseline_value - values.iter().sum::<f64>()).abs();
    AttributionReport {
        features,
        values,
        baseline_value,
        instance_value,
        residual,
        samples,
    }
}

pub fn shapley_sample(req: &AttributionRequest<'_>) -> Result<AttributionReport, AttribError> {
    let (features, slots, x, base) = req.prepare()?;
    let payoff = ModelPayoff { model: req.model };
    let raw = sampled_shapley_values(&payoff, &x, &base, &slots, req.n_samples, req.seed)?;
    Ok(report(features, raw, Some(req.n_samples)))
}

/// Exact values for the request's features; `n_samples` and `seed` are ignored.
pub fn exact_shapley(req: &AttributionRequest<'_>) -> Result<AttributionReport, AttribError> {
    let (features, slots, x, base) = req.prepare()?;
    let payoff = ModelPayoff { model: req.model };
    let raw = exact_shapley_values(&payoff, &x, &base, &slots)?;
    Ok(report(features, raw, None))
}

/// Two polymer fingerprints, in the order the caller names them.
#[derive(Clone, Debug, PartialEq)]
pub struct PolymerPair {
    pub a: Fingerprint,
    pub b: Fingerprint,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub sweep_steps: usize,
    /// Compositions drawn for the φ distribution.
    pub compositions: usize,
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            sweep_steps: 21,
            compositions: 50,
            n_samples: 500,
            seed: 0,
        }
    }
}

/// φ of one fingerprint dimension at one composition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionSample {
    pub fraction_a: f64,
    pub phi: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureComparison {
    pub dimension: usize,
    pub normal_sweep: Sweep,
    pub lacking_sweep: Sweep,
    pub normal_phi: Vec<DimensionSample>,
    pub lacking_phi: Vec<DimensionSample>,
}

fn dimension_distribution(
    model: &ModelInstance,
    pair: &PolymerPair,
    dimension: usize,
    fractions: &[f64],
    cfg: &CompareConfig,
) -> Result<Vec<DimensionSample>, AttribError> {
    fractions
        .iter()
        .map(|&f| {
            let input = ModelInput::canonical(pair.a.clone(), pair.b.clone(), f, 0.0)
                .map_err(ZooError::from)?;
            let mut req = AttributionRequest::new(model, &input);
            req.n_samples = cfg.n_samples;
            req.seed = cfg.seed;
            let rep = shapley_sample(&req)?;
            // the dimension counts once per polymer carrying it
            let phi = [Feature::First(dimension), Feature::Second(dimension)]
                .into_iter()
                .filter_map(|g| rep.value_of(g))
                .sum();
            Ok(DimensionSample {
                fraction_a: f,
                phi,
                residual: rep.residual,
            })
        })
        .collect()
}

/// Sweeps and φ distributions of one bit for an intact pair and an edited
/// ("lacking") pair.
pub fn compare_structures(
    model: &ModelInstance,
    normal: &PolymerPair,
    lacking: &PolymerPair,
    dimension: usize,
    cfg: &CompareConfig,
) -> Result<StructureComparison, AttribError> {
    let set = [&normal.a, &normal.b, &lacking.a, &lacking.b]
        .iter()
        .any(|fp| dimension < fp.width() && fp.get(dimension));
    if !set {
        return Err(AttribError::DimensionNotSet(dimension));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let fractions: Vec<f64> = (0..cfg.compositions)
        .map(|_| rng.gen_range(0.0..=1.0))
        .collect();
    Ok(StructureComparison {
        dimension,
        normal_sweep: sweep_fingerprints(model, &normal.a, &normal.b, cfg.sweep_steps)?,
        lacking_sweep: sweep_fingerprints(model, &lacking.a, &lacking.b, cfg.sweep_steps)?,
        normal_phi: dimension_distribution(model, normal, dimension, &fractions, cfg)?,
        lacking_phi: dimension_distribution(model, lacking, dimension, &fractions, cfg)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dictator_game() {
        let f = |x: &[f64]| x[1];
        let x = [1.0, 3.0, 2.0];
        let b = [0.0, 0.5, 0.0];
        let (phi, _, _) = exact_shapley_values(&f, &x, &b, &[0, 1, 2]).unwrap();
        assert_eq!(phi, vec![0.0, 2.5, 0.0]);
        let (phi, _, _) = sampled_shapley_values(&f, &x, &b, &[0, 1, 2], 7, 1).unwrap();
        assert_eq!(phi, vec![0.0, 2.5, 0.0]);
    }

    #[test]
    fn additive_game_is_exact_with_any_sample_count() {
        let w = [2.0, -1.0, 0.5, 4.0];
        let f = move |x: &[f64]| x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
        let x = [1.0, 1.0, 0.0, 0.25];
        let b = [0.0, 0.5, 1.0, 0.0];
        for n in [1, 3, 50] {
            let (phi, _, _) = sampled_shapley_values(&f, &x, &b, &[0, 1, 2, 3], n, 9).unwrap();
            for i in 0..4 {
                assert!((phi[i] - w[i] * (x[i] - b[i])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn symmetric_product() {
        let f = |x: &[f64]| x[0] * x[1];
        let (phi, v0, v1) = exact_shapley_values(&f, &[1.0, 1.0], &[0.0, 0.0], &[0, 1]).unwrap();
        assert_eq!(phi[0], phi[1]);
        assert!((phi.iter().sum::<f64>() - (v1 - v0)).abs() < 1e-15);
    }

    #[test]
    fn constant_game_is_null() {
        let f = |_: &[f64]| 3.0;
        let (phi, _, _) = exact_shapley_values(&f, &[1.0; 5], &[0.0; 5], &[0, 1, 2, 3, 4]).unwrap();
        assert!(phi.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn limits() {
        let f = |_: &[f64]| 0.0;
        assert!(matches!(
            exact_shapley_values(&f, &[0.0; 21], &[0.0; 21], &(0..21).collect::<Vec<_>>()),
            Err(AttribError::TooManyFeatures(21))
        ));
        assert!(matches!(
            exact_shapley_values(&f, &[0.0], &[0.0], &[]),
            Err(AttribError::EmptyFeatures)
        ));
        assert!(matches!(
            sampled_shapley_values(&f, &[0.0], &[0.0], &[0], 0, 0),
            Err(AttribError::NoSamples)
        ));
    }

    #[test]
    fn baselines() {
        let fp = Fingerprint::from_bits(4, 2, [1]).unwrap();
        let bg = vec![
            ModelInput {
                fp_first: fp.clone(),
                fp_second: fp.clone(),
                composition: 0.2,
                target: 0.0,
            },
            ModelInput {
                fp_first: Fingerprint::empty(4, 2).unwrap(),
                fp_second: fp,
                composition: 0.4,
                target: 0.0,
            },
        ];
        let zero = baseline_vector(4, &bg, BaselineKind::ZeroFingerprint);
        assert_eq!(zero[..8], [0.0; 8]);
        assert!((zero[8] - 0.3).abs() < 1e-15);
        let mean = baseline_vector(4, &bg, BaselineKind::BackgroundMean);
        assert_eq!(mean[1], 0.5);
        assert_eq!(mean[5], 1.0);
        assert_eq!(
            baseline_vector(4, &[], BaselineKind::BackgroundMean)[8],
            0.5
        );
    }
}
