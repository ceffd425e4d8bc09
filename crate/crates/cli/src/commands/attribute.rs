use std::path::PathBuf;

use anyhow::{Context, Result};
use blendnet::attrib::{
    compare_structures, exact_shapley, shapley_sample, AttributionRequest, BaselineKind,
    CompareConfig, Feature, PolymerPair,
};
use blendnet::chem::{fingerprint_smiles, Fingerprint};
use blendnet::data::{load_entries, vectorize_all, ModelInput};
use blendnet::plot::{line_plot, strip_plot, Axes, Rule, Series};
use blendnet::zoo::load_checkpoint;
use clap::{Args, ValueEnum};
use serde::Serialize;

use crate::artifact::{invalid, print_json, require_file, Outputs};

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    /// Empty fingerprints at the mean background composition
    Zero,
    /// Position-wise mean of the background set
    Mean,
}

#[derive(Args, Debug, Serialize)]
pub struct AttributeArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// SMILES of polymer A
    #[arg(long)]
    pub a: String,
    #[arg(long)]
    pub b: String,
    /// Fraction of polymer A
    #[arg(long, default_value_t = 0.5)]
    pub fraction: f64,
    /// Permutations for the sampling estimator
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Enumerate every coalition instead of sampling (at most 20 features)
    #[arg(long)]
    pub exact: bool,
    #[arg(long, value_enum, default_value_t = Baseline::Zero)]
    pub baseline: Baseline,
    /// Dataset CSV whose blends form the background set
    #[arg(long)]
    pub background: Option<PathBuf>,
    /// Compare one fingerprint bit between the pair and an edited pair
    #[arg(long, requires = "out")]
    pub dimension: Option<usize>,
    /// Edited A for --dimension (default: A with the bit cleared)
    #[arg(long, requires = "dimension")]
    pub lacking_a: Option<String>,
    #[arg(long, requires = "dimension")]
    pub lacking_b: Option<String>,
    /// Compositions sampled per structure for --dimension
    #[arg(long, default_value_t = 50)]
    pub compositions: usize,
    /// Write reports and plots here instead of printing
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct FeatureValue {
    /// "a", "b" or "composition"
    source: &'static str,
    bit: Option<usize>,
    phi: f64,
}

#[derive(Serialize)]
struct Report<'a> {
    a: &'a str,
    b: &'a str,
    fraction_a: f64,
    instance_value: f64,
    baseline_value: f64,
    residual: f64,
    samples: Option<usize>,
    features: Vec<FeatureValue>,
}

fn cleared(fp: &Fingerprint, bit: usize) -> Result<Fingerprint> {
    Ok(Fingerprint::from_bits(
        fp.width(),
        fp.radius(),
        fp.on_bits().filter(|&b| b != bit),
    )?)
}

pub fn attribute(args: &AttributeArgs) -> Result<()> {
    if !(0.0..=1.0).contains(&args.fraction) {
        return Err(invalid(format!(
            "fraction {} outside [0, 1]",
            args.fraction
        )));
    }
    require_file(&args.checkpoint, "checkpoint")?;
    let model = load_checkpoint(&args.checkpoint)
        .with_context(|| format!("reading {}", args.checkpoint.display()))?;
    let params = model.dims.fingerprint_params();
    let fa = fingerprint_smiles(&args.a, params)?;
    let fb = fingerprint_smiles(&args.b, params)?;

    if let Some(dim) = args.dimension {
        let out = Outputs::new(
            args.out.as_ref().expect("clap requires --out"),
            "attribute",
            args,
        )?;
        let lacking = |s: &Option<String>, fp: &Fingerprint| -> Result<Fingerprint> {
            match s {
                Some(smiles) => Ok(fingerprint_smiles(smiles, params)?),
                None => cleared(fp, dim),
            }
        };
        let normal = PolymerPair {
            a: fa.clone(),
            b: fb.clone(),
        };
        let edited = PolymerPair {
            a: lacking(&args.lacking_a, &fa)?,
            b: lacking(&args.lacking_b, &fb)?,
        };
        let cfg = CompareConfig {
            compositions: args.compositions,
            n_samples: args.samples,
            seed: args.seed,
            ..CompareConfig::default()
        };
        let cmp = compare_structures(&model, &normal, &edited, dim, &cfg)?;
        out.json("comparison.json", &cmp)?;
        let phis =
            |v: &[blendnet::attrib::DimensionSample]| v.iter().map(|s| s.phi).collect::<Vec<_>>();
        let strip = strip_plot(
            &Axes {
                title: format!("SHAP value of bit {dim}"),
                x_label: "phi".into(),
                y_label: String::new(),
            },
            &[
                ("normal".into(), phis(&cmp.normal_phi)),
                ("lacking".into(), phis(&cmp.lacking_phi)),
            ],
        );
        out.bytes("dimension.svg", strip.as_bytes())?;
        let sweeps = line_plot(
            &Axes {
                title: format!("{} / {}", args.a, args.b),
                x_label: "fraction of A".into(),
                y_label: "score".into(),
            },
            &[
                Series {
                    name: "normal".into(),
                    points: cmp.normal_sweep.points().collect(),
                },
                Series {
                    name: "lacking".into(),
                    points: cmp.lacking_sweep.points().collect(),
                },
            ],
            Some(&Rule {
                label: "criterion".into(),
                y: model.criterion,
            }),
        );
        out.bytes("sweeps.svg", sweeps.as_bytes())?;
        return Ok(());
    }

    let background = match &args.background {
        None => Vec::new(),
        Some(p) => {
            require_file(p, "background dataset")?;
            let entries = load_entries(p)?.into_strict()?;
            vectorize_all(&entries, model.lambda, params)?
        }
    };
    let instance = ModelInput::canonical(fa.clone(), fb, args.fraction, 0.0)?;
    let a_first = instance.fp_first == fa;
    let mut req = AttributionRequest::new(&model, &instance);
    req.background = &background;
    req.baseline = match args.baseline {
        Baseline::Zero => BaselineKind::ZeroFingerprint,
        Baseline::Mean => BaselineKind::BackgroundMean,
    };
    req.n_samples = args.samples;
    req.seed = args.seed;
    let rep = if args.exact {
        exact_shapley(&req)?
    } else {
        shapley_sample(&req)?
    };
    let (first, second) = if a_first { ("a", "b") } else { ("b", "a") };
    let features = rep
        .features
        .iter()
        .zip(&rep.values)
        .map(|(f, &phi)| match *f {
            Feature::First(bit) => FeatureValue {
                source: first,
                bit: Some(bit),
                phi,
            },
            Feature::Second(bit) => FeatureValue {
                source: second,
                bit: Some(bit),
                phi,
            },
            Feature::Composition => FeatureValue {
                source: "composition",
                bit: None,
                phi,
            },
        })
        .collect();
    let report = Report {
        a: &args.a,
        b: &args.b,
        fraction_a: args.fraction,
        instance_value: rep.instance_value,
        baseline_value: rep.baseline_value,
        residual: rep.residual,
        samples: rep.samples,
        features,
    };
    let Some(dir) = &args.out else {
        return print_json(&report);
    };
    let out = Outputs::new(dir, "attribute", args)?;
    out.json("attribution.json", &report)?;
    out.csv("attribution.csv", &report.features)?;
    let group = |src: &str| -> Vec<f64> {
        report
            .features
            .iter()
            .filter(|f| f.source == src)
            .map(|f| f.phi)
            .collect()
    };
    let strip = strip_plot(
        &Axes {
            title: "SHAP values".into(),
            x_label: "phi".into(),
            y_label: String::new(),
        },
        &[
            ("A bits".into(), group("a")),
            ("B bits".into(), group("b")),
            ("composition".into(), group("composition")),
        ],
    );
    out.bytes("attribution.svg", strip.as_bytes())?;
    Ok(())
}
