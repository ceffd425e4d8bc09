use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use blendnet::chem::FingerprintParams;
use blendnet::data::{load_entries, vectorize_all, ModelInput, SplitMode};
use blendnet::plot::{line_plot, Axes, Rule, Series};
use blendnet::stats::{confusion, mean_squared_error, metrics, ConfusionMatrix, MetricsReport};
use blendnet::zoo::{
    build_model, composition_sweep, load_checkpoint, save_checkpoint, train_observed,
    ModelInstance, ModelVariant, TrainHistory,
};
use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artifact::{invalid, print_json, require_file, Outputs};
use crate::config::{RunArgs, RunConfig, Selection};

fn load_inputs(path: &Path, lambda: f64, params: FingerprintParams) -> Result<Vec<ModelInput>> {
    require_file(path, "dataset")?;
    let entries = load_entries(path)
        .and_then(|r| r.into_strict())
        .with_context(|| format!("loading {}", path.display()))?;
    Ok(vectorize_all(&entries, lambda, params)?)
}

fn load_model(path: &Path) -> Result<ModelInstance> {
    require_file(path, "checkpoint")?;
    load_checkpoint(path).with_context(|| format!("reading {}", path.display()))
}

/// Test-set style report of one model on one dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub n: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricsReport,
}

fn evaluate(model: &ModelInstance, inputs: &[ModelInput]) -> Result<Evaluation> {
    let scores = model.predict_batch(inputs)?;
    let targets: Vec<f64> = inputs.iter().map(|i| i.target).collect();
    let preds: Vec<_> = scores.iter().map(|&s| model.classify(s)).collect();
    let labels: Vec<_> = targets
        .iter()
        .map(|&t| blendnet::zoo::classify(t, model.criterion))
        .collect();
    let cm = confusion(&preds, &labels)?;
    Ok(Evaluation {
        n: inputs.len(),
        confusion: cm,
        metrics: metrics(&cm, mean_squared_error(&scores, &targets)?),
    })
}

#[derive(Serialize)]
struct HistoryRow {
    epoch: usize,
    train_loss: f64,
    valid_accuracy: f64,
    test_accuracy: Option<f64>,
}

fn history_rows(h: &TrainHistory) -> Vec<HistoryRow> {
    (0..h.epochs_run())
        .map(|i| HistoryRow {
            epoch: i + 1,
            train_loss: h.train_loss[i],
            valid_accuracy: h.valid_accuracy[i],
            test_accuracy: h.test_accuracy.as_ref().map(|t| t[i]),
        })
        .collect()
}

fn history_svg(variant: ModelVariant, h: &TrainHistory) -> String {
    let epochs = |v: &[f64]| -> Vec<(f64, f64)> {
        v.iter()
            .enumerate()
            .map(|(i, &a)| ((i + 1) as f64, a))
            .collect()
    };
    let mut series = vec![Series {
        name: "valid".into(),
        points: epochs(&h.valid_accuracy),
    }];
    if let Some(t) = &h.test_accuracy {
        series.push(Series {
            name: "test".into(),
            points: epochs(t),
        });
    }
    let axes = Axes {
        title: format!("{variant} accuracy per epoch"),
        x_label: "epoch".into(),
        y_label: "accuracy".into(),
    };
    line_plot(&axes, &series, None)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct TrainReport {
    variant: ModelVariant,
    model_seed: u64,
    train_seed: u64,
    epochs_run: usize,
    selected_epoch: Option<usize>,
    train: Evaluation,
    valid: Evaluation,
    test: Evaluation,
}

struct SplitData {
    train: Vec<ModelInput>,
    valid: Vec<ModelInput>,
    test: Vec<ModelInput>,
    mode: Option<SplitMode>,
}

fn load_split(cfg: &RunConfig) -> Result<SplitData> {
    cfg.check_splits()?;
    let params = cfg.dims.fingerprint_params();
    let load = |name: &str| load_inputs(&cfg.splits.join(name), cfg.train.lambda, params);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(cfg.splits.join("manifest.json"))?)
            .map_err(|e| invalid(format!("split manifest: {e}")))?;
    let mode = manifest
        .get("mode")
        .and_then(|m| serde_json::from_value(m.clone()).ok());
    Ok(SplitData {
        train: load("train.csv")?,
        valid: load("valid.csv")?,
        test: load("test.csv")?,
        mode,
    })
}

/// Trains one model and writes its checkpoint, history and report into `dir`.
fn run_job(
    cfg: &RunConfig,
    data: &SplitData,
    variant: ModelVariant,
    repeat: u64,
    dir: &Path,
) -> Result<TrainReport> {
    let mut train_cfg = cfg.train.clone();
    train_cfg.seed += repeat;
    let model_seed = cfg.model_seed + repeat;
    let init = build_model(variant, &cfg.dims, model_seed)?;
    let (model, history) = train_observed(
        &init,
        &data.train,
        &data.valid,
        Some(&data.test),
        &train_cfg,
    )
    .with_context(|| format!("training {variant} (repeat {repeat})"))?;
    let report = TrainReport {
        variant,
        model_seed,
        train_seed: train_cfg.seed,
        epochs_run: history.epochs_run(),
        selected_epoch: history.selected_epoch,
        train: evaluate(&model, &data.train)?,
        valid: evaluate(&model, &data.valid)?,
        test: evaluate(&model, &data.test)?,
    };
    #[derive(Serialize)]
    struct JobConfig<'a> {
        run: &'a RunConfig,
        variant: ModelVariant,
        repeat: u64,
        model_seed: u64,
        train_seed: u64,
    }
    let job = JobConfig {
        run: cfg,
        variant,
        repeat,
        model_seed,
        train_seed: train_cfg.seed,
    };
    let out = Outputs::new(dir, "train", &job)?;
    save_checkpoint(&model, out.path("checkpoint.json"))?;
    out.sidecar("checkpoint.json")?;
    out.csv("history.csv", history_rows(&history))?;
    out.bytes("history.svg", history_svg(variant, &history).as_bytes())?;
    out.json("report.json", &report)?;
    Ok(report)
}

fn pct(x: Option<f64>) -> String {
    x.map_or_else(|| "undefined".into(), |v| format!("{:.2}%", 100.0 * v))
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// HDDN, HDDN-noc, HDDN-nodense, HDDN-nodiff, HDDN-noabs, MLP, CDN or DN
    #[arg(long)]
    pub variant: Option<String>,
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let cfg = RunConfig::resolve(
        &args.run,
        Selection::Train {
            variant: args.variant.as_deref(),
        },
    )?;
    let data = load_split(&cfg)?;
    let variant = cfg.variants[0];
    let r = run_job(&cfg, &data, variant, 0, &cfg.out)?;
    eprintln!(
        "{variant}: selected epoch {:?} of {}; train {} valid {} test {}",
        r.selected_epoch,
        r.epochs_run,
        pct(r.train.metrics.accuracy),
        pct(r.valid.metrics.accuracy),
        pct(r.test.metrics.accuracy)
    );
    Ok(())
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Write eval.json and eval.csv here instead of printing
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct EvalRow {
    n: usize,
    mse: f64,
    accuracy: Option<f64>,
    precision: Option<f64>,
    recall: Option<f64>,
    specificity: Option<f64>,
    f1: Option<f64>,
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let model = load_model(&args.checkpoint)?;
    let inputs = load_inputs(&args.input, model.lambda, model.dims.fingerprint_params())?;
    let e = evaluate(&model, &inputs)?;
    let Some(dir) = &args.out else {
        return print_json(&e);
    };
    #[derive(Serialize)]
    struct Resolved<'a> {
        checkpoint: &'a PathBuf,
        input: &'a PathBuf,
        variant: ModelVariant,
    }
    let resolved = Resolved {
        checkpoint: &args.checkpoint,
        input: &args.input,
        variant: model.variant,
    };
    let out = Outputs::new(dir, "eval", &resolved)?;
    out.json("eval.json", &e)?;
    let m = e.metrics;
    out.csv(
        "eval.csv",
        [EvalRow {
            n: e.n,
            mse: m.mse,
            accuracy: m.accuracy,
            precision: m.precision,
            recall: m.recall,
            specificity: m.specificity,
            f1: m.f1,
        }],
    )?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct AblateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Comma-separated variant tags (default: all eight)
    #[arg(long, value_delimiter = ',')]
    pub variants: Option<Vec<String>>,
    #[arg(long)]
    pub repeats: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
struct Spread {
    mean: f64,
    min: f64,
    max: f64,
    /// Runs in which the metric was defined.
    runs: usize,
}

fn spread(values: impl Iterator<Item = Option<f64>>) -> Option<Spread> {
    let v: Vec<f64> = values.flatten().collect();
    if v.is_empty() {
        return None;
    }
    Some(Spread {
        mean: v.iter().sum::<f64>() / v.len() as f64,
        min: v.iter().copied().fold(f64::INFINITY, f64::min),
        max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        runs: v.len(),
    })
}

#[derive(Serialize)]
struct AblationRow {
    variant: ModelVariant,
    repeats: usize,
    mse: Option<Spread>,
    accuracy: Option<Spread>,
    precision: Option<Spread>,
    recall: Option<Spread>,
    specificity: Option<Spread>,
    f1: Option<Spread>,
}

/// The tabular form: one row per variant, mean of each test metric.
#[derive(Serialize)]
struct AblationCsvRow {
    variant: ModelVariant,
    mse: Option<f64>,
    accuracy: Option<f64>,
    precision: Option<f64>,
    recall: Option<f64>,
    specificity: Option<f64>,
    f1: Option<f64>,
}

/// Below this mean test accuracy HDDN on a balanced split is flagged.
const BALANCED_HDDN_FLOOR: f64 = 0.65;

pub fn ablate(args: &AblateArgs) -> Result<()> {
    let sel = Selection::Ablate {
        variants: args.variants.as_deref(),
        repeats: args.repeats,
    };
    let cfg = RunConfig::resolve(&args.run, sel)?;
    let data = load_split(&cfg)?;
    let jobs: Vec<(ModelVariant, u64)> = cfg
        .variants
        .iter()
        .flat_map(|&v| (0..cfg.repeats as u64).map(move |r| (v, r)))
        .collect();
    let reports: Vec<TrainReport> = jobs
        .par_iter()
        .map(|&(v, r)| {
            let dir = cfg.out.join("jobs").join(format!("{}-r{r}", v.tag()));
            run_job(&cfg, &data, v, r, &dir)
        })
        .collect::<Result<_>>()?;

    let rows: Vec<AblationRow> = cfg
        .variants
        .iter()
        .map(|&v| {
            let mine: Vec<&MetricsReport> = reports
                .iter()
                .filter(|r| r.variant == v)
                .map(|r| &r.test.metrics)
                .collect();
            AblationRow {
                variant: v,
                repeats: mine.len(),
                mse: spread(mine.iter().map(|m| Some(m.mse))),
                accuracy: spread(mine.iter().map(|m| m.accuracy)),
                precision: spread(mine.iter().map(|m| m.precision)),
                recall: spread(mine.iter().map(|m| m.recall)),
                specificity: spread(mine.iter().map(|m| m.specificity)),
                f1: spread(mine.iter().map(|m| m.f1)),
            }
        })
        .collect();
    let mean = |s: Option<Spread>| s.map(|s| s.mean);
    let csv_rows = rows.iter().map(|r| AblationCsvRow {
        variant: r.variant,
        mse: mean(r.mse),
        accuracy: mean(r.accuracy),
        precision: mean(r.precision),
        recall: mean(r.recall),
        specificity: mean(r.specificity),
        f1: mean(r.f1),
    });
    let out = Outputs::new(&cfg.out, "ablate", &cfg)?;
    out.csv("ablation.csv", csv_rows)?;

    let mut warnings = Vec::new();
    if data.mode == Some(SplitMode::Balanced) {
        if let Some(acc) = rows
            .iter()
            .find(|r| r.variant == ModelVariant::Hddn)
            .and_then(|r| r.accuracy)
        {
            if acc.mean < BALANCED_HDDN_FLOOR {
                warnings.push(format!(
                    "HDDN mean test accuracy {:.2}% on a balanced split is below {:.0}%",
                    100.0 * acc.mean,
                    100.0 * BALANCED_HDDN_FLOOR
                ));
            }
        }
    }
    #[derive(Serialize)]
    struct Ablation<'a> {
        rows: &'a [AblationRow],
        warnings: &'a [String],
    }
    out.json(
        "ablation.json",
        &Ablation {
            rows: &rows,
            warnings: &warnings,
        },
    )?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    for r in &rows {
        eprintln!("{:<13} accuracy {}", r.variant.tag(), pct(mean(r.accuracy)));
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// SMILES of polymer A
    #[arg(long, requires_all = ["b", "fraction"], conflicts_with = "input")]
    pub a: Option<String>,
    #[arg(long)]
    pub b: Option<String>,
    /// Fraction of polymer A
    #[arg(long)]
    pub fraction: Option<f64>,
    /// Score every row of a dataset CSV instead
    #[arg(long = "in", requires = "out")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Prediction {
    score: f64,
    label: blendnet::data::Label,
    criterion: f64,
}

#[derive(Serialize)]
struct PredictionRow {
    row: usize,
    score: f64,
    predicted: blendnet::data::Label,
    label: blendnet::data::Label,
}

pub fn predict(args: &PredictArgs) -> Result<()> {
    let model = load_model(&args.checkpoint)?;
    if let (Some(a), Some(b), Some(f)) = (&args.a, &args.b, args.fraction) {
        if !(0.0..=1.0).contains(&f) {
            return Err(invalid(format!("fraction {f} outside [0, 1]")));
        }
        let params = model.dims.fingerprint_params();
        let fa = blendnet::chem::fingerprint_smiles(a, params)?;
        let fb = blendnet::chem::fingerprint_smiles(b, params)?;
        let input = ModelInput::canonical(fa, fb, f, 0.0)?;
        let score = model.predict(&input)?;
        return print_json(&Prediction {
            score,
            label: model.classify(score),
            criterion: model.criterion,
        });
    }
    let (Some(input), Some(dir)) = (&args.input, &args.out) else {
        return Err(invalid("give either --a/--b/--fraction or --in/--out"));
    };
    let inputs = load_inputs(input, model.lambda, model.dims.fingerprint_params())?;
    let scores = model.predict_batch(&inputs)?;
    let rows = scores
        .iter()
        .zip(&inputs)
        .enumerate()
        .map(|(i, (&s, x))| PredictionRow {
            row: i + 1,
            score: s,
            predicted: model.classify(s),
            label: blendnet::zoo::classify(x.target, model.criterion),
        });
    #[derive(Serialize)]
    struct Resolved<'a> {
        checkpoint: &'a PathBuf,
        input: &'a PathBuf,
        variant: ModelVariant,
    }
    let resolved = Resolved {
        checkpoint: &args.checkpoint,
        input,
        variant: model.variant,
    };
    Outputs::new(dir, "predict", &resolved)?.csv("predictions.csv", rows)?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub a: String,
    #[arg(long)]
    pub b: String,
    #[arg(long, default_value_t = 21)]
    pub steps: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct SweepRow {
    fraction_a: f64,
    score: f64,
    label: blendnet::data::Label,
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    let model = load_model(&args.checkpoint)?;
    let s = composition_sweep(&model, &args.a, &args.b, args.steps)?;
    #[derive(Serialize)]
    struct Resolved<'a> {
        checkpoint: &'a PathBuf,
        a: &'a str,
        b: &'a str,
        steps: usize,
        variant: ModelVariant,
    }
    let resolved = Resolved {
        checkpoint: &args.checkpoint,
        a: &args.a,
        b: &args.b,
        steps: args.steps,
        variant: model.variant,
    };
    let out = Outputs::new(&args.out, "sweep", &resolved)?;
    out.csv(
        "sweep.csv",
        s.points().map(|(f, score)| SweepRow {
            fraction_a: f,
            score,
            label: model.classify(score),
        }),
    )?;
    out.json("sweep.json", &s)?;
    let axes = Axes {
        title: format!("{} / {}", args.a, args.b),
        x_label: "fraction of A".into(),
        y_label: "score".into(),
    };
    let series = Series {
        name: model.variant.tag().into(),
        points: s.points().collect(),
    };
    let rule = Rule {
        label: format!("criterion {}", s.criterion),
        y: s.criterion,
    };
    out.bytes(
        "sweep.svg",
        line_plot(&axes, &[series], Some(&rule)).as_bytes(),
    )?;
    Ok(())
}
