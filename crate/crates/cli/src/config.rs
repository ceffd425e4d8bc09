//! Run configuration: an optional TOML file, overridden field by field by flags.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use blendnet::zoo::{Dims, ModelVariant, TrainConfig};
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::artifact::invalid;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    splits: Option<PathBuf>,
    out: Option<PathBuf>,
    variant: Option<String>,
    variants: Option<Vec<String>>,
    repeats: Option<usize>,
    model_seed: Option<u64>,
    #[serde(default)]
    train: TrainSection,
    #[serde(default)]
    dims: DimsSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainSection {
    epochs: Option<usize>,
    batch_size: Option<usize>,
    learning_rate: Option<f64>,
    lambda: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DimsSection {
    fp_width: Option<usize>,
    fp_radius: Option<u32>,
    feature_width: Option<usize>,
    n_dense_layers: Option<usize>,
    decision_widths: Option<Vec<usize>>,
}

/// Flags shared by `train` and `ablate`; each overrides the config file.
#[derive(Args, Debug, Default, Clone)]
pub struct RunArgs {
    /// TOML run configuration
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory produced by `split` (train.csv, valid.csv, test.csv, manifest.json)
    #[arg(long)]
    pub splits: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Seed for mini-batch shuffling
    #[arg(long)]
    pub train_seed: Option<u64>,
    /// Seed for weight initialization
    #[arg(long)]
    pub model_seed: Option<u64>,
    #[arg(long)]
    pub fp_width: Option<usize>,
    #[arg(long)]
    pub fp_radius: Option<u32>,
    #[arg(long)]
    pub feature_width: Option<usize>,
    #[arg(long)]
    pub dense_layers: Option<usize>,
    /// Comma-separated hidden widths of the decision head
    #[arg(long, value_delimiter = ',')]
    pub decision_widths: Option<Vec<usize>>,
}

/// Fully resolved configuration; this is what manifests record.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub splits: PathBuf,
    pub out: PathBuf,
    pub variants: Vec<ModelVariant>,
    pub repeats: usize,
    pub model_seed: u64,
    pub train: TrainConfig,
    pub dims: Dims,
}

fn read_file(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| invalid(format!("config {}: {e}", path.display())))
}

fn parse_variants(tags: &[String]) -> Result<Vec<ModelVariant>> {
    tags.iter()
        .map(|t| {
            t.parse::<ModelVariant>()
                .map_err(|e| invalid(e.to_string()))
        })
        .collect()
}

/// Which command is resolving: `train` needs one variant, `ablate` a list
/// plus a repeat count.
#[derive(Clone, Copy, Debug)]
pub enum Selection<'a> {
    Train {
        variant: Option<&'a str>,
    },
    Ablate {
        variants: Option<&'a [String]>,
        repeats: Option<usize>,
    },
}

impl RunConfig {
    pub fn resolve(args: &RunArgs, sel: Selection<'_>) -> Result<RunConfig> {
        let file = match &args.config {
            Some(p) => read_file(p)?,
            None => FileConfig::default(),
        };
        let base_dir = args
            .config
            .as_deref()
            .and_then(Path::parent)
            .map(Path::to_path_buf)
            .unwrap_or_default();
        let rebase = |p: PathBuf| if p.is_relative() { base_dir.join(p) } else { p };

        let splits = args
            .splits
            .clone()
            .or_else(|| file.splits.map(rebase))
            .ok_or_else(|| invalid("no split directory given (--splits or `splits` in config)"))?;
        let out = args
            .out
            .clone()
            .or_else(|| file.out.map(rebase))
            .ok_or_else(|| invalid("no output directory given (--out or `out` in config)"))?;

        let (variants, repeats) = match sel {
            Selection::Train { variant } => {
                let tag = variant.map(str::to_string).or(file.variant);
                let v = match tag {
                    Some(t) => parse_variants(&[t])?,
                    None => vec![ModelVariant::Hddn],
                };
                (v, 1)
            }
            Selection::Ablate { variants, repeats } => {
                let v = match variants.map(<[String]>::to_vec).or(file.variants) {
                    Some(tags) => parse_variants(&tags)?,
                    None => ModelVariant::ALL.to_vec(),
                };
                (v, repeats.or(file.repeats).unwrap_or(5))
            }
        };
        if variants.is_empty() {
            return Err(invalid("variant list is empty"));
        }

        let d = Dims::default();
        let dims = Dims {
            fp_width: args.fp_width.or(file.dims.fp_width).unwrap_or(d.fp_width),
            fp_radius: args
                .fp_radius
                .or(file.dims.fp_radius)
                .unwrap_or(d.fp_radius),
            feature_width: args
                .feature_width
                .or(file.dims.feature_width)
                .unwrap_or(d.feature_width),
            n_dense_layers: args
                .dense_layers
                .or(file.dims.n_dense_layers)
                .unwrap_or(d.n_dense_layers),
            decision_widths: args
                .decision_widths
                .clone()
                .or(file.dims.decision_widths)
                .unwrap_or(d.decision_widths),
        };
        dims.validate()?;

        let t = TrainConfig::default();
        let train = TrainConfig {
            epochs: args.epochs.or(file.train.epochs).unwrap_or(t.epochs),
            batch_size: args
                .batch_size
                .or(file.train.batch_size)
                .unwrap_or(t.batch_size),
            learning_rate: args
                .learning_rate
                .or(file.train.learning_rate)
                .unwrap_or(t.learning_rate),
            lambda: args.lambda.or(file.train.lambda).unwrap_or(t.lambda),
            seed: args.train_seed.or(file.train.seed).unwrap_or(t.seed),
        };
        train.validate()?;

        if repeats == 0 {
            return Err(invalid("repeats must be at least 1"));
        }
        Ok(RunConfig {
            splits,
            out,
            variants,
            repeats,
            model_seed: args.model_seed.or(file.model_seed).unwrap_or(0),
            train,
            dims,
        })
    }

    pub fn check_splits(&self) -> Result<()> {
        for name in ["manifest.json", "train.csv", "valid.csv", "test.csv"] {
            crate::artifact::require_file(&self.splits.join(name), "split file")
                .with_context(|| format!("{} is not a split directory", self.splits.display()))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ablate(repeats: Option<usize>) -> Selection<'static> {
        Selection::Ablate {
            variants: None,
            repeats,
        }
    }

    fn write(text: &str) -> tempfile::NamedTempFile {
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), text).unwrap();
        f
    }

    #[test]
    fn flags_override_file() {
        let f = write(
            "splits = \"/s\"\nout = \"/o\"\nvariant = \"HDDN-noc\"\n[train]\nepochs = 7\nseed = 3\n[dims]\nfp_width = 64\n",
        );
        let args = RunArgs {
            config: Some(f.path().to_path_buf()),
            epochs: Some(9),
            ..RunArgs::default()
        };
        let cfg = RunConfig::resolve(&args, Selection::Train { variant: None }).unwrap();
        assert_eq!(cfg.train.epochs, 9);
        assert_eq!(cfg.train.seed, 3);
        assert_eq!(cfg.dims.fp_width, 64);
        assert_eq!(cfg.dims.feature_width, Dims::default().feature_width);
        assert_eq!(cfg.variants, vec![ModelVariant::NoC]);
        assert_eq!(cfg.splits, PathBuf::from("/s"));
    }

    #[test]
    fn ablate_defaults_to_every_variant() {
        let args = RunArgs {
            splits: Some("s".into()),
            out: Some("o".into()),
            ..RunArgs::default()
        };
        let cfg = RunConfig::resolve(&args, ablate(Some(2))).unwrap();
        assert_eq!(cfg.variants, ModelVariant::ALL.to_vec());
        assert_eq!(cfg.repeats, 2);
    }

    #[test]
    fn rejects_unknown_keys_and_zero_repeats() {
        let f = write("splits = \"s\"\nout = \"o\"\nbogus = 1\n");
        let args = RunArgs {
            config: Some(f.path().to_path_buf()),
            ..RunArgs::default()
        };
        assert!(RunConfig::resolve(&args, Selection::Train { variant: None }).is_err());
        let args = RunArgs {
            splits: Some("s".into()),
            out: Some("o".into()),
            ..RunArgs::default()
        };
        assert!(RunConfig::resolve(&args, ablate(Some(0))).is_err());
        assert!(RunConfig::resolve(
            &args,
            Selection::Train {
                variant: Some("HDDN-bogus")
            }
        )
        .is_err());
    }
}
