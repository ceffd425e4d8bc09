use std::path::PathBuf;

use anyhow::{Context, Result};
use blendnet::chem::FingerprintParams;
use blendnet::data::{
    default_pool, gen_synthetic, load_entries, split as divide, write_entries, RowReject,
    SplitManifest, SplitMode, SplitSpec, SynthConfig, DEFAULT_ALPHA, DEFAULT_T0,
};
use clap::Args;
use serde::Serialize;

use crate::artifact::{invalid, Outputs};

#[derive(Args, Debug)]
pub struct GenSynthArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Similarity threshold at the 50/50 composition
    #[arg(long, default_value_t = DEFAULT_T0)]
    pub t0: f64,
    /// How much the threshold relaxes towards pure compositions
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    /// File with one repeating-unit SMILES per line (default: built-in pool)
    #[arg(long)]
    pub pool: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct SynthResolved<'a> {
    n: usize,
    seed: u64,
    t0: f64,
    alpha: f64,
    fingerprint: FingerprintParams,
    pool: &'a [String],
}

fn file_parts(out: &std::path::Path) -> Result<(PathBuf, String)> {
    let name = out
        .file_name()
        .ok_or_else(|| invalid(format!("--out {} has no file name", out.display())))?
        .to_string_lossy()
        .into_owned();
    let dir = out.parent().map(PathBuf::from).unwrap_or_default();
    Ok((dir, name))
}

pub fn gen_synth(args: &GenSynthArgs) -> Result<()> {
    let pool = match &args.pool {
        None => default_pool(),
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| invalid(format!("cannot read pool {}: {e}", p.display())))?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(String::from)
            .collect(),
    };
    let cfg = SynthConfig {
        t0: args.t0,
        alpha: args.alpha,
        pool,
        ..SynthConfig::new(args.n, args.seed)
    };
    let entries = gen_synthetic(&cfg)?;
    let resolved = SynthResolved {
        n: cfg.n,
        seed: cfg.seed,
        t0: cfg.t0,
        alpha: cfg.alpha,
        fingerprint: cfg.params,
        pool: &cfg.pool,
    };
    let (dir, name) = file_parts(&args.out)?;
    let outputs = Outputs::new(dir, "gen-synth", &resolved)?;
    let mut buf = Vec::new();
    write_entries(&mut buf, &entries)?;
    outputs.bytes(&name, &buf)?;
    let incompatible = entries.iter().filter(|e| e.label.is_incompatible()).count();
    eprintln!(
        "wrote {} entries ({incompatible} incompatible) to {}",
        entries.len(),
        args.out.display()
    );
    Ok(())
}

#[derive(Args, Debug)]
pub struct SplitArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value = "random")]
    pub mode: SplitMode,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// train,valid,test fractions
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.64, 0.16, 0.20])]
    pub ratios: Vec<f64>,
    /// Fail on the first malformed row instead of skipping it
    #[arg(long)]
    pub strict: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct SplitResolved<'a> {
    input: &'a PathBuf,
    spec: SplitSpec,
    strict: bool,
}

#[derive(Serialize)]
struct SplitReport<'a> {
    #[serde(flatten)]
    manifest: SplitManifest,
    rows_read: usize,
    rejected: &'a [RowReject],
    config: &'a SplitResolved<'a>,
}

pub fn split(args: &SplitArgs) -> Result<()> {
    let spec = SplitSpec {
        ratios: (args.ratios[0], args.ratios[1], args.ratios[2]),
        ..SplitSpec::new(args.mode, args.seed)
    };
    spec.validate()?;
    let loaded =
        load_entries(&args.input).with_context(|| format!("loading {}", args.input.display()))?;
    let rows_read = loaded.rows_read;
    let rejects = loaded.rejects.clone();
    let entries = if args.strict {
        loaded.into_strict()?
    } else {
        loaded.entries
    };
    for r in &rejects {
        eprintln!("skipped row {}: {}", r.row, r.reason);
    }
    let parts = divide(&entries, &spec)?;
    let resolved = SplitResolved {
        input: &args.input,
        spec,
        strict: args.strict,
    };
    let outputs = Outputs::new(&args.out, "split", &resolved)?;
    for (name, subset) in parts.subsets() {
        let mut buf = Vec::new();
        write_entries(&mut buf, subset)?;
        outputs.bytes(&format!("{name}.csv"), &buf)?;
    }
    let manifest = parts.manifest(&spec);
    let report = SplitReport {
        manifest: manifest.clone(),
        rows_read,
        rejected: &rejects,
        config: &resolved,
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    std::fs::write(outputs.path("manifest.json"), text)?;
    eprintln!(
        "train {} / valid {} / test {} (incompatible {:.1}% / {:.1}% / {:.1}%)",
        manifest.train.size,
        manifest.valid.size,
        manifest.test.size,
        100.0 * manifest.train.incompatible_rate,
        100.0 * manifest.valid.incompatible_rate,
        100.0 * manifest.test.incompatible_rate
    );
    Ok(())
}
