use std::collections::BTreeMap;

use anyhow::Result;
use blendnet::chem::{ecfp_explained, parse_smiles, DEFAULT_RADIUS, DEFAULT_WIDTH};
use clap::Args;
use serde::Serialize;

use crate::artifact::print_json;

#[derive(Args, Debug)]
pub struct FpArgs {
    #[arg(long)]
    pub smiles: String,
    #[arg(long, default_value_t = DEFAULT_RADIUS)]
    pub radius: u32,
    /// Fingerprint width; must be a power of two
    #[arg(long, default_value_t = DEFAULT_WIDTH)]
    pub bits: usize,
    /// Show the (atom, radius) environments behind each bit
    #[arg(long)]
    pub explain: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Serialize)]
struct Environment {
    atom: usize,
    element: &'static str,
    radius: u32,
}

#[derive(Serialize)]
struct FpReport<'a> {
    smiles: &'a str,
    width: usize,
    radius: u32,
    bits: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    environments: Option<BTreeMap<usize, Vec<Environment>>>,
}

pub fn fp(args: &FpArgs) -> Result<()> {
    let mol = parse_smiles(&args.smiles)?;
    let (fp, origins) = ecfp_explained(&mol, args.radius, args.bits)?;
    let mut envs: BTreeMap<usize, Vec<Environment>> = BTreeMap::new();
    for o in origins {
        envs.entry(o.bit).or_default().push(Environment {
            atom: o.atom,
            element: mol.atoms[o.atom].element.symbol(),
            radius: o.radius,
        });
    }
    for list in envs.values_mut() {
        list.sort_by_key(|e| (e.radius, e.atom));
        list.dedup_by_key(|e| (e.radius, e.atom));
    }
    let report = FpReport {
        smiles: &args.smiles,
        width: fp.width(),
        radius: fp.radius(),
        bits: fp.on_bits().collect(),
        environments: args.explain.then_some(envs),
    };
    if args.json {
        return print_json(&report);
    }
    println!(
        "# {} width={} radius={} set={}",
        report.smiles,
        report.width,
        report.radius,
        report.bits.len()
    );
    match &report.environments {
        None => {
            let bits: Vec<String> = report.bits.iter().map(usize::to_string).collect();
            println!("{}", bits.join(" "));
        }
        Some(envs) => {
            for (bit, list) in envs {
                let parts: Vec<String> = list
                    .iter()
                    .map(|e| format!("{}{}@r{}", e.element, e.atom, e.radius))
                    .collect();
                println!("{bit}\t{}", parts.join(" "));
            }
        }
    }
    Ok(())
}
