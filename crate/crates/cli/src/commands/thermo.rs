use std::path::PathBuf;

use anyhow::Result;
use blendnet::data::Label;
use blendnet::thermo::{
    chi_from_hsp_in, find_record, flory_huggins_dg, hsp_classify, load_hsp_table,
    FloryHugginsInput, Units, DEFAULT_HSP_THRESHOLD,
};
use clap::Args;
use serde::Serialize;

use crate::artifact::{invalid, print_json};

#[derive(Args, Debug)]
pub struct HspArgs {
    /// CSV with polymer_name,delta,density,molar_mass_repeat
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long)]
    pub a: String,
    #[arg(long)]
    pub b: String,
    /// Repeat-unit mole fraction of A
    #[arg(long, default_value_t = 0.5)]
    pub fraction: f64,
    /// Heat-of-mixing threshold, cal/g
    #[arg(long, default_value_t = DEFAULT_HSP_THRESHOLD)]
    pub threshold: f64,
    /// Units of the table's delta column: cal ((cal/cm³)^½) or si (MPa^½)
    #[arg(long, default_value = "cal")]
    pub units: Units,
}

#[derive(Serialize)]
struct HspReport<'a> {
    a: &'a str,
    b: &'a str,
    fraction_a: f64,
    delta_a: f64,
    delta_b: f64,
    delta_h: f64,
    threshold: f64,
    label: Label,
}

pub fn hsp(args: &HspArgs) -> Result<()> {
    let table = load_hsp_table(&args.table, args.units)?;
    let a = find_record(&table, &args.a)?;
    let b = find_record(&table, &args.b)?;
    let v = hsp_classify(a, b, args.fraction, args.threshold)?;
    print_json(&HspReport {
        a: &a.polymer_name,
        b: &b.polymer_name,
        fraction_a: args.fraction,
        delta_a: a.delta,
        delta_b: b.delta,
        delta_h: v.delta_h,
        threshold: v.threshold,
        label: v.label,
    })
}

#[derive(Args, Debug)]
pub struct FhArgs {
    /// Moles of component 1
    #[arg(long)]
    pub n1: f64,
    #[arg(long)]
    pub n2: f64,
    /// Volume fraction of component 1
    #[arg(long)]
    pub phi1: f64,
    /// Defaults to 1 − phi1
    #[arg(long)]
    pub phi2: Option<f64>,
    /// Interaction parameter; otherwise computed from --volume/--temperature/--delta1/--delta2
    #[arg(long, conflicts_with_all = ["volume", "temperature", "delta1", "delta2"])]
    pub chi: Option<f64>,
    /// Reference segment volume, cm³/mol
    #[arg(long, requires_all = ["temperature", "delta1", "delta2"])]
    pub volume: Option<f64>,
    /// Kelvin
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub delta1: Option<f64>,
    #[arg(long)]
    pub delta2: Option<f64>,
    /// Units of delta1/delta2: cal or si
    #[arg(long, default_value = "cal")]
    pub units: Units,
}

#[derive(Serialize)]
struct FhReport {
    #[serde(flatten)]
    input: FloryHugginsInput,
    /// ΔG_M / RT
    dg_over_rt: f64,
}

pub fn fh(args: &FhArgs) -> Result<()> {
    let chi = match (
        args.chi,
        args.volume,
        args.temperature,
        args.delta1,
        args.delta2,
    ) {
        (Some(c), ..) => c,
        (None, Some(v), Some(t), Some(d1), Some(d2)) => chi_from_hsp_in(args.units, v, t, d1, d2)?,
        _ => {
            return Err(invalid(
                "give --chi, or all of --volume --temperature --delta1 --delta2",
            ))
        }
    };
    let input = FloryHugginsInput {
        n1: args.n1,
        n2: args.n2,
        phi1: args.phi1,
        phi2: args.phi2.unwrap_or(1.0 - args.phi1),
        chi12: chi,
    };
    let dg = flory_huggins_dg(&input)?;
    print_json(&FhReport {
        input,
        dg_over_rt: dg,
    })
}
