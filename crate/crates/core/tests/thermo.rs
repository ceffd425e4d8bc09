//! Heat-of-mixing classification against an independently computed table.

use blendnet::data::Label;
use blendnet::thermo::{
    find_record, hsp_classify, load_hsp_table, read_hsp_table, Units, DEFAULT_HSP_THRESHOLD,
    MPA_SQRT_PER_CAL_SQRT,
};

const TABLE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/hsp_table.csv");
const BLENDS: &str = include_str!("fixtures/hsp_blends.csv");

struct Expected {
    a: String,
    b: String,
    fraction: f64,
    delta_h: f64,
    label: Label,
}

fn expected() -> Vec<Expected> {
    BLENDS
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            Expected {
                a: f[0].into(),
                b: f[1].into(),
                fraction: f[2].parse().unwrap(),
                delta_h: f[3].parse().unwrap(),
                label: f[4].parse().unwrap(),
            }
        })
        .collect()
}

#[test]
fn ten_blends_match_exact_arithmetic() {
    let table = load_hsp_table(TABLE, Units::Cal).unwrap();
    let cases = expected();
    assert_eq!(cases.len(), 10);
    for e in &cases {
        let a = find_record(&table, &e.a).unwrap();
        let b = find_record(&table, &e.b).unwrap();
        let v = hsp_classify(a, b, e.fraction, DEFAULT_HSP_THRESHOLD).unwrap();
        assert!(
            (v.delta_h - e.delta_h).abs() <= 1e-12 * e.delta_h,
            "{}/{}: {} vs {}",
            e.a,
            e.b,
            v.delta_h,
            e.delta_h
        );
        assert_eq!(v.label, e.label, "{}/{}", e.a, e.b);
    }
    let compatible = cases
        .iter()
        .filter(|e| e.label == Label::Compatible)
        .count();
    assert!(compatible > 0 && compatible < cases.len());
}

#[test]
fn si_table_gives_the_same_verdicts() {
    let text = std::fs::read_to_string(TABLE).unwrap();
    let si: String = text
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            match f[1].parse::<f64>() {
                Ok(d) if !l.starts_with('#') => {
                    format!("{},{},{},{}\n", f[0], d * MPA_SQRT_PER_CAL_SQRT, f[2], f[3])
                }
                _ => format!("{l}\n"),
            }
        })
        .collect();
    let table = read_hsp_table(si.as_bytes(), Units::Si).unwrap();
    for e in expected() {
        let a = find_record(&table, &e.a).unwrap();
        let b = find_record(&table, &e.b).unwrap();
        let v = hsp_classify(a, b, e.fraction, DEFAULT_HSP_THRESHOLD).unwrap();
        assert!((v.delta_h - e.delta_h).abs() <= 1e-9 * e.delta_h.max(1e-12));
        assert_eq!(v.label, e.label);
    }
}
