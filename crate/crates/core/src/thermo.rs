//! Solubility-parameter baselines: Flory–Huggins free energy of mixing,
//! χ from Hildebrand parameters, and a heat-of-mixing threshold classifier.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Label;

/// Gas constant in cal/(mol·K), consistent with δ in (cal/cm³)^½.
pub const R_CAL: f64 = 1.98720;
/// Gas constant in J/(mol·K), consistent with δ in MPa^½.
pub const R_SI: f64 = 8.314462618;
/// One (cal/cm³)^½ expressed in MPa^½.
pub const MPA_SQRT_PER_CAL_SQRT: f64 = 2.045_482_828_927_957;
pub const DEFAULT_HSP_THRESHOLD: f64 = 0.010;

#[derive(Debug, Error)]
pub enum ThermoError {
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("{polymer}: missing {field}")]
    MissingField {
        polymer: String,
        field: &'static str,
    },
    #[error("unknown polymer {0:?}")]
    UnknownPolymer(String),
    #[error("row {row}: {reason}")]
    BadRow { row: u64, reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Unit system of solubility parameters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    /// δ in (cal/cm³)^½, R in cal/(mol·K)
    #[default]
    Cal,
    /// δ in MPa^½, R in J/(mol·K)
    Si,
}

impl Units {
    pub fn gas_constant(self) -> f64 {
        match self {
            Units::Cal => R_CAL,
            Units::Si => R_SI,
        }
    }

    /// Converts a solubility parameter in these units to (cal/cm³)^½.
    pub fn delta_to_cal(self, delta: f64) -> f64 {
        match self {
            Units::Cal => delta,
            Units::Si => delta / MPA_SQRT_PER_CAL_SQRT,
        }
    }
}

impl std::str::FromStr for Units {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cal" => Ok(Units::Cal),
            "si" | "SI" => Ok(Units::Si),
            other => Err(format!("unknown unit system '{other}' (cal or si)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloryHugginsInput {
    pub n1: f64,
    pub n2: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub chi12: f64,
}

/// `ΔG_M / RT = n1 ln φ1 + n2 ln φ2 + n1 φ2 χ12`.
///
/// The interaction term is written with component 1's moles, so swapping the
/// components does not in general give the same value.
pub fn flory_huggins_dg(inp: &FloryHugginsInput) -> Result<f64, ThermoError> {
    let FloryHugginsInput {
        n1,
        n2,
        phi1,
        phi2,
        chi12,
    } = *inp;
    for (name, phi) in [("phi1", phi1), ("phi2", phi2)] {
        if !(phi > 0.0 && phi < 1.0) {
            return Err(ThermoError::DomainError(format!(
                "{name} = {phi} outside (0, 1)"
            )));
        }
    }
    if (phi1 + phi2 - 1.0).abs() > 1e-9 {
        return Err(ThermoError::DomainError(format!(
            "volume fractions sum to {}",
            phi1 + phi2
        )));
    }
    if !(n1 >= 0.0 && n2 >= 0.0) || !chi12.is_finite() {
        return Err(ThermoError::DomainError(
            "moles must be non-negative, χ finite".into(),
        ));
    }
    Ok(n1 * phi1.ln() + n2 * phi2.ln() + n1 * phi2 * chi12)
}

/// `χ12 = v (δ1 − δ2)² / (R T)` in calorie units.
pub fn chi_from_hsp(v: f64, t: f64, d1: f64, d2: f64) -> Result<f64, ThermoError> {
    chi_from_hsp_in(Units::Cal, v, t, d1, d2)
}

/// Like [`chi_from_hsp`] with δ and R in the given unit system; `v` is always cm³/mol.
pub fn chi_from_hsp_in(units: Units, v: f64, t: f64, d1: f64, d2: f64) -> Result<f64, ThermoError> {
    if !(v > 0.0 && t > 0.0) {
        return Err(ThermoError::DomainError(format!(
            "segment volume {v} and temperature {t} must be positive"
        )));
    }
    Ok(v * (d1 - d2).powi(2) / (units.gas_constant() * t))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HspRecord {
    pub polymer_name: String,
    /// (cal/cm³)^½
    pub delta: f64,
    /// g/cm³
    pub density: Option<f64>,
    /// g/mol of repeat unit
    pub molar_mass_repeat: Option<f64>,
}

impl HspRecord {
    fn require(&self) -> Result<(f64, f64), ThermoError> {
        let missing = |field| ThermoError::MissingField {
            polymer: self.polymer_name.clone(),
            field,
        };
        let rho = self.density.ok_or_else(|| missing("density"))?;
        let m = self
            .molar_mass_repeat
            .ok_or_else(|| missing("molar_mass_repeat"))?;
        if !(rho > 0.0 && m > 0.0 && self.delta > 0.0) {
            return Err(ThermoError::DomainError(format!(
                "{}: delta, density and molar mass must be positive",
                self.polymer_name
            )));
        }
        Ok((rho, m))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HspVerdict {
    pub label: Label,
    /// Heat of mixing in cal per gram of blend.
    pub delta_h: f64,
    pub threshold: f64,
}

/// Heat of mixing per gram of blend, after Schneier (J. Appl. Polym. Sci. 17,
/// 3175, 1973), in the Hildebrand–Scatchard form
///
/// ```text
/// ΔH_m = V φ1 φ2 (δ1 − δ2)² / (x1 M1 + x2 M2),   v_i = x_i M_i / ρ_i,  V = v1 + v2
/// ```
///
/// where `x_i` is the repeat-unit mole fraction, `M_i` the repeat-unit molar
/// mass and `ρ_i` the density.
pub fn mixing_enthalpy(a: &HspRecord, b: &HspRecord, fraction_a: f64) -> Result<f64, ThermoError> {
    let (rho1, m1) = a.require()?;
    let (rho2, m2) = b.require()?;
    if !(0.0..=1.0).contains(&fraction_a) {
        return Err(ThermoError::DomainError(format!(
            "fraction {fraction_a} outside [0, 1]"
        )));
    }
    let (x1, x2) = (fraction_a, 1.0 - fraction_a);
    let (v1, v2) = (x1 * m1 / rho1, x2 * m2 / rho2);
    let volume = v1 + v2;
    let dd = (a.delta - b.delta).powi(2);
    Ok(v1 * v2 / volume * dd / (x1 * m1 + x2 * m2))
}

/// Compatible iff the heat of mixing does not exceed `threshold`.
pub fn hsp_classify(
    a: &HspRecord,
    b: &HspRecord,
    fraction_a: f64,
    threshold: f64,
) -> Result<HspVerdict, ThermoError> {
    if !(threshold > 0.0) {
        return Err(ThermoError::DomainError(format!(
            "threshold {threshold} must be positive"
        )));
    }
    let delta_h = mixing_enthalpy(a, b, fraction_a)?;
    let label = if delta_h <= threshold {
        Label::Compatible
    } else {
        Label::Incompatible
    };
    Ok(HspVerdict {
        label,
        delta_h,
        threshold,
    })
}

/// Reads `polymer_name,delta,density,molar_mass_repeat`; `#` lines are
/// comments and the last two columns may be blank. δ values are converted to
/// (cal/cm³)^½.
pub fn read_hsp_table(reader: impl Read, units: Units) -> Result<Vec<HspRecord>, ThermoError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let expected = ["polymer_name", "delta", "density", "molar_mass_repeat"];
    if header.iter().ne(expected) {
        return Err(ThermoError::BadRow {
            row: 1,
            reason: format!("header must be {}", expected.join(",")),
        });
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec.position().map_or(0, |p| p.line());
        let bad = |reason: String| ThermoError::BadRow { row, reason };
        let num = |i: usize| -> Result<Option<f64>, ThermoError> {
            match rec.get(i).unwrap_or("") {
                "" => Ok(None),
                s => s
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| bad(format!("column {} is not a number: {s:?}", expected[i]))),
            }
        };
        let name = rec.get(0).unwrap_or("").to_string();
        if name.is_empty() {
            return Err(bad("empty polymer name".into()));
        }
        let delta = num(1)?.ok_or_else(|| bad("missing delta".into()))?;
        if !(delta > 0.0) {
            return Err(bad(format!("delta {delta} must be positive")));
        }
        out.push(HspRecord {
            polymer_name: name,
            delta: units.delta_to_cal(delta),
            density: num(2)?,
            molar_mass_repeat: num(3)?,
        });
    }
    Ok(out)
}

pub fn load_hsp_table(path: impl AsRef<Path>, units: Units) -> Result<Vec<HspRecord>, ThermoError> {
    read_hsp_table(File::open(path)?, units)
}

pub fn find_record<'a>(table: &'a [HspRecord], name: &str) -> Result<&'a HspRecord, ThermoError> {
    table
        .iter()
        .find(|r| r.polymer_name == name)
        .ok_or_else(|| ThermoError::UnknownPolymer(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(name: &str, delta: f64, rho: f64, m: f64) -> HspRecord {
        HspRecord {
            polymer_name: name.into(),
            delta,
            density: Some(rho),
            molar_mass_repeat: Some(m),
        }
    }

    #[test]
    fn flory_huggins_examples() {
        let even = FloryHugginsInput {
            n1: 1.0,
            n2: 1.0,
            phi1: 0.5,
            phi2: 0.5,
            chi12: 0.0,
        };
        assert!((flory_huggins_dg(&even).unwrap() - 2.0 * 0.5f64.ln()).abs() < 1e-12);
        let skew = FloryHugginsInput {
            n1: 2.0,
            n2: 1.0,
            phi1: 0.6,
            phi2: 0.4,
            chi12: 0.5,
        };
        let expected = 2.0 * 0.6f64.ln() + 0.4f64.ln() + 2.0 * 0.4 * 0.5;
        assert!((flory_huggins_dg(&skew).unwrap() - expected).abs() < 1e-12);
        let more = FloryHugginsInput { chi12: 0.6, ..skew };
        assert!(flory_huggins_dg(&more).unwrap() > flory_huggins_dg(&skew).unwrap());
    }

    #[test]
    fn flory_huggins_domain() {
        let bad = FloryHugginsInput {
            n1: 1.0,
            n2: 1.0,
            phi1: 1.0,
            phi2: 0.0,
            chi12: 0.0,
        };
        assert!(matches!(
            flory_huggins_dg(&bad),
            Err(ThermoError::DomainError(_))
        ));
        let unbalanced = FloryHugginsInput {
            phi1: 0.5,
            phi2: 0.6,
            ..bad
        };
        assert!(flory_huggins_dg(&unbalanced).is_err());
    }

    #[test]
    fn chi_examples() {
        assert_eq!(chi_from_hsp(100.0, 298.0, 9.1, 9.1).unwrap(), 0.0);
        let chi = chi_from_hsp(100.0, 298.0, 9.5, 9.1).unwrap();
        assert!((chi - 100.0 * 0.16 / (1.98720 * 298.0)).abs() < 1e-12);
        let wide = chi_from_hsp(100.0, 298.0, 9.9, 9.1).unwrap();
        assert!((wide / chi - 4.0).abs() < 1e-9);
        assert!(chi_from_hsp(0.0, 298.0, 9.0, 9.1).is_err());
        assert!(chi_from_hsp(100.0, -1.0, 9.0, 9.1).is_err());
    }

    #[test]
    fn si_units_agree_with_calorie_units() {
        let cal = chi_from_hsp(100.0, 298.0, 9.5, 9.1).unwrap();
        let k = MPA_SQRT_PER_CAL_SQRT;
        let si = chi_from_hsp_in(Units::Si, 100.0, 298.0, 9.5 * k, 9.1 * k).unwrap();
        // 1.98720 is the thermochemical calorie rounded to six figures
        assert!((si / cal - 1.0).abs() < 1e-5);
    }

    #[test]
    fn equal_delta_is_compatible() {
        let a = rec("A", 9.1, 1.05, 104.15);
        let b = rec("B", 9.1, 1.18, 100.12);
        let v = hsp_classify(&a, &b, 0.5, DEFAULT_HSP_THRESHOLD).unwrap();
        assert_eq!(v.delta_h, 0.0);
        assert_eq!(v.label, Label::Compatible);
    }

    #[test]
    fn hand_computed_enthalpy() {
        let a = rec("A", 9.0, 1.0, 100.0);
        let b = rec("B", 10.0, 2.0, 50.0);
        // v1 = 50, v2 = 12.5, V = 62.5, mass = 75 → 50·12.5/62.5/75 = 2/15
        let h = mixing_enthalpy(&a, &b, 0.5).unwrap();
        assert!((h - 2.0 / 15.0).abs() < 1e-15);
        assert_eq!(mixing_enthalpy(&a, &b, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn missing_fields() {
        let a = rec("A", 9.0, 1.0, 100.0);
        let b = HspRecord {
            density: None,
            ..rec("B", 9.5, 1.0, 50.0)
        };
        assert!(matches!(
            hsp_classify(&a, &b, 0.5, 0.01),
            Err(ThermoError::MissingField {
                field: "density",
                ..
            })
        ));
    }

    #[test]
    fn table_parsing() {
        let text = "# delta in (cal/cm3)^0.5\npolymer_name,delta,density,molar_mass_repeat\nPS,9.1,1.05,104.15\nX,8.0,,\n";
        let t = read_hsp_table(text.as_bytes(), Units::Cal).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[1].density, None);
        assert_eq!(find_record(&t, "PS").unwrap().delta, 9.1);
        assert!(find_record(&t, "PQ").is_err());
        let si = read_hsp_table(text.as_bytes(), Units::Si).unwrap();
        assert!((si[0].delta * MPA_SQRT_PER_CAL_SQRT - 9.1).abs() < 1e-12);
        assert!(read_hsp_table("a,b\n1,2\n".as_bytes(), Units::Cal).is_err());
        assert!(read_hsp_table(
            "polymer_name,delta,density,molar_mass_repeat\nP,-1,,\n".as_bytes(),
            Units::Cal
        )
        .is_err());
    }
}
