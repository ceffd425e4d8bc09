//! Synthetic blend generator with a known, fingerprint-driven labelling rule.
//!
//! A pair is compatible iff `tanimoto(fp_a, fp_b) > t0 - alpha * |fraction_a - 0.5|`.
//! Compositions are drawn from the 0.01 grid.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{BlendEntry, DataError, Label};
use crate::chem::{fingerprint_smiles, tanimoto, Fingerprint, FingerprintParams};

pub const DEFAULT_T0: f64 = 0.25;
pub const DEFAULT_ALPHA: f64 = 0.3;

/// Repeating units of common commodity and engineering polymers.
const POOL: [&str; 26] = [
    "*CC*",                                 // polyethylene
    "*CC(C)*",                              // polypropylene
    "*CC(*)c1ccccc1",                       // polystyrene
    "*CC(Cl)*",                             // poly(vinyl chloride)
    "*CC(C)(C(=O)OC)*",                     // poly(methyl methacrylate)
    "*CCO*",                                // poly(ethylene oxide)
    "*CC(*)c1ccc(O)cc1",                    // poly(p-hydroxystyrene)
    "*CC(OC(C)=O)*",                        // poly(vinyl acetate)
    "*OC(C)C(=O)*",                         // poly(lactic acid)
    "*CC(O)*",                              // poly(vinyl alcohol)
    "*CC(C#N)*",                            // polyacrylonitrile
    "*CC(F)(F)*",                           // poly(vinylidene fluoride)
    "*CC(C)(C)*",                           // polyisobutylene
    "*CC=CC*",                              // polybutadiene
    "*CC(C)=CC*",                           // polyisoprene
    "*CC(C(=O)OC)*",                        // poly(methyl acrylate)
    "*CC(C)(C(=O)OCC)*",                    // poly(ethyl methacrylate)
    "*OCCCCCC(=O)*",                        // polycaprolactone
    "*CC(N1CCCC1=O)*",                      // poly(vinyl pyrrolidone)
    "*CC(C(=O)O)*",                         // poly(acrylic acid)
    "*CC(OC)*",                             // poly(methyl vinyl ether)
    "*Oc1c(C)cc(*)cc1C",                    // poly(phenylene oxide)
    "*NCCCCCC(=O)*",                        // nylon 6
    "*OCCOC(=O)c1ccc(cc1)C(=O)*",           // poly(ethylene terephthalate)
    "*Oc1ccc(cc1)C(C)(C)c1ccc(cc1)OC(=O)*", // bisphenol A polycarbonate
    "*C(F)(F)C(F)(F)*",                     // polytetrafluoroethylene
];

pub fn default_pool() -> Vec<String> {
    POOL.iter().map(|s| s.to_string()).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub n: usize,
    pub seed: u64,
    pub pool: Vec<String>,
    pub t0: f64,
    pub alpha: f64,
    /// Fingerprint settings the labelling rule is evaluated with.
    pub params: FingerprintParams,
}

impl SynthConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        SynthConfig {
            n,
            seed,
            pool: default_pool(),
            t0: DEFAULT_T0,
            alpha: DEFAULT_ALPHA,
            params: FingerprintParams::default(),
        }
    }
}

pub fn synthetic_label(similarity: f64, fraction_a: f64, t0: f64, alpha: f64) -> Label {
    if similarity > t0 - alpha * (fraction_a - 0.5).abs() {
        Label::Compatible
    } else {
        Label::Incompatible
    }
}

pub fn gen_synthetic(cfg: &SynthConfig) -> Result<Vec<BlendEntry>, DataError> {
    if cfg.n == 0 {
        return Err(DataError::InvalidSynth("n must be at least 1".into()));
    }
    if !(cfg.t0 > 0.0 && cfg.t0 < 1.0) {
        return Err(DataError::InvalidSynth(format!(
            "t0 {} outside (0, 1)",
            cfg.t0
        )));
    }
    let mut pool: Vec<&str> = cfg.pool.iter().map(String::as_str).collect();
    pool.sort_unstable();
    pool.dedup();
    let fps: Vec<(&str, Fingerprint)> = pool
        .iter()
        .filter_map(|s| fingerprint_smiles(s, cfg.params).ok().map(|fp| (*s, fp)))
        .collect();
    if fps.len() < 8 {
        return Err(DataError::PoolTooSmall(fps.len()));
    }

    let source_id = format!(
        "synthetic:t0={};alpha={};seed={};radius={};width={}",
        cfg.t0, cfg.alpha, cfg.seed, cfg.params.radius, cfg.params.width
    );
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let i = rng.gen_range(0..fps.len());
        let mut j = rng.gen_range(0..fps.len() - 1);
        if j >= i {
            j += 1;
        }
        let fraction_a = f64::from(rng.gen_range(0u32..=100)) / 100.0;
        let sim = tanimoto(&fps[i].1, &fps[j].1)?;
        out.push(BlendEntry {
            smiles_a: fps[i].0.to_string(),
            smiles_b: fps[j].0.to_string(),
            fraction_a,
            label: synthetic_label(sim, fraction_a, cfg.t0, cfg.alpha),
            source_id: source_id.clone(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_units_are_compatible() {
        for f in [0.0, 0.25, 0.5, 1.0] {
            assert_eq!(synthetic_label(1.0, f, 0.99, 0.0), Label::Compatible);
            assert_eq!(
                synthetic_label(1.0, f, DEFAULT_T0, DEFAULT_ALPHA),
                Label::Compatible
            );
        }
    }

    #[test]
    fn zero_alpha_ignores_fraction() {
        for sim in [0.0, 0.1, 0.2, 0.3, 0.6] {
            let at_half = synthetic_label(sim, 0.5, 0.25, 0.0);
            for k in 0..=100 {
                assert_eq!(synthetic_label(sim, k as f64 / 100.0, 0.25, 0.0), at_half);
            }
        }
    }

    #[test]
    fn deterministic_and_audited() {
        let cfg = SynthConfig::new(50, 3);
        let a = gen_synthetic(&cfg).unwrap();
        assert_eq!(a, gen_synthetic(&cfg).unwrap());
        assert_eq!(a.len(), 50);
        assert!(a[0].source_id.contains("t0=0.25;alpha=0.3"));
        assert!(a.iter().all(|e| e.smiles_a != e.smiles_b));
        assert_ne!(a, gen_synthetic(&SynthConfig::new(50, 4)).unwrap());
    }

    #[test]
    fn small_pool_rejected() {
        let mut cfg = SynthConfig::new(10, 0);
        cfg.pool.truncate(7);
        assert!(matches!(
            gen_synthetic(&cfg),
            Err(DataError::PoolTooSmall(7))
        ));
        cfg.pool = vec!["*CC*".into(); 20];
        assert!(matches!(
            gen_synthetic(&cfg),
            Err(DataError::PoolTooSmall(1))
        ));
    }

    #[test]
    fn pool_parses() {
        for s in default_pool() {
            crate::chem::parse_smiles(&s).unwrap();
        }
    }
}
