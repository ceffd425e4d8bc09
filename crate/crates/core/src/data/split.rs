//! Random and balanced train/valid/test division.
//!
//! Random division is a seeded shuffle cut by the ratios. Balanced division
//! keeps every unordered polymer pair inside a single subset, so test pairs
//! never occur in training or validation, then equalizes classes within each
//! subset by duplicating minority rows.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BlendEntry, DataError, Label};

const MAX_BALANCED_ATTEMPTS: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    Random,
    Balanced,
}

impl std::str::FromStr for SplitMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(SplitMode::Random),
            "balanced" => Ok(SplitMode::Balanced),
            other => Err(format!("unknown split mode '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub mode: SplitMode,
    pub seed: u64,
    /// (train, valid, test)
    pub ratios: (f64, f64, f64),
}

impl SplitSpec {
    pub fn new(mode: SplitMode, seed: u64) -> Self {
        SplitSpec {
            mode,
            seed,
            ratios: (0.64, 0.16, 0.20),
        }
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let (a, b, c) = self.ratios;
        if !(a > 0.0 && b > 0.0 && c > 0.0) {
            return Err(DataError::InvalidSpec(
                "ratios must be strictly positive".into(),
            ));
        }
        if (a + b + c - 1.0).abs() > 1e-9 {
            return Err(DataError::InvalidSpec(format!(
                "ratios sum to {}, not 1",
                a + b + c
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Split {
    pub train: Vec<BlendEntry>,
    pub valid: Vec<BlendEntry>,
    pub test: Vec<BlendEntry>,
}

impl Split {
    pub fn subsets(&self) -> [(&'static str, &[BlendEntry]); 3] {
        [
            ("train", &self.train),
            ("valid", &self.valid),
            ("test", &self.test),
        ]
    }

    pub fn manifest(&self, spec: &SplitSpec) -> SplitManifest {
        let stat = |v: &[BlendEntry]| {
            let incompatible = v.iter().filter(|e| e.label.is_incompatible()).count();
            SubsetStats {
                size: v.len(),
                incompatible,
                incompatible_rate: if v.is_empty() {
                    0.0
                } else {
                    incompatible as f64 / v.len() as f64
                },
            }
        };
        SplitManifest {
            mode: spec.mode,
            seed: spec.seed,
            ratios: [spec.ratios.0, spec.ratios.1, spec.ratios.2],
            total: self.train.len() + self.valid.len() + self.test.len(),
            train: stat(&self.train),
            valid: stat(&self.valid),
            test: stat(&self.test),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetStats {
    pub size: usize,
    pub incompatible: usize,
    pub incompatible_rate: f64,
}

/// Summary written next to the three split CSVs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub mode: SplitMode,
    pub seed: u64,
    pub ratios: [f64; 3],
    pub total: usize,
    pub train: SubsetStats,
    pub valid: SubsetStats,
    pub test: SubsetStats,
}

/// Dispatches on `spec.mode`.
pub fn split(entries: &[BlendEntry], spec: &SplitSpec) -> Result<Split, DataError> {
    match spec.mode {
        SplitMode::Random => random_split(entries, spec),
        SplitMode::Balanced => balanced_split(entries, spec),
    }
}

pub fn random_split(entries: &[BlendEntry], spec: &SplitSpec) -> Result<Split, DataError> {
    spec.validate()?;
    if entries.len() < 5 {
        return Err(DataError::TooFewEntries {
            needed: 5,
            got: entries.len(),
        });
    }
    let n = entries.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));

    let n_valid = (n as f64 * spec.ratios.1).round() as usize;
    let n_test = (n as f64 * spec.ratios.2).round() as usize;
    let n_train = n - n_valid - n_test;
    let pick = |idx: &[usize]| idx.iter().map(|&i| entries[i].clone()).collect::<Vec<_>>();
    Ok(Split {
        train: pick(&order[..n_train]),
        valid: pick(&order[n_train..n_train + n_valid]),
        test: pick(&order[n_train + n_valid..]),
    })
}

/// Unordered pair identity used for grouping.
pub fn pair_key(e: &BlendEntry) -> (String, String) {
    if e.smiles_a <= e.smiles_b {
        (e.smiles_a.clone(), e.smiles_b.clone())
    } else {
        (e.smiles_b.clone(), e.smiles_a.clone())
    }
}

pub fn balanced_split(entries: &[BlendEntry], spec: &SplitSpec) -> Result<Split, DataError> {
    spec.validate()?;

    // groups in order of first appearance
    let mut index: HashMap<(String, String), usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, e) in entries.iter().enumerate() {
        let g = *index.entry(pair_key(e)).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(i);
    }
    let pairs_with = |label: Label| {
        groups
            .iter()
            .filter(|g| g.iter().any(|&i| entries[i].label == label))
            .count()
    };
    let (compatible, incompatible) = (
        pairs_with(Label::Compatible),
        pairs_with(Label::Incompatible),
    );
    if compatible < 2 || incompatible < 2 || groups.len() < 3 {
        return Err(DataError::TooFewPairs {
            compatible,
            incompatible,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let ratios = [spec.ratios.0, spec.ratios.1, spec.ratios.2];
    let targets = ratios.map(|r| r * entries.len() as f64);
    let mut last_failure = None;
    for _ in 0..MAX_BALANCED_ATTEMPTS {
        let mut order: Vec<usize> = (0..groups.len()).collect();
        order.shuffle(&mut rng);

        let mut members: [Vec<usize>; 3] = Default::default();
        let mut counts = [0usize; 3];
        for g in order {
            // subset furthest below its target, relative to the target
            let k = (0..3)
                .max_by(|&a, &b| {
                    let da = (targets[a] - counts[a] as f64) / targets[a];
                    let db = (targets[b] - counts[b] as f64) / targets[b];
                    da.partial_cmp(&db).unwrap().then(b.cmp(&a))
                })
                .unwrap();
            counts[k] += groups[g].len();
            members[k].extend(&groups[g]);
        }

        match single_class_subset(entries, &members) {
            Some(failure) => last_failure = Some(failure),
            None => {
                let [train, valid, test] = members.map(|idx| oversample(entries, idx, &mut rng));
                return Ok(Split { train, valid, test });
            }
        }
    }
    let (subset, missing) = last_failure.expect("at least one attempt");
    Err(DataError::SingleClassSubset { subset, missing })
}

fn single_class_subset(
    entries: &[BlendEntry],
    members: &[Vec<usize>; 3],
) -> Option<(&'static str, Label)> {
    const NAMES: [&str; 3] = ["train", "valid", "test"];
    for (name, idx) in NAMES.iter().zip(members) {
        for label in [Label::Compatible, Label::Incompatible] {
            if !idx.iter().any(|&i| entries[i].label == label) {
                return Some((name, label));
            }
        }
    }
    None
}

/// Keeps the subset's rows in input order, then appends copies of the
/// minority class, cycling through it in a seeded order, until both classes
/// have the same count.
fn oversample(
    entries: &[BlendEntry],
    mut idx: Vec<usize>,
    rng: &mut ChaCha8Rng,
) -> Vec<BlendEntry> {
    idx.sort_unstable();
    let (inc, comp): (Vec<usize>, Vec<usize>) = idx
        .iter()
        .partition(|&&i| entries[i].label.is_incompatible());
    let (mut minority, deficit) = if inc.len() < comp.len() {
        (inc.clone(), comp.len() - inc.len())
    } else {
        (comp.clone(), inc.len() - comp.len())
    };
    minority.shuffle(rng);
    let mut out: Vec<BlendEntry> = idx.iter().map(|&i| entries[i].clone()).collect();
    out.extend(
        minority
            .iter()
            .cycle()
            .take(deficit)
            .map(|&i| entries[i].clone()),
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn entry(a: &str, b: &str, f: f64, label: Label, id: usize) -> BlendEntry {
        BlendEntry {
            smiles_a: a.into(),
            smiles_b: b.into(),
            fraction_a: f,
            label,
            source_id: id.to_string(),
        }
    }

    fn sample(n: usize) -> Vec<BlendEntry> {
        (0..n)
            .map(|i| {
                let label = if i % 5 < 2 {
                    Label::Incompatible
                } else {
                    Label::Compatible
                };
                entry("*CC*", "*CCO*", i as f64 / n as f64, label, i)
            })
            .collect()
    }

    fn ids(v: &[BlendEntry]) -> Vec<String> {
        v.iter().map(|e| e.source_id.clone()).collect()
    }

    #[test]
    fn random_sizes_follow_ratios() {
        let s = random_split(&sample(100), &SplitSpec::new(SplitMode::Random, 3)).unwrap();
        assert_eq!((s.train.len(), s.valid.len(), s.test.len()), (64, 16, 20));
    }

    #[test]
    fn random_is_seeded_partition() {
        let data = sample(37);
        let spec = SplitSpec::new(SplitMode::Random, 11);
        let a = random_split(&data, &spec).unwrap();
        let b = random_split(&data, &spec).unwrap();
        assert_eq!(a, b);
        let other = random_split(&data, &SplitSpec::new(SplitMode::Random, 12)).unwrap();
        assert_ne!(ids(&a.train), ids(&other.train));

        let mut all: Vec<String> = [ids(&a.train), ids(&a.valid), ids(&a.test)].concat();
        all.sort();
        let mut expected = ids(&data);
        expected.sort();
        assert_eq!(all, expected);
    }

    #[test]
    fn random_rejects_small_input() {
        let err = random_split(&sample(4), &SplitSpec::new(SplitMode::Random, 0)).unwrap_err();
        assert!(matches!(err, DataError::TooFewEntries { got: 4, .. }));
    }

    #[test]
    fn spec_validation() {
        let mut spec = SplitSpec::new(SplitMode::Random, 0);
        spec.ratios = (0.5, 0.5, 0.0);
        assert!(spec.validate().is_err());
        spec.ratios = (0.5, 0.3, 0.3);
        assert!(spec.validate().is_err());
    }

    fn pair_data() -> Vec<BlendEntry> {
        let units = [
            "*CC*",
            "*CCO*",
            "*CC(C)*",
            "*CC(Cl)*",
            "*CC(O)*",
            "*CC(C#N)*",
        ];
        let mut out = Vec::new();
        let mut id = 0;
        for i in 0..units.len() {
            for j in i + 1..units.len() {
                for k in 0..(1 + (i + j) % 4) {
                    let label = if (i * 7 + j * 3 + k) % 3 == 0 {
                        Label::Incompatible
                    } else {
                        Label::Compatible
                    };
                    let (a, b) = if k % 2 == 0 { (i, j) } else { (j, i) };
                    out.push(entry(units[a], units[b], 0.25 * k as f64, label, id));
                    id += 1;
                }
            }
        }
        out
    }

    #[test]
    fn balanced_is_pair_disjoint_and_even() {
        let data = pair_data();
        let spec = SplitSpec::new(SplitMode::Balanced, 5);
        let s = balanced_split(&data, &spec).unwrap();
        let pairs = |v: &[BlendEntry]| v.iter().map(pair_key).collect::<HashSet<_>>();
        let seen: HashSet<_> = pairs(&s.train).union(&pairs(&s.valid)).cloned().collect();
        assert!(pairs(&s.test).is_disjoint(&seen));
        for (_, subset) in s.subsets() {
            let inc = subset.iter().filter(|e| e.label.is_incompatible()).count();
            assert_eq!(2 * inc, subset.len());
        }
        let m = s.manifest(&spec);
        assert_eq!(m.train.incompatible_rate, 0.5);
        assert_eq!(m.test.incompatible_rate, 0.5);
        assert_eq!(s, balanced_split(&data, &spec).unwrap());
    }

    #[test]
    fn balanced_covers_every_original_row() {
        let data = pair_data();
        let s = balanced_split(&data, &SplitSpec::new(SplitMode::Balanced, 9)).unwrap();
        let mut all: Vec<String> = [ids(&s.train), ids(&s.valid), ids(&s.test)].concat();
        all.sort();
        all.dedup();
        let mut expected = ids(&data);
        expected.sort();
        assert_eq!(all, expected);
    }

    #[test]
    fn balanced_needs_pairs() {
        let data = sample(40);
        let err = balanced_split(&data, &SplitSpec::new(SplitMode::Balanced, 0)).unwrap_err();
        assert!(matches!(err, DataError::TooFewPairs { .. }));
    }

    #[test]
    fn balanced_reports_single_class_subset() {
        // three pairs, only one of them ever incompatible: some subset must miss a class
        let data = vec![
            entry("*CC*", "*CCO*", 0.5, Label::Incompatible, 0),
            entry("*CC*", "*CCO*", 0.5, Label::Compatible, 1),
            entry("*CC*", "*CC(C)*", 0.5, Label::Incompatible, 2),
            entry("*CC*", "*CC(Cl)*", 0.5, Label::Compatible, 3),
        ];
        let err = balanced_split(&data, &SplitSpec::new(SplitMode::Balanced, 0)).unwrap_err();
        assert!(matches!(err, DataError::SingleClassSubset { .. }));
    }
}
