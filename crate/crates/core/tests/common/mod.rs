#![allow(dead_code)]
//! Helpers shared by several integration targets.

use blendnet::autodiff::{finite_diff_grad, max_relative_error, ParamSet, Tape, Tensor};
use blendnet::chem::Molecule;
use blendnet::zoo::{build_model, Dims, ModelInstance, ModelVariant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CORPUS: &str = include_str!("../fixtures/corpus.tsv");
pub const PINNED: &str = include_str!("../fixtures/corpus_bits.tsv");

pub struct Entry {
    pub name: &'static str,
    pub smiles: &'static str,
    pub reordered: &'static str,
}

pub fn rows(text: &'static str) -> impl Iterator<Item = Vec<&'static str>> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split('\t').collect())
}

/// Pinned bits at the default fingerprint settings, in corpus order.
pub fn pinned() -> Vec<(&'static str, Vec<usize>)> {
    rows(PINNED)
        .map(|f| (f[0], f[1].split(' ').map(|b| b.parse().unwrap()).collect()))
        .collect()
}

pub fn corpus() -> Vec<Entry> {
    rows(CORPUS)
        .map(|f| Entry {
            name: f[0],
            smiles: f[1],
            reordered: f[2],
        })
        .collect()
}

type AtomKey = (u8, bool, i8, u8);

fn atom_keys(m: &Molecule) -> Vec<AtomKey> {
    (0..m.atom_count())
        .map(|i| {
            let a = &m.atoms[i];
            (
                a.element.number(),
                a.aromatic,
                a.formal_charge,
                m.hydrogen_count(i),
            )
        })
        .collect()
}

fn bond_matrix(m: &Molecule) -> Vec<Vec<Option<blendnet::chem::BondOrder>>> {
    let n = m.atom_count();
    let mut adj = vec![vec![None; n]; n];
    for b in &m.bonds {
        adj[b.a][b.b] = Some(b.order);
        adj[b.b][b.a] = Some(b.order);
    }
    adj
}

/// Labelled-graph isomorphism by backtracking over atom assignments.
pub fn isomorphic(x: &Molecule, y: &Molecule) -> bool {
    let n = x.atom_count();
    if n != y.atom_count() || x.bond_count() != y.bond_count() {
        return false;
    }
    let (kx, ky) = (atom_keys(x), atom_keys(y));
    let (ax, ay) = (bond_matrix(x), bond_matrix(y));
    let deg = |a: &Vec<Vec<_>>, i: usize| a[i].iter().filter(|o: &&Option<_>| o.is_some()).count();

    fn extend(
        i: usize,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        ok: &dyn Fn(usize, usize, &[usize]) -> bool,
    ) -> bool {
        if i == map.len() {
            return true;
        }
        for j in 0..used.len() {
            if !used[j] && ok(i, j, &map[..i]) {
                map[i] = j;
                used[j] = true;
                if extend(i + 1, map, used, ok) {
                    return true;
                }
                used[j] = false;
            }
        }
        false
    }

    let ok = |i: usize, j: usize, prefix: &[usize]| {
        kx[i] == ky[j]
            && deg(&ax, i) == deg(&ay, j)
            && prefix
                .iter()
                .enumerate()
                .all(|(p, &q)| ax[i][p] == ay[j][q])
    };
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    extend(0, &mut map, &mut used, &ok)
}

pub struct Case {
    pub a: Tensor,
    pub b: Tensor,
    pub c: Tensor,
    pub weights: Tensor,
}

fn random(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Tensor {
    Tensor::from_vec(
        rows,
        cols,
        (0..rows * cols).map(|_| rng.gen_range(lo..hi)).collect(),
    )
    .unwrap()
}

pub fn case(rng: &mut ChaCha8Rng, width: usize) -> Case {
    Case {
        a: random(rng, 1, width, 0.0, 1.0),
        b: random(rng, 1, width, 0.0, 1.0),
        c: random(rng, 1, 1, 0.0, 1.0),
        weights: random(rng, 1, 1, 0.5, 1.5),
    }
}

fn objective(model: &ModelInstance, params: &ParamSet, k: &Case) -> f64 {
    let mut tape = Tape::new(params);
    let (a, b, c) = (
        tape.constant(k.a.clone()),
        tape.constant(k.b.clone()),
        tape.constant(k.c.clone()),
    );
    let out = model.record(&mut tape, a, b, c).unwrap();
    tape.value(out)
        .as_slice()
        .iter()
        .zip(k.weights.as_slice())
        .map(|(y, w)| y * w)
        .sum()
}

/// Gradients and the distance of the pass from the nearest relu/abs kink.
pub fn analytic(model: &ModelInstance, k: &Case) -> (Vec<Tensor>, f64) {
    let mut tape = Tape::new(model.params());
    let (a, b, c) = (
        tape.constant(k.a.clone()),
        tape.constant(k.b.clone()),
        tape.constant(k.c.clone()),
    );
    let out = model.record(&mut tape, a, b, c).unwrap();
    (
        tape.backward(out, &k.weights).unwrap().params,
        tape.kink_margin(),
    )
}

const STEP: f64 = 1e-5;

/// Largest relative error over 10 parameter draws × 10 inputs. Inputs whose
/// pass lies within 1e-3 of a relu/abs kink are redrawn, since a central
/// difference straddling a kink measures the jump rather than the derivative.
/// Entries below 1e-4 in magnitude are compared against that floor.
pub fn worst_gradient_error(variant: ModelVariant, dims: &Dims) -> f64 {
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let model = build_model(variant, dims, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let mut done = 0;
        while done < 10 {
            let k = case(&mut rng, dims.fp_width);
            let (exact, margin) = analytic(&model, &k);
            if margin < 1e-3 {
                continue;
            }
            let numeric =
                finite_diff_grad(model.params(), |p| objective(&model, p, &k), STEP).unwrap();
            worst = worst.max(max_relative_error(&exact, &numeric, 1e-4));
            done += 1;
        }
    }
    worst
}
