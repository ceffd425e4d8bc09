//! Parameter layout and forward graph for every variant.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Dims, ModelVariant, ZooError};
use crate::autodiff::{AutodiffError, NodeId, ParamId, ParamSet, Tape, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Lin {
    pub w: ParamId,
    pub b: ParamId,
}

/// Which weights play which role. Ids follow the order of [`layout`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Arch {
    pub variant: ModelVariant,
    pub proj: Lin,
    pub dense: Vec<Lin>,
    pub decision: Vec<Lin>,
    pub out: Lin,
}

/// `(name, fan_in, fan_out)` for each linear layer, in parameter order.
pub(crate) fn layout(variant: ModelVariant, dims: &Dims) -> Vec<(String, usize, usize)> {
    use ModelVariant::*;
    let (w, f, l) = (dims.fp_width, dims.feature_width, dims.n_dense_layers);
    let mut out = Vec::new();
    let proj_in = match variant {
        NoDiff => 2 * w,
        Mlp => 2 * w + 1,
        _ => w,
    };
    out.push(("proj".to_string(), proj_in, f));
    for i in 0..l {
        let fan_in = if variant == Cdn { (i + 1) * f } else { f };
        out.push((format!("dense{i}"), fan_in, f));
    }
    let feature = if variant == Cdn { (l + 1) * f } else { f };
    let mut width = match variant {
        NoC | Mlp => feature,
        _ => feature + 1,
    };
    for (k, &dw) in dims.decision_widths.iter().enumerate() {
        // DN keeps the first decision width so additive skips line up
        let next = if variant == Dn && k > 0 {
            dims.decision_widths[0]
        } else {
            dw
        };
        out.push((format!("decision{k}"), width, next));
        width = next;
    }
    out.push(("out".to_string(), width, 1));
    out
}

fn arch_from_layout(variant: ModelVariant, dims: &Dims) -> Arch {
    let lin = |i: usize| Lin {
        w: ParamId(2 * i),
        b: ParamId(2 * i + 1),
    };
    let l = dims.n_dense_layers;
    let k = dims.decision_widths.len();
    Arch {
        variant,
        proj: lin(0),
        dense: (1..=l).map(lin).collect(),
        decision: (l + 1..=l + k).map(lin).collect(),
        out: lin(l + k + 1),
    }
}

/// Uniform(−1/√fan_in, 1/√fan_in) for weights and biases alike.
pub(crate) fn init_params(
    variant: ModelVariant,
    dims: &Dims,
    rng: &mut ChaCha8Rng,
) -> (ParamSet, Arch) {
    let mut params = ParamSet::new();
    for (name, fan_in, fan_out) in layout(variant, dims) {
        let bound = 1.0 / (fan_in as f64).sqrt();
        let mut draw =
            |n: usize| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-bound..bound)).collect() };
        let w = Tensor::from_vec(fan_in, fan_out, draw(fan_in * fan_out)).expect("sized");
        let b = Tensor::from_vec(1, fan_out, draw(fan_out)).expect("sized");
        params.add(format!("{name}.w"), w);
        params.add(format!("{name}.b"), b);
    }
    (params, arch_from_layout(variant, dims))
}

/// Checks that loaded weights match the layout exactly; returns the role map.
pub(crate) fn arch_for(
    variant: ModelVariant,
    dims: &Dims,
    params: &ParamSet,
) -> Result<Arch, ZooError> {
    let expected = layout(variant, dims);
    if params.len() != 2 * expected.len() {
        return Err(ZooError::CorruptPayload(format!(
            "expected {} weight arrays, found {}",
            2 * expected.len(),
            params.len()
        )));
    }
    for (i, (name, fan_in, fan_out)) in expected.iter().enumerate() {
        for (j, (suffix, shape)) in [("w", (*fan_in, *fan_out)), ("b", (1, *fan_out))]
            .into_iter()
            .enumerate()
        {
            let id = ParamId(2 * i + j);
            let want = format!("{name}.{suffix}");
            if params.name(id) != want || params.get(id).shape() != shape {
                return Err(ZooError::CorruptPayload(format!(
                    "weight {} has shape {:?}, expected {want} {:?}",
                    params.name(id),
                    params.get(id).shape(),
                    shape
                )));
            }
        }
    }
    Ok(arch_from_layout(variant, dims))
}

impl Arch {
    fn features(&self, tape: &mut Tape<'_>, x: NodeId) -> Result<NodeId, AutodiffError> {
        use ModelVariant::*;
        let p = tape.linear(x, self.proj.w, self.proj.b)?;
        let h0 = tape.relu(p);
        Ok(match self.variant {
            Cdn => {
                let mut outs = vec![h0];
                for d in &self.dense {
                    let inp = tape.concat_all(&outs)?;
                    let z = tape.linear(inp, d.w, d.b)?;
                    outs.push(tape.relu(z));
                }
                tape.concat_all(&outs)?
            }
            NoDense | Mlp => {
                let mut h = h0;
                for d in &self.dense {
                    let z = tape.linear(h, d.w, d.b)?;
                    h = tape.relu(z);
                }
                h
            }
            _ => additive(tape, h0, &self.dense)?,
        })
    }

    /// Records the network on `tape`: fingerprints `a`, `b` (rows × width)
    /// and composition `c` (rows × 1) to a rows × 1 score.
    pub fn record(
        &self,
        tape: &mut Tape<'_>,
        a: NodeId,
        b: NodeId,
        c: NodeId,
    ) -> Result<NodeId, AutodiffError> {
        use ModelVariant::*;
        let head_in = match self.variant {
            NoDiff => {
                let x = tape.concat(a, b)?;
                let z = self.features(tape, x)?;
                tape.concat(z, c)?
            }
            Mlp => {
                let x = tape.concat_all(&[a, b, c])?;
                self.features(tape, x)?
            }
            _ => {
                let fa = self.features(tape, a)?;
                let fb = self.features(tape, b)?;
                let diff = tape.sub(fa, fb)?;
                let d = if self.variant == NoAbs {
                    diff
                } else {
                    tape.abs(diff)
                };
                if self.variant == NoC {
                    d
                } else {
                    tape.concat(d, c)?
                }
            }
        };
        let z = match (self.variant, self.decision.split_first()) {
            (Dn, Some((first, rest))) => {
                let p = tape.linear(head_in, first.w, first.b)?;
                let g0 = tape.relu(p);
                additive(tape, g0, rest)?
            }
            _ => {
                let mut z = head_in;
                for d in &self.decision {
                    let p = tape.linear(z, d.w, d.b)?;
                    z = tape.relu(p);
                }
                z
            }
        };
        tape.linear(z, self.out.w, self.out.b)
    }
}

/// `h_l = relu(W_l · (h_0 + … + h_{l−1}) + b_l)`; returns the last `h`.
fn additive(tape: &mut Tape<'_>, h0: NodeId, layers: &[Lin]) -> Result<NodeId, AutodiffError> {
    let mut acc = h0;
    let mut last = h0;
    for (i, d) in layers.iter().enumerate() {
        let z = tape.linear(acc, d.w, d.b)?;
        last = tape.relu(z);
        if i + 1 < layers.len() {
            acc = tape.add(acc, last)?;
        }
    }
    Ok(last)
}
