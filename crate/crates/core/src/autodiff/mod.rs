//! Minimal dense-network numerics: tensors, a reverse-mode tape, MSE, Adam,
//! and a central-difference gradient oracle.

mod adam;
mod tape;
mod tensor;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use adam::{adam_step, AdamState};
pub use tape::{Gradients, NodeId, ParamId, ParamSet, Tape};
pub use tensor::{linear_forward, Tensor};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AutodiffError {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("tape mismatch: {0}")]
    TapeMismatch(String),
    #[error("operation needs at least one input")]
    EmptyInput,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerKind {
    Linear,
    Relu,
    Abs,
    Add,
    Concat,
}

/// Shape summary of one layer in an architecture.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl LayerSpec {
    pub fn validate(&self) -> Result<(), AutodiffError> {
        if self.in_dim == 0 || self.out_dim == 0 {
            return Err(AutodiffError::InvalidArgument(format!(
                "{:?} layer has a zero dimension",
                self.kind
            )));
        }
        if matches!(self.kind, LayerKind::Relu | LayerKind::Abs) && self.in_dim != self.out_dim {
            return Err(AutodiffError::InvalidArgument(format!(
                "{:?} must preserve width",
                self.kind
            )));
        }
        Ok(())
    }
}

/// A unary layer applied by [`Sequential`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Layer {
    Linear { w: ParamId, b: ParamId },
    Relu,
    Abs,
}

/// Layers applied in order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Sequential {
    pub layers: Vec<Layer>,
}

impl Sequential {
    pub fn new(layers: Vec<Layer>) -> Self {
        Sequential { layers }
    }

    pub fn record(&self, tape: &mut Tape<'_>, mut x: NodeId) -> Result<NodeId, AutodiffError> {
        for layer in &self.layers {
            x = match *layer {
                Layer::Linear { w, b } => tape.linear(x, w, b)?,
                Layer::Relu => tape.relu(x),
                Layer::Abs => tape.abs(x),
            };
        }
        Ok(x)
    }

    pub fn specs(&self, params: &ParamSet, in_dim: usize) -> Vec<LayerSpec> {
        let mut width = in_dim;
        self.layers
            .iter()
            .map(|l| {
                let (kind, out) = match *l {
                    Layer::Linear { w, .. } => (LayerKind::Linear, params.get(w).cols()),
                    Layer::Relu => (LayerKind::Relu, width),
                    Layer::Abs => (LayerKind::Abs, width),
                };
                let spec = LayerSpec {
                    kind,
                    in_dim: width,
                    out_dim: out,
                };
                width = out;
                spec
            })
            .collect()
    }
}

/// Result of [`model_forward`]: the tape with cached activations.
pub struct Forward<'p> {
    pub tape: Tape<'p>,
    pub input: NodeId,
    pub output: NodeId,
}

impl Forward<'_> {
    pub fn output(&self) -> &Tensor {
        self.tape.value(self.output)
    }
}

pub fn model_forward<'p>(
    net: &Sequential,
    params: &'p ParamSet,
    input: Tensor,
) -> Result<Forward<'p>, AutodiffError> {
    let mut tape = Tape::new(params);
    let x = tape.input(input);
    let y = net.record(&mut tape, x)?;
    Ok(Forward {
        tape,
        input: x,
        output: y,
    })
}

/// Gradients of every weight and of the input, given `d loss / d output`.
pub fn model_backward(
    fwd: &Forward<'_>,
    output_grad: &Tensor,
) -> Result<(Vec<Tensor>, Tensor), AutodiffError> {
    let g = fwd.tape.backward(fwd.output, output_grad)?;
    let gx = g.input(fwd.input).cloned().unwrap_or_else(|| {
        let v = fwd.tape.value(fwd.input);
        Tensor::zeros(v.rows(), v.cols())
    });
    Ok((g.params, gx))
}

/// Mean squared error and its gradient `2 (pred - target) / count`.
pub fn mse_loss(pred: &Tensor, target: &Tensor) -> Result<(f64, Tensor), AutodiffError> {
    pred.same_shape(target, "mse")?;
    if pred.is_empty() {
        return Err(AutodiffError::EmptyInput);
    }
    let n = pred.len() as f64;
    let loss = pred
        .as_slice()
        .iter()
        .zip(target.as_slice())
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / n;
    let grad = pred.zip_map(target, |p, t| 2.0 * (p - t) / n);
    Ok((loss, grad))
}

/// Central differences `(f(θ+h) − f(θ−h)) / 2h` for every scalar parameter.
pub fn finite_diff_grad(
    params: &ParamSet,
    loss: impl Fn(&ParamSet) -> f64,
    h: f64,
) -> Result<Vec<Tensor>, AutodiffError> {
    if !(h > 0.0) {
        return Err(AutodiffError::InvalidArgument(format!("step {h}")));
    }
    let mut work = params.clone();
    let mut out = params.zeros_like();
    for (i, grad) in out.iter_mut().enumerate() {
        for j in 0..grad.len() {
            let orig = work.values()[i].as_slice()[j];
            work.values_mut()[i].as_mut_slice()[j] = orig + h;
            let up = loss(&work);
            work.values_mut()[i].as_mut_slice()[j] = orig - h;
            let down = loss(&work);
            work.values_mut()[i].as_mut_slice()[j] = orig;
            grad.as_mut_slice()[j] = (up - down) / (2.0 * h);
        }
    }
    Ok(out)
}

/// Largest `|a − b| / max(|a|, |b|, floor)` over paired tensors.
pub fn max_relative_error(a: &[Tensor], b: &[Tensor], floor: f64) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.as_slice().iter().zip(y.as_slice()))
        .map(|(&x, &y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(0.0, f64::max)
}
