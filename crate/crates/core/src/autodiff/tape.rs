//! Reverse-mode tape over a small set of dense ops.

use serde::{Deserialize, Serialize};

use super::tensor::{linear_forward, Tensor};
use super::AutodiffError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParamId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

/// Named trainable tensors. Ids are indices in insertion order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    names: Vec<String>,
    values: Vec<Tensor>,
}

impl ParamSet {
    pub fn new() -> Self {
        ParamSet::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Tensor) -> ParamId {
        self.names.push(name.into());
        self.values.push(value);
        ParamId(self.values.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.values[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.values[id.0]
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn id_of(&self, name: &str) -> Option<ParamId> {
        self.names.iter().position(|n| n == name).map(ParamId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &str, &Tensor)> {
        self.names
            .iter()
            .zip(&self.values)
            .enumerate()
            .map(|(i, (n, v))| (ParamId(i), n.as_str(), v))
    }

    pub fn values(&self) -> &[Tensor] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Tensor] {
        &mut self.values
    }

    pub fn scalar_count(&self) -> usize {
        self.values.iter().map(Tensor::len).sum()
    }

    pub fn zeros_like(&self) -> Vec<Tensor> {
        self.values
            .iter()
            .map(|t| Tensor::zeros(t.rows(), t.cols()))
            .collect()
    }
}

#[derive(Clone, Debug)]
enum Op {
    Input { requires_grad: bool },
    Linear { x: NodeId, w: ParamId, b: ParamId },
    Relu(NodeId),
    Abs(NodeId),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Concat(NodeId, NodeId),
}

#[derive(Clone, Debug)]
struct Node {
    op: Op,
    value: Tensor,
    needs_grad: bool,
}

/// Records the forward pass; values are cached for the backward sweep.
pub struct Tape<'p> {
    params: &'p ParamSet,
    nodes: Vec<Node>,
}

/// Gradients of a scalar objective with respect to every parameter and every
/// input leaf recorded with `requires_grad`.
#[derive(Clone, Debug)]
pub struct Gradients {
    pub params: Vec<Tensor>,
    inputs: Vec<(NodeId, Tensor)>,
}

impl Gradients {
    pub fn param(&self, id: ParamId) -> &Tensor {
        &self.params[id.0]
    }

    pub fn input(&self, id: NodeId) -> Option<&Tensor> {
        self.inputs.iter().find(|(n, _)| *n == id).map(|(_, t)| t)
    }
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p ParamSet) -> Self {
        Tape {
            params,
            nodes: Vec::new(),
        }
    }

    pub fn params(&self) -> &'p ParamSet {
        self.params
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    fn push(&mut self, op: Op, value: Tensor, needs_grad: bool) -> NodeId {
        self.nodes.push(Node {
            op,
            value,
            needs_grad,
        });
        NodeId(self.nodes.len() - 1)
    }

    /// Input leaf whose gradient is reported by `backward`.
    pub fn input(&mut self, value: Tensor) -> NodeId {
        self.push(
            Op::Input {
                requires_grad: true,
            },
            value,
            true,
        )
    }

    /// Input leaf treated as a constant.
    pub fn constant(&mut self, value: Tensor) -> NodeId {
        self.push(
            Op::Input {
                requires_grad: false,
            },
            value,
            false,
        )
    }

    pub fn linear(&mut self, x: NodeId, w: ParamId, b: ParamId) -> Result<NodeId, AutodiffError> {
        let y = linear_forward(self.value(x), self.params.get(w), self.params.get(b))?;
        Ok(self.push(Op::Linear { x, w, b }, y, true))
    }

    pub fn relu(&mut self, x: NodeId) -> NodeId {
        let y = self.value(x).map(|v| v.max(0.0));
        let g = self.nodes[x.0].needs_grad;
        self.push(Op::Relu(x), y, g)
    }

    pub fn abs(&mut self, x: NodeId) -> NodeId {
        let y = self.value(x).map(f64::abs);
        let g = self.nodes[x.0].needs_grad;
        self.push(Op::Abs(x), y, g)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, AutodiffError> {
        self.value(a).same_shape(self.value(b), "add")?;
        let y = self.value(a).zip_map(self.value(b), |x, y| x + y);
        let g = self.nodes[a.0].needs_grad || self.nodes[b.0].needs_grad;
        Ok(self.push(Op::Add(a, b), y, g))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, AutodiffError> {
        self.value(a).same_shape(self.value(b), "sub")?;
        let y = self.value(a).zip_map(self.value(b), |x, y| x - y);
        let g = self.nodes[a.0].needs_grad || self.nodes[b.0].needs_grad;
        Ok(self.push(Op::Sub(a, b), y, g))
    }

    pub fn concat(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, AutodiffError> {
        let y = self.value(a).hcat(self.value(b))?;
        let g = self.nodes[a.0].needs_grad || self.nodes[b.0].needs_grad;
        Ok(self.push(Op::Concat(a, b), y, g))
    }

    /// Sum of several same-shape nodes (left fold of `add`).
    pub fn sum(&mut self, nodes: &[NodeId]) -> Result<NodeId, AutodiffError> {
        let (&first, rest) = nodes.split_first().ok_or(AutodiffError::EmptyInput)?;
        rest.iter().try_fold(first, |acc, &n| self.add(acc, n))
    }

    /// Concatenation of several nodes, left to right.
    pub fn concat_all(&mut self, nodes: &[NodeId]) -> Result<NodeId, AutodiffError> {
        let (&first, rest) = nodes.split_first().ok_or(AutodiffError::EmptyInput)?;
        rest.iter().try_fold(first, |acc, &n| self.concat(acc, n))
    }

    /// Smallest nonzero `|x|` fed to a relu or abs node: how close the
    /// recorded pass sits to a point where the derivative jumps. Exact zeros
    /// are skipped; in practice they are differences of two dead units, which
    /// stay zero under small perturbations.
    pub fn kink_margin(&self) -> f64 {
        self.nodes
            .iter()
            .filter_map(|n| match n.op {
                Op::Relu(x) | Op::Abs(x) => Some(self.value(x)),
                _ => None,
            })
            .flat_map(|t| t.as_slice().iter().map(|v| v.abs()))
            .filter(|&v| v > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    /// Reverse sweep from `output`, seeded with `output_grad`.
    ///
    /// Relu and abs both take subgradient 0 at exactly 0.
    pub fn backward(
        &self,
        output: NodeId,
        output_grad: &Tensor,
    ) -> Result<Gradients, AutodiffError> {
        if output.0 >= self.nodes.len() {
            return Err(AutodiffError::TapeMismatch(format!(
                "node {} not on this tape",
                output.0
            )));
        }
        if self.value(output).shape() != output_grad.shape() {
            return Err(AutodiffError::TapeMismatch(format!(
                "output is {:?} but gradient is {:?}",
                self.value(output).shape(),
                output_grad.shape()
            )));
        }
        let mut param_grads = self.params.zeros_like();
        let mut grads: Vec<Option<Tensor>> = vec![None; output.0 + 1];
        grads[output.0] = Some(output_grad.clone());

        fn accumulate(slot: &mut Option<Tensor>, g: Tensor) {
            match slot {
                Some(t) => t.add_assign(&g),
                None => *slot = Some(g),
            }
        }

        let mut inputs = Vec::new();
        for idx in (0..=output.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Input { requires_grad } => {
                    if *requires_grad {
                        inputs.push((NodeId(idx), g));
                    }
                }
                Op::Linear { x, w, b } => {
                    let xv = self.value(*x);
                    let wv = self.params.get(*w);
                    let out = wv.cols();
                    let gw = param_grads[w.0].as_mut_slice();
                    for r in 0..xv.rows() {
                        let gr = g.row(r);
                        for (k, &xk) in xv.row(r).iter().enumerate() {
                            if xk == 0.0 {
                                continue;
                            }
                            for (dst, &gv) in gw[k * out..(k + 1) * out].iter_mut().zip(gr) {
                                *dst += xk * gv;
                            }
                        }
                    }
                    let gb = param_grads[b.0].as_mut_slice();
                    for r in 0..g.rows() {
                        for (dst, &gv) in gb.iter_mut().zip(g.row(r)) {
                            *dst += gv;
                        }
                    }
                    if self.nodes[x.0].needs_grad {
                        let mut gx = Tensor::zeros(xv.rows(), xv.cols());
                        let ws = wv.as_slice();
                        for r in 0..g.rows() {
                            let gr = g.row(r);
                            for k in 0..xv.cols() {
                                let wk = &ws[k * out..(k + 1) * out];
                                let s: f64 = wk.iter().zip(gr).map(|(a, b)| a * b).sum();
                                gx.set(r, k, s);
                            }
                        }
                        accumulate(&mut grads[x.0], gx);
                    }
                }
                Op::Relu(x) => {
                    if self.nodes[x.0].needs_grad {
                        let gx =
                            g.zip_map(self.value(*x), |gv, xv| if xv > 0.0 { gv } else { 0.0 });
                        accumulate(&mut grads[x.0], gx);
                    }
                }
                Op::Abs(x) => {
                    if self.nodes[x.0].needs_grad {
                        let gx = g.zip_map(self.value(*x), |gv, xv| {
                            if xv > 0.0 {
                                gv
                            } else if xv < 0.0 {
                                -gv
                            } else {
                                0.0
                            }
                        });
                        accumulate(&mut grads[x.0], gx);
                    }
                }
                Op::Add(a, b) => {
                    if self.nodes[a.0].needs_grad {
                        accumulate(&mut grads[a.0], g.clone());
                    }
                    if self.nodes[b.0].needs_grad {
                        accumulate(&mut grads[b.0], g);
                    }
                }
                Op::Sub(a, b) => {
                    if self.nodes[a.0].needs_grad {
                        accumulate(&mut grads[a.0], g.clone());
                    }
                    if self.nodes[b.0].needs_grad {
                        accumulate(&mut grads[b.0], g.map(|v| -v));
                    }
                }
                Op::Concat(a, b) => {
                    let (ga, gb) = g.hsplit(self.value(*a).cols());
                    if self.nodes[a.0].needs_grad {
                        accumulate(&mut grads[a.0], ga);
                    }
                    if self.nodes[b.0].needs_grad {
                        accumulate(&mut grads[b.0], gb);
                    }
                }
            }
        }
        inputs.reverse();
        Ok(Gradients {
            params: param_grads,
            inputs,
        })
    }
}
