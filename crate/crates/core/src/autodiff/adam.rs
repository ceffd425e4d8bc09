use serde::{Deserialize, Serialize};

use super::{AutodiffError, ParamSet, Tensor};

/// Adam with bias correction. Moments mirror the parameter shapes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub first_moment: Vec<Tensor>,
    pub second_moment: Vec<Tensor>,
    pub step_count: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(params: &ParamSet) -> Self {
        AdamState {
            first_moment: params.zeros_like(),
            second_moment: params.zeros_like(),
            step_count: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn step(
        &mut self,
        params: &mut ParamSet,
        grads: &[Tensor],
        lr: f64,
    ) -> Result<(), AutodiffError> {
        if grads.len() != params.len() || self.first_moment.len() != params.len() {
            return Err(AutodiffError::ShapeMismatch {
                op: "adam",
                left: (params.len(), 0),
                right: (grads.len(), 0),
            });
        }
        for ((p, g), m) in params.values().iter().zip(grads).zip(&self.first_moment) {
            p.same_shape(g, "adam gradient")?;
            p.same_shape(m, "adam moment")?;
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(t);
        let c2 = 1.0 - b2.powi(t);
        for (i, p) in params.values_mut().iter_mut().enumerate() {
            let g = grads[i].as_slice();
            let m = self.first_moment[i].as_mut_slice();
            let v = self.second_moment[i].as_mut_slice();
            for (j, w) in p.as_mut_slice().iter_mut().enumerate() {
                m[j] = b1 * m[j] + (1.0 - b1) * g[j];
                v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
                let m_hat = m[j] / c1;
                let v_hat = v[j] / c2;
                *w -= lr * m_hat / (v_hat.sqrt() + self.epsilon);
            }
        }
        Ok(())
    }
}

/// One Adam step on a single parameter vector; for callers that manage their own buffers.
pub fn adam_step(
    params: &mut ParamSet,
    grads: &[Tensor],
    state: &mut AdamState,
    lr: f64,
) -> Result<(), AutodiffError> {
    if !(lr > 0.0) {
        return Err(AutodiffError::InvalidArgument(format!(
            "learning rate {lr}"
        )));
    }
    state.step(params, grads, lr)
}
