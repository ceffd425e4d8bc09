use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{batch_tensors, ModelInstance, ZooError};
use crate::autodiff::{mse_loss, AdamState, Tape, Tensor};
use crate::data::{ModelInput, DEFAULT_LAMBDA};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub lambda: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 1000,
            batch_size: 20,
            learning_rate: 1e-4,
            lambda: DEFAULT_LAMBDA,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ZooError> {
        if self.batch_size == 0 {
            return Err(ZooError::InvalidConfig(
                "batch_size must be at least 1".into(),
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(ZooError::InvalidConfig(format!(
                "learning rate {} must be positive",
                self.learning_rate
            )));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(ZooError::InvalidConfig(format!(
                "lambda {} must be positive",
                self.lambda
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    /// Mean mini-batch loss per epoch.
    pub train_loss: Vec<f64>,
    pub valid_accuracy: Vec<f64>,
    pub test_accuracy: Option<Vec<f64>>,
    /// 1-based epoch whose weights were kept; `None` if no epoch ran.
    pub selected_epoch: Option<usize>,
}

impl TrainHistory {
    pub fn epochs_run(&self) -> usize {
        self.train_loss.len()
    }
}

/// Fraction of inputs whose thresholded score matches the target class.
pub fn accuracy(model: &ModelInstance, inputs: &[ModelInput]) -> Result<f64, ZooError> {
    if inputs.is_empty() {
        return Err(ZooError::EmptySet("evaluation"));
    }
    let scores = model.predict_batch(inputs)?;
    let half = model.lambda / 2.0;
    let hits = scores
        .iter()
        .zip(inputs)
        .filter(|(&s, i)| (s >= model.criterion) == (i.target >= half))
        .count();
    Ok(hits as f64 / inputs.len() as f64)
}

pub fn train(
    model: &ModelInstance,
    train_set: &[ModelInput],
    valid_set: &[ModelInput],
    cfg: &TrainConfig,
) -> Result<(ModelInstance, TrainHistory), ZooError> {
    train_observed(model, train_set, valid_set, None, cfg)
}

/// Like [`train`], additionally tracking accuracy on a held-out test set.
/// The test set never influences which epoch is kept.
pub fn train_observed(
    model: &ModelInstance,
    train_set: &[ModelInput],
    valid_set: &[ModelInput],
    test_set: Option<&[ModelInput]>,
    cfg: &TrainConfig,
) -> Result<(ModelInstance, TrainHistory), ZooError> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(ZooError::EmptySet("train"));
    }
    if valid_set.is_empty() {
        return Err(ZooError::EmptySet("valid"));
    }
    let mut current = model.clone();
    current.lambda = cfg.lambda;
    current.criterion = cfg.lambda / 2.0;
    // Targets are rescaled in case the data was vectorized with another λ.
    let scale = |i: &ModelInput| if i.target > 0.0 { cfg.lambda } else { 0.0 };

    let mut history = TrainHistory {
        test_accuracy: test_set.map(|_| Vec::new()),
        ..TrainHistory::default()
    };
    let mut best: Option<(f64, ModelInstance)> = None;
    let mut adam = AdamState::new(current.params());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&ModelInput> = chunk.iter().map(|&i| &train_set[i]).collect();
            let (a, b, c) = batch_tensors(&batch);
            let target = Tensor::from_vec(batch.len(), 1, batch.iter().map(|i| scale(i)).collect())
                .expect("sized");
            let grads = {
                let mut tape = Tape::new(current.params());
                let (na, nb, nc) = (tape.constant(a), tape.constant(b), tape.constant(c));
                let out = current.record(&mut tape, na, nb, nc)?;
                let (loss, g) = mse_loss(tape.value(out), &target)?;
                if !loss.is_finite() {
                    return Err(ZooError::DivergedLoss { epoch });
                }
                loss_sum += loss;
                tape.backward(out, &g)?.params
            };
            adam.step(current.params_mut(), &grads, cfg.learning_rate)?;
            batches += 1;
        }
        if !current.params().values().iter().all(Tensor::is_finite) {
            return Err(ZooError::DivergedLoss { epoch });
        }
        history.train_loss.push(loss_sum / batches as f64);
        let valid_acc = accuracy(&current, valid_set)?;
        history.valid_accuracy.push(valid_acc);
        if let (Some(t), Some(log)) = (test_set, history.test_accuracy.as_mut()) {
            log.push(accuracy(&current, t)?);
        }
        if best.as_ref().is_none_or(|(acc, _)| valid_acc > *acc) {
            best = Some((valid_acc, current.clone()));
            history.selected_epoch = Some(epoch);
        }
    }
    let chosen = best.map_or(current, |(_, m)| m);
    Ok((chosen, history))
}
