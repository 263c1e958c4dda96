//! SGD-with-momentum and Adam updates with a step-decay learning rate.

use crate::error::{Error, Result};

use super::{ClassifierParams, Gradients};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    SgdMomentum,
    Adam,
}

impl OptimizerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            OptimizerKind::SgdMomentum => "sgd-momentum",
            OptimizerKind::Adam => "adam",
        }
    }
}

impl std::str::FromStr for OptimizerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd-momentum" | "sgd" => Ok(OptimizerKind::SgdMomentum),
            "adam" => Ok(OptimizerKind::Adam),
            other => Err(Error::config(format!("unknown optimizer '{other}'"))),
        }
    }
}

/// Optimization hyperparameters for one training run.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    /// Learning rate is divided by `lr_decay_factor` every
    /// `lr_decay_period` epochs. A factor of 1.0 disables decay.
    pub lr_decay_factor: f64,
    pub lr_decay_period: usize,
    pub optimizer: OptimizerKind,
    pub momentum: f64,
    /// Epochs without a new validation best before stopping.
    pub patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 64,
            epochs: 30,
            initial_lr: 1e-3,
            lr_decay_factor: 10.0,
            lr_decay_period: 10,
            optimizer: OptimizerKind::Adam,
            momentum: 0.9,
            patience: 20,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 1 {
            return Err(Error::config("batch size must be >= 1"));
        }
        if self.epochs < 1 {
            return Err(Error::config("epoch count must be >= 1"));
        }
        if !(self.initial_lr > 0.0) {
            return Err(Error::config("learning rate must be > 0"));
        }
        if self.lr_decay_factor < 1.0 {
            return Err(Error::config("lr decay factor must be >= 1"));
        }
        if self.lr_decay_period < 1 {
            return Err(Error::config("lr decay period must be >= 1 epoch"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::config("momentum must lie in [0, 1)"));
        }
        if self.patience > self.epochs {
            return Err(Error::config("patience must not exceed the epoch count"));
        }
        Ok(())
    }

    /// Learning rate in effect during 0-based `epoch`.
    pub fn learning_rate(&self, epoch: usize) -> f64 {
        learning_rate(
            self.initial_lr,
            self.lr_decay_factor,
            self.lr_decay_period,
            epoch,
        )
    }
}

/// Step-decayed learning rate: `initial / factor^(epoch div period)`.
pub fn learning_rate(initial: f64, factor: f64, period: usize, epoch: usize) -> f64 {
    initial / factor.powi((epoch / period.max(1)) as i32)
}

/// Apply one optimizer update in place.
///
/// `epoch` is 0-based and selects the decayed learning rate. Gradients
/// containing NaN or Inf abort the run with a numeric error, as do
/// non-finite parameters after the update.
pub fn optimizer_step(
    params: &mut ClassifierParams,
    grads: &Gradients,
    config: &TrainConfig,
    epoch: usize,
) -> Result<()> {
    if grads.weights.len() != params.layer_count() || grads.biases.len() != params.layer_count() {
        return Err(Error::dimension(
            "gradient structure does not match parameter layers".to_string(),
        ));
    }
    for li in 0..params.layer_count() {
        if grads.weights[li].len() != params.layer_weights(li).len()
            || grads.biases[li].len() != params.layer_biases(li).len()
        {
            return Err(Error::dimension(format!(
                "gradient shapes for layer {li} do not match parameters"
            )));
        }
    }
    if !grads.is_finite() {
        return Err(Error::numeric(
            "non-finite gradient encountered; aborting run".to_string(),
        ));
    }

    let lr = config.learning_rate(epoch);
    match config.optimizer {
        OptimizerKind::SgdMomentum => {
            let mu = config.momentum;
            for li in 0..params.layer_count() {
                for idx in 0..grads.weights[li].len() {
                    let m = &mut params.opt.m_weights[li][idx];
                    *m = mu * *m + grads.weights[li][idx];
                    let step = lr * *m;
                    params.layer_weights_mut(li)[idx] -= step;
                }
                for idx in 0..grads.biases[li].len() {
                    let m = &mut params.opt.m_biases[li][idx];
                    *m = mu * *m + grads.biases[li][idx];
                    let step = lr * *m;
                    params.layer_biases_mut(li)[idx] -= step;
                }
            }
        }
        OptimizerKind::Adam => {
            params.opt.step += 1;
            let t = params.opt.step as i32;
            let bc1 = 1.0 - ADAM_BETA1.powi(t);
            let bc2 = 1.0 - ADAM_BETA2.powi(t);
            for li in 0..params.layer_count() {
                for idx in 0..grads.weights[li].len() {
                    let g = grads.weights[li][idx];
                    let m = &mut params.opt.m_weights[li][idx];
                    *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
                    let v = &mut params.opt.v_weights[li][idx];
                    *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
                    let step = lr * (*m / bc1) / ((*v / bc2).sqrt() + ADAM_EPS);
                    params.layer_weights_mut(li)[idx] -= step;
                }
                for idx in 0..grads.biases[li].len() {
                    let g = grads.biases[li][idx];
                    let m = &mut params.opt.m_biases[li][idx];
                    *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
                    let v = &mut params.opt.v_biases[li][idx];
                    *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
                    let step = lr * (*m / bc1) / ((*v / bc2).sqrt() + ADAM_EPS);
                    params.layer_biases_mut(li)[idx] -= step;
                }
            }
        }
    }

    if !params.is_finite() {
        return Err(Error::numeric(
            "non-finite parameter after optimizer update".to_string(),
        ));
    }
    Ok(())
}
