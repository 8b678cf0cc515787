//! MSE loss, Adam, and the mini-batch training loop.

use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::NoiseSpec;
use crate::data::{PreparedDataset, Sample};
use crate::error::{Error, Result};
use crate::qnn::QnnModel;

pub fn mse(prediction: f64, target: f64) -> f64 {
    let d = prediction - target;
    d * d
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// L2 penalty folded into the gradient (0 disables it).
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.03,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamState {
    pub fn new(n_params: usize, config: AdamConfig) -> Self {
        Self {
            config,
            step: 0,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
        }
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::invalid(format!(
                "Adam state has {} entries, got {} params and {} grads",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
            weight_decay,
        } = self.config;
        self.step += 1;
        let t = self.step as i32;
        let bias1 = 1.0 - beta1.powi(t);
        let bias2 = 1.0 - beta2.powi(t);
        for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            let g = if weight_decay != 0.0 { g + weight_decay * *p } else { g };
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / bias1;
            let v_hat = *v / bias2;
            *p -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
        Ok(())
    }
}

/// How the per-epoch training loss is recorded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricMode {
    /// Re-evaluate the full training set after the epoch's last update.
    #[default]
    PostEpoch,
    /// Average the per-sample losses seen while computing the epoch's
    /// gradients (before each batch's update).
    BatchRunning,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub adam: AdamConfig,
    pub metric: MetricMode,
}

impl TrainConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            batch_size: 20,
            seed: 0,
            adam: AdamConfig::default(),
            metric: MetricMode::PostEpoch,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub seed: u64,
    pub noise: NoiseSpec,
    pub train_mse: Vec<f64>,
    pub val_mse: Vec<f64>,
    pub initial_params: Vec<f64>,
    pub final_params: Vec<f64>,
    pub optimizer_steps: u64,
}

impl TrainingRecord {
    pub fn final_train_mse(&self) -> f64 {
        *self.train_mse.last().expect("record has at least one epoch")
    }

    pub fn final_val_mse(&self) -> f64 {
        *self.val_mse.last().expect("record has at least one epoch")
    }
}

/// Uniform draws on [0, 2π), one per parameter.
pub fn initial_params(n_params: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n_params).map(|_| rng.gen_range(0.0..TAU)).collect()
}

/// Mean squared error of `model` with `params` over `samples`. The sum runs
/// in sample order regardless of threading.
pub fn evaluate_mse(model: &QnnModel, params: &[f64], samples: &[Sample]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("cannot evaluate on an empty sample set"));
    }
    let losses = samples
        .par_iter()
        .map(|s| model.forward(&s.features, params).map(|y| mse(y, s.target)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(losses.iter().sum::<f64>() / samples.len() as f64)
}

/// Batch-mean loss and its gradient. Returns the per-sample losses too.
pub fn batch_gradient(model: &QnnModel, params: &[f64], batch: &[Sample]) -> Result<(Vec<f64>, Vec<f64>)> {
    let per_sample = batch
        .par_iter()
        .map(|s| {
            let (y, g) = model.value_and_gradient(&s.features, params)?;
            Ok((mse(y, s.target), 2.0 * (y - s.target), g))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut grad = vec![0.0; params.len()];
    let scale = 1.0 / batch.len() as f64;
    for (_, dloss, g) in &per_sample {
        for (acc, gj) in grad.iter_mut().zip(g) {
            *acc += scale * dloss * gj;
        }
    }
    Ok((per_sample.into_iter().map(|(l, _, _)| l).collect(), grad))
}

/// Train from a fresh seeded initialization.
pub fn train(model: &QnnModel, data: &PreparedDataset, config: &TrainConfig) -> Result<TrainingRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let init = initial_params(model.n_params(), &mut rng);
    train_from(model, data, config, init, &mut rng)
}

/// Train starting at `init`; `rng` drives the per-epoch permutations.
pub fn train_from(
    model: &QnnModel,
    data: &PreparedDataset,
    config: &TrainConfig,
    init: Vec<f64>,
    rng: &mut impl Rng,
) -> Result<TrainingRecord> {
    if data.train.is_empty() || data.validation.is_empty() {
        return Err(Error::invalid("training and validation sets must be non-empty"));
    }
    if config.epochs < 1 {
        return Err(Error::invalid("epochs must be at least 1"));
    }
    if config.batch_size < 1 || config.batch_size > data.train.len() {
        return Err(Error::invalid(format!(
            "batch size {} must be in 1..={}",
            config.batch_size,
            data.train.len()
        )));
    }
    if init.len() != model.n_params() {
        return Err(Error::invalid(format!(
            "expected {} initial parameters, got {}",
            model.n_params(),
            init.len()
        )));
    }

    let mut params = init.clone();
    let mut adam = AdamState::new(params.len(), config.adam);
    let mut order: Vec<usize> = (0..data.train.len()).collect();
    let mut train_mse = Vec::with_capacity(config.epochs);
    let mut val_mse = Vec::with_capacity(config.epochs);
    let mut batch = Vec::with_capacity(config.batch_size);

    for _ in 0..config.epochs {
        order.shuffle(rng);
        let mut running = 0.0;
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| data.train[i]));
            let (losses, grad) = batch_gradient(model, &params, &batch)?;
            running += losses.iter().sum::<f64>();
            adam.step(&mut params, &grad)?;
        }
        train_mse.push(match config.metric {
            MetricMode::PostEpoch => evaluate_mse(model, &params, &data.train)?,
            MetricMode::BatchRunning => running / data.train.len() as f64,
        });
        val_mse.push(evaluate_mse(model, &params, &data.validation)?);
    }

    Ok(TrainingRecord {
        seed: config.seed,
        noise: model.noise(),
        train_mse,
        val_mse,
        initial_params: init,
        final_params: params,
        optimizer_steps: adam.step,
    })
}
