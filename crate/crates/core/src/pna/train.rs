// SPDX-License-Identifier: Apache-2.0

use std::time::Instant;

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::PathSubgraph;

use super::aggregate::compute_delta;
use super::metrics::mae;
use super::model::{Mode, PnaConfig, PnaModel};
use super::param::Param;
use super::PnaError;

/// A subgraph with its regression target.
pub type Example<'a> = (&'a PathSubgraph, f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// Train on z-scored labels; predictions are mapped back.
    pub standardize: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 500,
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            batch_size: 32,
            seed: 0,
            standardize: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), PnaError> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(PnaError::Config(
                "epochs and batch size must be at least 1".into(),
            ));
        }
        if !(self.lr > 0.0) {
            return Err(PnaError::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// One line of the training log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_mae: f64,
    pub val_mae: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch whose parameters were kept.
    pub best_epoch: usize,
    pub best_val_mae: f64,
    pub wall_time_s: f64,
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: i32,
    m: Vec<Array2<f64>>,
    v: Vec<Array2<f64>>,
}

impl Adam {
    pub fn new(params: &[&Param], config: &TrainConfig) -> Self {
        Self {
            lr: config.lr,
            beta1: config.beta1,
            beta2: config.beta2,
            eps: config.adam_eps,
            step: 0,
            m: params
                .iter()
                .map(|p| Array2::zeros(p.value.raw_dim()))
                .collect(),
            v: params
                .iter()
                .map(|p| Array2::zeros(p.value.raw_dim()))
                .collect(),
        }
    }

    pub fn step(&mut self, params: Vec<&mut Param>) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.eps);
        for ((p, m), v) in params.into_iter().zip(&mut self.m).zip(&mut self.v) {
            ndarray::Zip::from(&mut p.value)
                .and(&p.grad)
                .and(m)
                .and(v)
                .for_each(|w, &g, m, v| {
                    *m = b1 * *m + (1.0 - b1) * g;
                    *v = b2 * *v + (1.0 - b2) * g * g;
                    *w -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
                });
        }
    }
}

fn check_examples(set: &[Example<'_>]) -> Result<(), PnaError> {
    if set.is_empty() {
        return Err(PnaError::EmptyDataset);
    }
    if let Some(i) = set.iter().position(|e| !e.1.is_finite()) {
        return Err(PnaError::InvalidLabel(i));
    }
    Ok(())
}

/// Eval-mode MAE over a set, in label units.
pub fn evaluate(model: &PnaModel, set: &[Example<'_>]) -> Result<f64, PnaError> {
    let graphs: Vec<&PathSubgraph> = set.iter().map(|e| e.0).collect();
    let labels: Vec<f64> = set.iter().map(|e| e.1).collect();
    mae(&labels, &model.predict_graphs(&graphs)?)
}

/// Minimizes MAE with Adam and returns the parameters of the epoch with the
/// lowest validation MAE.
pub fn train(
    model: PnaModel,
    train_set: &[Example<'_>],
    val_set: &[Example<'_>],
    config: &TrainConfig,
) -> Result<(PnaModel, TrainReport), PnaError> {
    train_with_log(model, train_set, val_set, config, |_| {})
}

pub fn train_with_log(
    mut model: PnaModel,
    train_set: &[Example<'_>],
    val_set: &[Example<'_>],
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<(PnaModel, TrainReport), PnaError> {
    config.validate()?;
    check_examples(train_set)?;
    check_examples(val_set)?;
    let start = Instant::now();

    if config.standardize {
        let n = train_set.len() as f64;
        let mean = train_set.iter().map(|e| e.1).sum::<f64>() / n;
        let var = train_set.iter().map(|e| (e.1 - mean).powi(2)).sum::<f64>() / n;
        model.target_shift = mean;
        model.target_scale = if var > 0.0 { var.sqrt() } else { 1.0 };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut adam = Adam::new(&model.params(), config);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut records = Vec::with_capacity(config.epochs);
    let mut best: Option<(PnaModel, usize, f64)> = None;

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut abs_sum = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let graphs: Vec<&PathSubgraph> = chunk.iter().map(|&i| train_set[i].0).collect();
            let batch = model.batch(&graphs)?;
            let (raw, cache) = model.forward(&batch, Mode::Train)?;
            let scale = model.target_scale;
            let inv_b = 1.0 / chunk.len() as f64;
            let mut grad = Array1::zeros(chunk.len());
            for (k, &i) in chunk.iter().enumerate() {
                let err = raw[k] * scale + model.target_shift - train_set[i].1;
                abs_sum += err.abs();
                grad[k] = if err > 0.0 {
                    scale * inv_b
                } else if err < 0.0 {
                    -scale * inv_b
                } else {
                    0.0
                };
            }
            model.zero_grad();
            model.backward(&batch, &cache, &grad);
            adam.step(model.params_mut());
        }
        let record = EpochRecord {
            epoch,
            train_mae: abs_sum / train_set.len() as f64,
            val_mae: evaluate(&model, val_set)?,
        };
        on_epoch(&record);
        if best.as_ref().is_none_or(|b| record.val_mae < b.2) {
            best = Some((model.clone(), epoch, record.val_mae));
        }
        records.push(record);
    }

    let (best_model, best_epoch, best_val_mae) = best.expect("at least one epoch");
    Ok((
        best_model,
        TrainReport {
            epochs: records,
            best_epoch,
            best_val_mae,
            wall_time_s: start.elapsed().as_secs_f64(),
        },
    ))
}

/// Computes `delta` from the training subgraphs, initializes a model from
/// `config.seed` and trains it.
pub fn fit(
    mut model_config: PnaConfig,
    train_set: &[Example<'_>],
    val_set: &[Example<'_>],
    config: &TrainConfig,
    on_epoch: impl FnMut(&EpochRecord),
) -> Result<(PnaModel, TrainReport), PnaError> {
    check_examples(train_set)?;
    model_config.delta = compute_delta(train_set.iter().map(|e| e.0))?;
    let model = PnaModel::new(model_config, config.seed)?;
    train_with_log(model, train_set, val_set, config, on_epoch)
}
