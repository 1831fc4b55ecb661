// SPDX-License-Identifier: Apache-2.0

use ndarray::{Array1, Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::PathSubgraph;

use super::aggregate::STD_EPSILON;
use super::batch::GraphBatch;
use super::layer::{readout, LayerCache, PnaLayer, PnaLayerConfig};
use super::norm::{BatchNorm, NormCache};
use super::param::{relu, relu_backward, Linear, Param};
use super::PnaError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    #[default]
    Sum,
    Mean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PnaConfig {
    /// One-hot feature width `k`.
    pub feature_width: usize,
    /// Append the path-membership flag as an extra input column.
    pub target_mask: bool,
    pub hidden: usize,
    pub layers: usize,
    pub towers: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub head: Vec<usize>,
    pub readout: Readout,
}

impl PnaConfig {
    /// 75 channels, 4 layers, 5 towers and a 50/25 head.
    pub fn new(feature_width: usize, delta: f64) -> Self {
        Self {
            feature_width,
            target_mask: false,
            hidden: 75,
            layers: 4,
            towers: 5,
            epsilon: STD_EPSILON,
            delta,
            head: vec![50, 25],
            readout: Readout::Sum,
        }
    }

    pub fn input_width(&self) -> usize {
        self.feature_width + usize::from(self.target_mask)
    }

    pub fn layer_config(&self) -> PnaLayerConfig {
        PnaLayerConfig {
            f_in: self.hidden,
            f_out: self.hidden,
            towers: self.towers,
            epsilon: self.epsilon,
            delta: self.delta,
        }
    }

    pub fn validate(&self) -> Result<(), PnaError> {
        if self.feature_width == 0 || self.hidden == 0 {
            return Err(PnaError::Config("widths must be positive".into()));
        }
        if self.head.contains(&0) {
            return Err(PnaError::Config("head widths must be positive".into()));
        }
        self.layer_config().validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PnaModel {
    pub config: PnaConfig,
    pub embed: Linear,
    pub layers: Vec<PnaLayer>,
    pub norms: Vec<BatchNorm>,
    pub head: Vec<Linear>,
    /// Predictions are `raw * target_scale + target_shift`.
    pub target_shift: f64,
    pub target_scale: f64,
}

struct Block {
    input: Array2<f64>,
    layer: LayerCache,
    norm: NormCache,
    pre: Array2<f64>,
}

/// Intermediate values kept for the backward pass.
pub struct ModelCache {
    x: Array2<f64>,
    blocks: Vec<Block>,
    pooled: Array2<f64>,
    head_in: Vec<Array2<f64>>,
    head_pre: Vec<Array2<f64>>,
}

impl PnaModel {
    pub fn new(config: PnaConfig, seed: u64) -> Result<Self, PnaError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let embed = Linear::new(config.input_width(), config.hidden, &mut rng);
        let mut layers = Vec::with_capacity(config.layers);
        let mut norms = Vec::with_capacity(config.layers);
        for _ in 0..config.layers {
            layers.push(PnaLayer::new(config.layer_config(), &mut rng)?);
            norms.push(BatchNorm::new(config.hidden));
        }
        let mut head = Vec::new();
        let mut width = config.hidden;
        for &w in config.head.iter().chain(std::iter::once(&1)) {
            head.push(Linear::new(width, w, &mut rng));
            width = w;
        }
        Ok(Self {
            config,
            embed,
            layers,
            norms,
            head,
            target_shift: 0.0,
            target_scale: 1.0,
        })
    }

    /// Packs subgraphs into a batch laid out for this model's input.
    pub fn batch(&self, graphs: &[&PathSubgraph]) -> Result<GraphBatch, PnaError> {
        GraphBatch::new(graphs, self.config.input_width(), self.config.target_mask)
    }

    /// Raw head outputs, one per graph. Train mode uses batch statistics and
    /// updates the running estimates.
    pub fn forward(
        &mut self,
        batch: &GraphBatch,
        mode: Mode,
    ) -> Result<(Array1<f64>, ModelCache), PnaError> {
        if batch.x.ncols() != self.config.input_width() {
            return Err(PnaError::ShapeMismatch(format!(
                "batch width {}, model expects {}",
                batch.x.ncols(),
                self.config.input_width()
            )));
        }
        let mut z = self.embed.forward(batch.x.view());
        let mut blocks = Vec::with_capacity(self.layers.len());
        for (layer, norm) in self.layers.iter().zip(self.norms.iter_mut()) {
            let (y, lc) = layer.forward(z.view(), batch)?;
            let (pre, nc) = match mode {
                Mode::Train => norm.forward_train(y.view()),
                Mode::Eval => (
                    norm.forward_eval(y.view()),
                    NormCache {
                        x_hat: Array2::zeros((0, 0)),
                        inv_std: Array2::zeros((0, 0)),
                    },
                ),
            };
            let next = relu(&pre);
            blocks.push(Block {
                input: z,
                layer: lc,
                norm: nc,
                pre,
            });
            z = next;
        }
        let pooled = readout(&z, batch, self.config.readout == Readout::Mean);
        let mut h = pooled.clone();
        let mut head_in = Vec::with_capacity(self.head.len());
        let mut head_pre = Vec::with_capacity(self.head.len());
        let last = self.head.len() - 1;
        for (i, lin) in self.head.iter().enumerate() {
            let pre = lin.forward(h.view());
            head_in.push(h);
            h = if i < last { relu(&pre) } else { pre.clone() };
            head_pre.push(pre);
        }
        let out = h.index_axis(Axis(1), 0).to_owned();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(PnaError::NonFinite);
        }
        Ok((
            out,
            ModelCache {
                x: batch.x.clone(),
                blocks,
                pooled,
                head_in,
                head_pre,
            },
        ))
    }

    /// Accumulates the gradient of `sum_g grad_out[g] * raw_output[g]` into
    /// every parameter. `cache` must come from a train-mode forward.
    pub fn backward(&mut self, batch: &GraphBatch, cache: &ModelCache, grad_out: &Array1<f64>) {
        let mut g = grad_out.clone().insert_axis(Axis(1));
        let last = self.head.len() - 1;
        for i in (0..self.head.len()).rev() {
            if i < last {
                relu_backward(&cache.head_pre[i], &mut g);
            }
            g = self.head[i].backward(cache.head_in[i].view(), g.view());
        }
        debug_assert_eq!(g.dim(), cache.pooled.dim());
        let mut gz = Array2::zeros((batch.n_nodes(), self.config.hidden));
        let mean = self.config.readout == Readout::Mean;
        for (v, mut row) in gz.axis_iter_mut(Axis(0)).enumerate() {
            let gi = batch.graph_of[v];
            row.assign(&g.row(gi));
            if mean {
                row /= batch.graph_sizes[gi] as f64;
            }
        }
        for l in (0..self.layers.len()).rev() {
            let b = &cache.blocks[l];
            relu_backward(&b.pre, &mut gz);
            let gy = self.norms[l].backward(&b.norm, gz.view());
            gz = self.layers[l].backward(batch, &b.layer, gy.view());
            debug_assert_eq!(gz.dim(), b.input.dim());
        }
        self.embed.accumulate(cache.x.view(), gz.view());
    }

    /// Eval-mode predictions in label units.
    pub fn predict(&self, batch: &GraphBatch) -> Result<Vec<f64>, PnaError> {
        if batch.x.ncols() != self.config.input_width() {
            return Err(PnaError::ShapeMismatch(format!(
                "batch width {}, model expects {}",
                batch.x.ncols(),
                self.config.input_width()
            )));
        }
        let mut z = self.embed.forward(batch.x.view());
        for (layer, norm) in self.layers.iter().zip(&self.norms) {
            let (y, _) = layer.forward(z.view(), batch)?;
            z = relu(&norm.forward_eval(y.view()));
        }
        let mut h = readout(&z, batch, self.config.readout == Readout::Mean);
        let last = self.head.len() - 1;
        for (i, lin) in self.head.iter().enumerate() {
            let pre = lin.forward(h.view());
            h = if i < last { relu(&pre) } else { pre };
        }
        let out: Vec<f64> = h
            .column(0)
            .iter()
            .map(|v| v * self.target_scale + self.target_shift)
            .collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(PnaError::NonFinite);
        }
        Ok(out)
    }

    pub fn predict_graphs(&self, graphs: &[&PathSubgraph]) -> Result<Vec<f64>, PnaError> {
        let mut out = Vec::with_capacity(graphs.len());
        for chunk in graphs.chunks(256) {
            out.extend(self.predict(&self.batch(chunk)?)?);
        }
        Ok(out)
    }

    pub fn zero_grad(&mut self) {
        for p in self.params_mut() {
            p.zero_grad();
        }
    }

    /// Every trainable parameter in a fixed order.
    pub fn params(&self) -> Vec<&Param> {
        let mut out: Vec<&Param> = self.embed.params().into();
        for (layer, norm) in self.layers.iter().zip(&self.norms) {
            out.extend(layer.params());
            out.extend(norm.params());
        }
        for lin in &self.head {
            out.extend(lin.params());
        }
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        let mut out: Vec<&mut Param> = self.embed.params_mut().into();
        for (layer, norm) in self.layers.iter_mut().zip(self.norms.iter_mut()) {
            out.extend(layer.params_mut());
            out.extend(norm.params_mut());
        }
        for lin in &mut self.head {
            out.extend(lin.params_mut());
        }
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }
}
