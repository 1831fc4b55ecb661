// SPDX-License-Identifier: Apache-2.0

//! One PNA convolution with towers.
//!
//! Per tower, every edge `u -> v` produces `M(z_v, z_u)`; node `v`
//! aggregates its incoming messages with mean/std/max/min, repeats the four
//! blocks under the identity, amplification and attenuation scalers and
//! applies `U(z_v, aggregated)`. Tower outputs are concatenated and mixed by
//! a final affine map.

use ndarray::{s, Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::aggregate::{aggregate_rows, degree_scalers};
use super::batch::GraphBatch;
use super::param::{Linear, Param};
use super::PnaError;

/// Aggregators per scaler.
const AGGREGATORS: usize = 4;
/// Identity, amplification, attenuation.
const SCALERS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PnaLayerConfig {
    pub f_in: usize,
    pub f_out: usize,
    pub towers: usize,
    pub epsilon: f64,
    /// Mean of `log(d + 1)` over the training subgraphs.
    pub delta: f64,
}

impl PnaLayerConfig {
    pub fn validate(&self) -> Result<(), PnaError> {
        if self.towers == 0
            || !self.f_in.is_multiple_of(self.towers)
            || !self.f_out.is_multiple_of(self.towers)
        {
            return Err(PnaError::Config(format!(
                "channels {}->{} not divisible by {} towers",
                self.f_in, self.f_out, self.towers
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(PnaError::Config("epsilon must be positive".into()));
        }
        if !(self.delta > 0.0) {
            return Err(PnaError::Config("delta must be positive".into()));
        }
        Ok(())
    }

    pub fn tower_in(&self) -> usize {
        self.f_in / self.towers
    }

    pub fn tower_out(&self) -> usize {
        self.f_out / self.towers
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tower {
    /// `2c -> c` on `[z_v, z_u]`.
    pub message: Linear,
    /// `13c -> c_out` on `[z_v, scaled aggregates]`.
    pub update: Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PnaLayer {
    pub config: PnaLayerConfig,
    pub towers: Vec<Tower>,
    pub mix: Linear,
}

#[derive(Debug, Clone)]
pub(crate) struct TowerCache {
    h: Array2<f64>,
    m: Array2<f64>,
    agg: Array2<f64>,
    argmax: Vec<u32>,
    argmin: Vec<u32>,
    u_in: Array2<f64>,
}

#[derive(Debug, Clone)]
pub struct LayerCache {
    scalers: Vec<[f64; 3]>,
    towers: Vec<TowerCache>,
    mix_in: Array2<f64>,
}

impl LayerCache {
    /// Unscaled `[mean | std | max | min]` of every node for tower `t`.
    pub fn aggregates(&self, tower: usize) -> &Array2<f64> {
        &self.towers[tower].agg
    }
}

impl PnaLayer {
    pub fn new<R: Rng>(config: PnaLayerConfig, rng: &mut R) -> Result<Self, PnaError> {
        config.validate()?;
        let c = config.tower_in();
        let co = config.tower_out();
        let towers = (0..config.towers)
            .map(|_| Tower {
                message: Linear::new(2 * c, c, rng),
                update: Linear::new((1 + AGGREGATORS * SCALERS) * c, co, rng),
            })
            .collect();
        Ok(Self {
            config,
            towers,
            mix: Linear::new(config.f_out, config.f_out, rng),
        })
    }

    pub fn forward(
        &self,
        z: ArrayView2<f64>,
        batch: &GraphBatch,
    ) -> Result<(Array2<f64>, LayerCache), PnaError> {
        let cfg = &self.config;
        if z.dim() != (batch.n_nodes(), cfg.f_in) {
            return Err(PnaError::ShapeMismatch(format!(
                "layer input {:?}, expected ({}, {})",
                z.dim(),
                batch.n_nodes(),
                cfg.f_in
            )));
        }
        let n = batch.n_nodes();
        let e = batch.n_edges();
        let c = cfg.tower_in();
        let co = cfg.tower_out();
        let scalers: Vec<[f64; 3]> = (0..n)
            .map(|v| degree_scalers(batch.in_degree(v), cfg.delta))
            .collect();
        let mut mix_in = Array2::zeros((n, cfg.f_out));
        let mut caches = Vec::with_capacity(cfg.towers);
        for (t, tower) in self.towers.iter().enumerate() {
            let zt = z.slice(s![.., t * c..(t + 1) * c]);
            let mut h = Array2::zeros((e, 2 * c));
            for k in 0..e {
                h.slice_mut(s![k, ..c]).assign(&zt.row(batch.dst[k]));
                h.slice_mut(s![k, c..]).assign(&zt.row(batch.src[k]));
            }
            let m = tower.message.forward(h.view());

            let mut agg = Array2::zeros((n, AGGREGATORS * c));
            let mut argmax = vec![0u32; n * c];
            let mut argmin = vec![0u32; n * c];
            for v in 0..n {
                let rows = m.slice(s![batch.offsets[v]..batch.offsets[v + 1], ..]);
                let mut out = agg.row_mut(v);
                aggregate_rows(
                    rows,
                    cfg.epsilon,
                    out.as_slice_mut().expect("row-major"),
                    &mut argmax[v * c..(v + 1) * c],
                    &mut argmin[v * c..(v + 1) * c],
                );
            }

            let block = AGGREGATORS * c;
            let mut u_in = Array2::zeros((n, c + SCALERS * block));
            u_in.slice_mut(s![.., ..c]).assign(&zt);
            for v in 0..n {
                let a = agg.row(v);
                let sc = scalers[v];
                let mut row = u_in.row_mut(v);
                for (k, &s) in sc.iter().enumerate() {
                    let mut dst = row.slice_mut(s![c + k * block..c + (k + 1) * block]);
                    dst.zip_mut_with(&a, |d, &x| *d = s * x);
                }
            }
            let out = tower.update.forward(u_in.view());
            mix_in.slice_mut(s![.., t * co..(t + 1) * co]).assign(&out);
            caches.push(TowerCache {
                h,
                m,
                agg,
                argmax,
                argmin,
                u_in,
            });
        }
        let y = self.mix.forward(mix_in.view());
        Ok((
            y,
            LayerCache {
                scalers,
                towers: caches,
                mix_in,
            },
        ))
    }

    /// Accumulates parameter gradients; returns the gradient w.r.t. `z`.
    pub fn backward(
        &mut self,
        batch: &GraphBatch,
        cache: &LayerCache,
        grad_out: ArrayView2<f64>,
    ) -> Array2<f64> {
        let cfg = self.config;
        let n = batch.n_nodes();
        let c = cfg.tower_in();
        let co = cfg.tower_out();
        let block = AGGREGATORS * c;
        let g_mix_in = self.mix.backward(cache.mix_in.view(), grad_out);
        let mut gz = Array2::zeros((n, cfg.f_in));
        for (t, (tower, tc)) in self.towers.iter_mut().zip(&cache.towers).enumerate() {
            let g_out = g_mix_in.slice(s![.., t * co..(t + 1) * co]);
            let g_uin = tower.update.backward(tc.u_in.view(), g_out);
            let mut gzt = gz.slice_mut(s![.., t * c..(t + 1) * c]);
            gzt += &g_uin.slice(s![.., ..c]);

            let mut g_m = Array2::zeros(tc.m.raw_dim());
            let mut g_agg = vec![0.0; block];
            for v in 0..n {
                let (lo, hi) = (batch.offsets[v], batch.offsets[v + 1]);
                let deg = hi - lo;
                if deg == 0 {
                    continue;
                }
                let sc = cache.scalers[v];
                let gu = g_uin.row(v);
                for (j, slot) in g_agg.iter_mut().enumerate() {
                    *slot = (0..SCALERS).map(|k| sc[k] * gu[c + k * block + j]).sum();
                }
                let agg = tc.agg.row(v);
                let inv = 1.0 / deg as f64;
                for j in 0..c {
                    let g_mean = g_agg[j] * inv;
                    let mean = agg[j];
                    let std = agg[c + j];
                    // the rectifier inside std is active iff the variance is positive
                    let var = {
                        let col = tc.m.slice(s![lo..hi, j]);
                        col.iter().map(|x| x * x).sum::<f64>() * inv - mean * mean
                    };
                    let g_std = if var > 0.0 {
                        g_agg[c + j] * inv / std
                    } else {
                        0.0
                    };
                    for r in lo..hi {
                        g_m[[r, j]] += g_mean + g_std * (tc.m[[r, j]] - mean);
                    }
                    g_m[[lo + tc.argmax[v * c + j] as usize, j]] += g_agg[2 * c + j];
                    g_m[[lo + tc.argmin[v * c + j] as usize, j]] += g_agg[3 * c + j];
                }
            }
            let g_h = tower.message.backward(tc.h.view(), g_m.view());
            for k in 0..batch.n_edges() {
                let mut row = gzt.row_mut(batch.dst[k]);
                row += &g_h.slice(s![k, ..c]);
                let mut row = gzt.row_mut(batch.src[k]);
                row += &g_h.slice(s![k, c..]);
            }
        }
        gz
    }

    pub fn params(&self) -> Vec<&Param> {
        let mut out = Vec::new();
        for t in &self.towers {
            out.extend(t.message.params());
            out.extend(t.update.params());
        }
        out.extend(self.mix.params());
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        let mut out = Vec::new();
        for t in &mut self.towers {
            out.extend(t.message.params_mut());
            out.extend(t.update.params_mut());
        }
        out.extend(self.mix.params_mut());
        out
    }
}

/// Sum of every node's rows per graph, or the mean with `mean = true`.
pub(crate) fn readout(z: &Array2<f64>, batch: &GraphBatch, mean: bool) -> Array2<f64> {
    let mut out = Array2::zeros((batch.n_graphs, z.ncols()));
    for (v, row) in z.axis_iter(Axis(0)).enumerate() {
        let mut dst = out.row_mut(batch.graph_of[v]);
        dst += &row;
    }
    if mean {
        for (g, mut row) in out.axis_iter_mut(Axis(0)).enumerate() {
            row /= batch.graph_sizes[g].max(1) as f64;
        }
    }
    out
}
