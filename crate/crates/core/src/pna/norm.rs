// SPDX-License-Identifier: Apache-2.0

use ndarray::{Array2, ArrayView2, Axis};

use super::param::Param;

pub const BN_EPSILON: f64 = 1e-5;
pub const BN_MOMENTUM: f64 = 0.1;

/// Per-channel normalization over the node dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm {
    pub gamma: Param,
    pub beta: Param,
    pub running_mean: Array2<f64>,
    pub running_var: Array2<f64>,
}

#[derive(Debug, Clone)]
pub struct NormCache {
    /// Normalized input before scale and shift.
    pub x_hat: Array2<f64>,
    pub(crate) inv_std: Array2<f64>,
}

impl BatchNorm {
    pub fn new(channels: usize) -> Self {
        Self {
            gamma: Param::new(Array2::ones((1, channels))),
            beta: Param::new(Array2::zeros((1, channels))),
            running_mean: Array2::zeros((1, channels)),
            running_var: Array2::ones((1, channels)),
        }
    }

    pub fn channels(&self) -> usize {
        self.gamma.value.ncols()
    }

    /// Normalizes with batch statistics and updates the running estimates.
    pub fn forward_train(&mut self, x: ArrayView2<f64>) -> (Array2<f64>, NormCache) {
        let n = x.nrows().max(1) as f64;
        let mean = x.sum_axis(Axis(0)).insert_axis(Axis(0)) / n;
        let centered = &x - &mean;
        let var = (&centered * &centered)
            .sum_axis(Axis(0))
            .insert_axis(Axis(0))
            / n;
        let inv_std = var.mapv(|v| 1.0 / (v + BN_EPSILON).sqrt());
        let x_hat = centered * &inv_std;
        let y = &x_hat * &self.gamma.value + &self.beta.value;

        let unbiased = if x.nrows() > 1 {
            &var * (n / (n - 1.0))
        } else {
            var.clone()
        };
        self.running_mean.zip_mut_with(&mean, |r, &m| {
            *r = (1.0 - BN_MOMENTUM) * *r + BN_MOMENTUM * m
        });
        self.running_var.zip_mut_with(&unbiased, |r, &v| {
            *r = (1.0 - BN_MOMENTUM) * *r + BN_MOMENTUM * v
        });
        (y, NormCache { x_hat, inv_std })
    }

    pub fn forward_eval(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let inv_std = self.running_var.mapv(|v| 1.0 / (v + BN_EPSILON).sqrt());
        (&x - &self.running_mean) * inv_std * &self.gamma.value + &self.beta.value
    }

    /// Backward through the train-mode transform.
    pub fn backward(&mut self, cache: &NormCache, grad_out: ArrayView2<f64>) -> Array2<f64> {
        let n = grad_out.nrows().max(1) as f64;
        self.gamma.grad += &(&grad_out * &cache.x_hat)
            .sum_axis(Axis(0))
            .insert_axis(Axis(0));
        self.beta.grad += &grad_out.sum_axis(Axis(0)).insert_axis(Axis(0));
        let g_hat = &grad_out * &self.gamma.value;
        let sum_g = g_hat.sum_axis(Axis(0)).insert_axis(Axis(0));
        let sum_gx = (&g_hat * &cache.x_hat)
            .sum_axis(Axis(0))
            .insert_axis(Axis(0));
        let mut out = g_hat * n - &sum_g - &cache.x_hat * &sum_gx;
        out *= &(&cache.inv_std / n);
        out
    }

    pub fn params(&self) -> [&Param; 2] {
        [&self.gamma, &self.beta]
    }

    pub fn params_mut(&mut self) -> [&mut Param; 2] {
        [&mut self.gamma, &mut self.beta]
    }
}
