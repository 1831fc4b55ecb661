// SPDX-License-Identifier: Apache-2.0

use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, ArrayView2, Axis};
use rand::Rng;

/// A trainable matrix with its gradient slot. Biases are `1 x n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub value: Array2<f64>,
    pub grad: Array2<f64>,
}

impl Param {
    pub fn new(value: Array2<f64>) -> Self {
        let grad = Array2::zeros(value.raw_dim());
        Self { value, grad }
    }

    pub fn uniform<R: Rng>(rows: usize, cols: usize, bound: f64, rng: &mut R) -> Self {
        Self::new(Array2::from_shape_fn((rows, cols), |_| {
            rng.random_range(-bound..=bound)
        }))
    }

    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(0.0);
    }
}

/// Affine map `y = x W^T + b` on row-major batches.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub weight: Param,
    pub bias: Param,
}

impl Linear {
    /// Weights and biases uniform in `±sqrt(1 / fan_in)`.
    pub fn new<R: Rng>(fan_in: usize, fan_out: usize, rng: &mut R) -> Self {
        let bound = (1.0 / fan_in as f64).sqrt();
        Self {
            weight: Param::uniform(fan_out, fan_in, bound, rng),
            bias: Param::uniform(1, fan_out, bound, rng),
        }
    }

    pub fn fan_in(&self) -> usize {
        self.weight.value.ncols()
    }

    pub fn fan_out(&self) -> usize {
        self.weight.value.nrows()
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut y = Array2::zeros((x.nrows(), self.fan_out()));
        y += &self.bias.value;
        general_mat_mul(1.0, &x, &self.weight.value.t(), 1.0, &mut y);
        y
    }

    /// Accumulates parameter gradients and returns the input gradient.
    pub fn backward(&mut self, x: ArrayView2<f64>, grad_out: ArrayView2<f64>) -> Array2<f64> {
        self.accumulate(x, grad_out);
        grad_out.dot(&self.weight.value)
    }

    /// Parameter gradients only, for layers whose input needs no gradient.
    pub fn accumulate(&mut self, x: ArrayView2<f64>, grad_out: ArrayView2<f64>) {
        general_mat_mul(1.0, &grad_out.t(), &x, 1.0, &mut self.weight.grad);
        self.bias.grad += &grad_out.sum_axis(Axis(0)).insert_axis(Axis(0));
    }

    pub fn params(&self) -> [&Param; 2] {
        [&self.weight, &self.bias]
    }

    pub fn params_mut(&mut self) -> [&mut Param; 2] {
        [&mut self.weight, &mut self.bias]
    }
}

pub(crate) fn relu(x: &Array2<f64>) -> Array2<f64> {
    x.mapv(|v| v.max(0.0))
}

/// Gradient through a rectifier given its pre-activation.
pub(crate) fn relu_backward(pre: &Array2<f64>, grad: &mut Array2<f64>) {
    grad.zip_mut_with(pre, |g, &p| {
        if p <= 0.0 {
            *g = 0.0
        }
    });
}
