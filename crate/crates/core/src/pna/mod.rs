// SPDX-License-Identifier: Apache-2.0

//! Principal neighbourhood aggregation network for graph-level regression,
//! with hand-written reverse-mode gradients and an Adam training loop.

mod aggregate;
mod batch;
pub mod checkpoint;
mod layer;
mod metrics;
mod model;
mod norm;
mod param;
mod train;

use thiserror::Error;

pub use aggregate::{aggregate_stats, compute_delta, degree_scalers, scaler, STD_EPSILON};
pub use batch::GraphBatch;
pub use layer::{LayerCache, PnaLayer, PnaLayerConfig, Tower};
pub use metrics::{mae, mape};
pub use model::{Mode, ModelCache, PnaConfig, PnaModel, Readout};
pub use norm::{BatchNorm, NormCache, BN_EPSILON, BN_MOMENTUM};
pub use param::{Linear, Param};
pub use train::{
    evaluate, fit, train, train_with_log, Adam, EpochRecord, Example, TrainConfig, TrainReport,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PnaError {
    #[error("no node with positive in-degree in the training subgraphs")]
    NoPositiveDegree,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("label {0} is not finite")]
    InvalidLabel(usize),
    #[error("non-finite model output")]
    NonFinite,
    #[error("length mismatch: {expected} true values, {actual} predictions")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("true value at index {0} is zero")]
    ZeroTrueValue(usize),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("io: {0}")]
    Io(String),
}
