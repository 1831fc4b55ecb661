// SPDX-License-Identifier: Apache-2.0

//! Labeled path samples, the three training scenarios and their on-disk
//! formats.

mod io;
mod split;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{
    extract_enclosing_subgraph, CircuitGraph, FeatureMatrix, PathSubgraph, TimingPath,
};
use crate::sta::DegradationLabel;

pub use io::{
    load_labels, load_samples, read_labels, read_samples, save_labels, save_samples, write_labels,
    write_samples, LabelRecord, LabelValue,
};
pub use split::{
    split_design_dataset, split_self_referencing, split_single_design, Scenario, Split,
    SplitManifest,
};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("design `{0}` is not in the dataset")]
    UnknownDesign(String),
    #[error("need samples from at least two designs, got {0}")]
    TooFewDesigns(usize),
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("sample {design}#{path_index} has no `{target}` label")]
    MissingLabel {
        design: String,
        path_index: usize,
        target: Target,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Regression target of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    /// Aging degradation, in percent.
    Scalar(f64),
    /// Process-variation `[mu, sigma, max]`, in percent.
    Stats([f64; 3]),
}

impl From<DegradationLabel> for Label {
    fn from(l: DegradationLabel) -> Self {
        Label::Stats([l.mu, l.sigma, l.max])
    }
}

/// Which statistic a model is trained on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Mu,
    Sigma,
    Max,
    Aging,
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Target::Mu => "mu",
            Target::Sigma => "sigma",
            Target::Max => "max",
            Target::Aging => "aging",
        })
    }
}

impl std::str::FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mu" => Ok(Target::Mu),
            "sigma" => Ok(Target::Sigma),
            "max" => Ok(Target::Max),
            "aging" => Ok(Target::Aging),
            other => Err(format!("unknown target `{other}` (mu, sigma, max, aging)")),
        }
    }
}

impl Label {
    pub fn get(&self, target: Target) -> Option<f64> {
        match (self, target) {
            (Label::Scalar(v), Target::Aging) => Some(*v),
            (Label::Stats(s), Target::Mu) => Some(s[0]),
            (Label::Stats(s), Target::Sigma) => Some(s[1]),
            (Label::Stats(s), Target::Max) => Some(s[2]),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Label::Scalar(v) => v.is_finite(),
            Label::Stats(s) => s.iter().all(|v| v.is_finite()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub design: String,
    pub path_index: usize,
    pub subgraph: PathSubgraph,
    pub label: Option<Label>,
}

impl LabeledSample {
    pub fn target_value(&self, target: Target) -> Result<f64, DatasetError> {
        self.label
            .and_then(|l| l.get(target))
            .ok_or_else(|| DatasetError::MissingLabel {
                design: self.design.clone(),
                path_index: self.path_index,
                target,
            })
    }
}

/// Cuts the `hops`-hop subgraph of every path; `labels`, when given, align
/// with `paths`.
pub fn make_samples(
    design: &str,
    graph: &CircuitGraph,
    features: &FeatureMatrix,
    paths: &[TimingPath],
    labels: Option<&[Label]>,
    hops: usize,
) -> Vec<LabeledSample> {
    paths
        .iter()
        .enumerate()
        .map(|(i, p)| LabeledSample {
            design: design.to_string(),
            path_index: i,
            subgraph: extract_enclosing_subgraph(graph, features, p, hops),
            label: labels.map(|l| l[i]),
        })
        .collect()
}

/// Pairs every sample with its `target` value, for training.
pub fn examples(
    samples: &[LabeledSample],
    target: Target,
) -> Result<Vec<(&PathSubgraph, f64)>, DatasetError> {
    samples
        .iter()
        .map(|s| Ok((&s.subgraph, s.target_value(target)?)))
        .collect()
}
