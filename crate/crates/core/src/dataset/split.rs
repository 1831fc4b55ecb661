// SPDX-License-Identifier: Apache-2.0

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DatasetError, LabeledSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    SelfReferencing,
    SingleDesign,
    DesignDataset,
}

impl std::str::FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "self_referencing" | "self-referencing" => Ok(Scenario::SelfReferencing),
            "single_design" | "single-design" => Ok(Scenario::SingleDesign),
            "design_dataset" | "design-dataset" => Ok(Scenario::DesignDataset),
            other => Err(format!(
                "unknown scenario `{other}` (self_referencing, single_design, design_dataset)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub scenario: Scenario,
    pub seed: u64,
    pub train: Vec<LabeledSample>,
    pub val: Vec<LabeledSample>,
    pub test: Vec<LabeledSample>,
}

/// Audit record of a split: member `(design, path_index)` pairs in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub scenario: Scenario,
    pub seed: u64,
    pub train: Vec<(String, usize)>,
    pub val: Vec<(String, usize)>,
    pub test: Vec<(String, usize)>,
}

impl Split {
    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train.len(), self.val.len(), self.test.len())
    }

    pub fn manifest(&self) -> SplitManifest {
        let ids =
            |v: &[LabeledSample]| v.iter().map(|s| (s.design.clone(), s.path_index)).collect();
        SplitManifest {
            scenario: self.scenario,
            seed: self.seed,
            train: ids(&self.train),
            val: ids(&self.val),
            test: ids(&self.test),
        }
    }
}

/// Sorts by `(design, path_index)` so membership does not depend on input
/// order, then applies a seeded Fisher-Yates shuffle.
fn shuffled(mut samples: Vec<LabeledSample>, seed: u64) -> Vec<LabeledSample> {
    samples.sort_by(|a, b| (&a.design, a.path_index).cmp(&(&b.design, b.path_index)));
    samples.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    samples
}

fn cut_90_10(samples: Vec<LabeledSample>, seed: u64) -> (Vec<LabeledSample>, Vec<LabeledSample>) {
    let mut train = shuffled(samples, seed);
    let val = train.split_off(train.len() * 9 / 10);
    (train, val)
}

/// 81:10:9 cut of one design's samples, floored at each boundary.
pub fn split_self_referencing(
    samples: Vec<LabeledSample>,
    seed: u64,
) -> Result<Split, DatasetError> {
    let n = samples.len();
    if n < 10 {
        return Err(DatasetError::TooFewSamples { needed: 10, got: n });
    }
    let mut train = shuffled(samples, seed);
    let mut val = train.split_off(n * 81 / 100);
    let test = val.split_off(n * 91 / 100 - n * 81 / 100);
    Ok(Split {
        scenario: Scenario::SelfReferencing,
        seed,
        train,
        val,
        test,
    })
}

/// 90:10 cut of one design's samples; another design's samples are the
/// test set, in their given order.
pub fn split_single_design(
    train_design: Vec<LabeledSample>,
    test_design: Vec<LabeledSample>,
    seed: u64,
) -> Result<Split, DatasetError> {
    if train_design.len() < 2 {
        return Err(DatasetError::TooFewSamples {
            needed: 2,
            got: train_design.len(),
        });
    }
    if test_design.is_empty() {
        return Err(DatasetError::TooFewSamples { needed: 1, got: 0 });
    }
    let (train, val) = cut_90_10(train_design, seed);
    Ok(Split {
        scenario: Scenario::SingleDesign,
        seed,
        train,
        val,
        test: test_design,
    })
}

/// Every sample of `held_out` goes to test; the other designs are pooled and
/// cut 90:10.
pub fn split_design_dataset(
    samples: Vec<LabeledSample>,
    held_out: &str,
    seed: u64,
) -> Result<Split, DatasetError> {
    let mut designs: Vec<&str> = samples.iter().map(|s| s.design.as_str()).collect();
    designs.sort_unstable();
    designs.dedup();
    if !designs.contains(&held_out) {
        return Err(DatasetError::UnknownDesign(held_out.to_string()));
    }
    if designs.len() < 2 {
        return Err(DatasetError::TooFewDesigns(designs.len()));
    }
    let (mut test, pool): (Vec<_>, Vec<_>) =
        samples.into_iter().partition(|s| s.design == held_out);
    test.sort_by_key(|s| s.path_index);
    if pool.len() < 2 {
        return Err(DatasetError::TooFewSamples {
            needed: 2,
            got: pool.len(),
        });
    }
    let (train, val) = cut_90_10(pool, seed);
    Ok(Split {
        scenario: Scenario::DesignDataset,
        seed,
        train,
        val,
        test,
    })
}
