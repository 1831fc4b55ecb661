// SPDX-License-Identifier: Apache-2.0

//! JSON-lines persistence of labeled samples and path labels.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::graph::PathSubgraph;
use crate::sta::DegradationLabel;

use super::{DatasetError, Label, LabeledSample};

#[derive(Serialize, Deserialize)]
struct NodeRecord {
    id: usize,
    feature_index: usize,
    target: bool,
}

/// One line of a subgraph batch file. Node ids and edge endpoints are ids in
/// the parent circuit graph.
#[derive(Serialize, Deserialize)]
struct SampleRecord {
    design: String,
    path_index: usize,
    feature_width: usize,
    nodes: Vec<NodeRecord>,
    edges: Vec<[usize; 2]>,
    label: Option<Label>,
}

impl From<&LabeledSample> for SampleRecord {
    fn from(s: &LabeledSample) -> Self {
        let g = &s.subgraph;
        SampleRecord {
            design: s.design.clone(),
            path_index: s.path_index,
            feature_width: g.feature_width,
            nodes: (0..g.node_count())
                .map(|i| NodeRecord {
                    id: g.nodes[i],
                    feature_index: g.features[i],
                    target: g.target[i],
                })
                .collect(),
            edges: g
                .edges
                .iter()
                .map(|&(u, v)| [g.nodes[u], g.nodes[v]])
                .collect(),
            label: s.label,
        }
    }
}

impl TryFrom<SampleRecord> for LabeledSample {
    type Error = String;

    fn try_from(r: SampleRecord) -> Result<Self, String> {
        let mut nodes = r.nodes;
        nodes.sort_by_key(|n| n.id);
        if nodes.windows(2).any(|w| w[0].id == w[1].id) {
            return Err("duplicate node id".into());
        }
        if let Some(n) = nodes.iter().find(|n| n.feature_index >= r.feature_width) {
            return Err(format!(
                "node {} feature_index {} out of range for width {}",
                n.id, n.feature_index, r.feature_width
            ));
        }
        let ids: Vec<usize> = nodes.iter().map(|n| n.id).collect();
        let local = |id: usize| {
            ids.binary_search(&id)
                .map_err(|_| format!("edge endpoint {id} is not a listed node"))
        };
        let mut edges = r
            .edges
            .iter()
            .map(|&[u, v]| Ok((local(u)?, local(v)?)))
            .collect::<Result<Vec<_>, String>>()?;
        edges.sort_unstable();
        edges.dedup();
        if let Some(l) = r.label {
            if !l.is_finite() {
                return Err("label is not finite".into());
            }
        }
        Ok(LabeledSample {
            design: r.design,
            path_index: r.path_index,
            subgraph: PathSubgraph {
                features: nodes.iter().map(|n| n.feature_index).collect(),
                target: nodes.iter().map(|n| n.target).collect(),
                nodes: ids,
                edges,
                feature_width: r.feature_width,
            },
            label: r.label,
        })
    }
}

fn read_lines<R: BufRead, T: DeserializeOwned, U>(
    reader: R,
    convert: impl Fn(T) -> Result<U, String>,
) -> Result<Vec<U>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let schema = |message: String| DatasetError::Schema {
            line: i + 1,
            message,
        };
        let record: T = serde_json::from_str(&line).map_err(|e| schema(e.to_string()))?;
        out.push(convert(record).map_err(schema)?);
    }
    Ok(out)
}

fn write_lines<W: Write, T: Serialize>(
    mut writer: W,
    records: impl Iterator<Item = T>,
) -> Result<(), DatasetError> {
    for r in records {
        serde_json::to_writer(&mut writer, &r).map_err(std::io::Error::from)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_samples<W: Write>(writer: W, samples: &[LabeledSample]) -> Result<(), DatasetError> {
    write_lines(writer, samples.iter().map(SampleRecord::from))
}

pub fn read_samples<R: BufRead>(reader: R) -> Result<Vec<LabeledSample>, DatasetError> {
    read_lines(reader, |r: SampleRecord| LabeledSample::try_from(r))
}

pub fn save_samples(path: impl AsRef<Path>, samples: &[LabeledSample]) -> Result<(), DatasetError> {
    write_samples(BufWriter::new(File::create(path)?), samples)
}

pub fn load_samples(path: impl AsRef<Path>) -> Result<Vec<LabeledSample>, DatasetError> {
    read_samples(BufReader::new(File::open(path)?))
}

/// Per-path label in a label file: variation statistics under `label`, or
/// an aging degradation under `aging_pct`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LabelValue {
    #[serde(rename = "label")]
    Variation(DegradationLabel),
    #[serde(rename = "aging_pct")]
    Aging(f64),
}

impl From<LabelValue> for Label {
    fn from(v: LabelValue) -> Self {
        match v {
            LabelValue::Variation(l) => l.into(),
            LabelValue::Aging(a) => Label::Scalar(a),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub design: String,
    pub path_index: usize,
    pub baseline_ps: f64,
    #[serde(flatten)]
    pub value: LabelValue,
}

pub fn write_labels<W: Write>(writer: W, labels: &[LabelRecord]) -> Result<(), DatasetError> {
    write_lines(writer, labels.iter())
}

pub fn read_labels<R: BufRead>(reader: R) -> Result<Vec<LabelRecord>, DatasetError> {
    read_lines(reader, Ok::<LabelRecord, String>)
}

pub fn save_labels(path: impl AsRef<Path>, labels: &[LabelRecord]) -> Result<(), DatasetError> {
    write_labels(BufWriter::new(File::create(path)?), labels)
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<LabelRecord>, DatasetError> {
    read_labels(BufReader::new(File::open(path)?))
}
