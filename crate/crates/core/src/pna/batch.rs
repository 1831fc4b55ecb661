// SPDX-License-Identifier: Apache-2.0

use ndarray::Array2;

use crate::graph::PathSubgraph;

use super::PnaError;

/// Disjoint union of subgraphs with edges grouped by destination node.
#[derive(Debug, Clone)]
pub struct GraphBatch {
    pub n_graphs: usize,
    /// Node inputs, one row per node.
    pub x: Array2<f64>,
    /// Edge sources and destinations, sorted by `(dst, src)`.
    pub src: Vec<usize>,
    pub dst: Vec<usize>,
    /// Incoming edges of node `v` are `offsets[v]..offsets[v + 1]`.
    pub offsets: Vec<usize>,
    pub graph_of: Vec<usize>,
    pub graph_sizes: Vec<usize>,
}

impl GraphBatch {
    /// `input_width` is the model's input width; with `target_mask` the last
    /// input column carries the path-membership flag.
    pub fn new(
        graphs: &[&PathSubgraph],
        input_width: usize,
        target_mask: bool,
    ) -> Result<Self, PnaError> {
        let n: usize = graphs.iter().map(|g| g.node_count()).sum();
        let mut x = Array2::zeros((n, input_width));
        let mut graph_of = Vec::with_capacity(n);
        let mut graph_sizes = Vec::with_capacity(graphs.len());
        let mut edges = Vec::new();
        let mut base = 0;
        for (gi, g) in graphs.iter().enumerate() {
            let width = g.feature_width + usize::from(target_mask);
            if width != input_width {
                return Err(PnaError::ShapeMismatch(format!(
                    "graph {gi} has input width {width}, model expects {input_width}"
                )));
            }
            for (i, &f) in g.features.iter().enumerate() {
                if f >= g.feature_width {
                    return Err(PnaError::ShapeMismatch(format!(
                        "graph {gi} node {i} feature index {f} out of range"
                    )));
                }
                x[[base + i, f]] = 1.0;
                if target_mask && g.target[i] {
                    x[[base + i, input_width - 1]] = 1.0;
                }
            }
            for &(u, v) in &g.edges {
                edges.push((base + v, base + u));
            }
            graph_of.extend(std::iter::repeat_n(gi, g.node_count()));
            graph_sizes.push(g.node_count());
            base += g.node_count();
        }
        edges.sort_unstable();
        let mut offsets = vec![0; n + 1];
        for &(v, _) in &edges {
            offsets[v + 1] += 1;
        }
        for v in 0..n {
            offsets[v + 1] += offsets[v];
        }
        Ok(Self {
            n_graphs: graphs.len(),
            x,
            src: edges.iter().map(|e| e.1).collect(),
            dst: edges.iter().map(|e| e.0).collect(),
            offsets,
            graph_of,
            graph_sizes,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.graph_of.len()
    }

    pub fn n_edges(&self) -> usize {
        self.src.len()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }
}
