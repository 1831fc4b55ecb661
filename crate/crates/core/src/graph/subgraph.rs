// SPDX-License-Identifier: Apache-2.0

use std::collections::VecDeque;

use super::{CircuitGraph, FeatureMatrix, TimingPath};

/// h-hop enclosing subgraph of a timing path.
///
/// `nodes` are parent-graph ids in ascending order; `edges` use local
/// indices into `nodes` and keep the parent's direction.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSubgraph {
    pub nodes: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
    pub target: Vec<bool>,
    pub features: Vec<usize>,
    pub feature_width: usize,
}

impl PathSubgraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.nodes.len()];
        for &(_, v) in &self.edges {
            d[v] += 1;
        }
        d
    }
}

/// Union over path gates `j` of `{ i | d(i, j) <= hops }`, with `d` the
/// shortest-path distance on the undirected skeleton, plus every parent edge
/// between two included nodes.
pub fn extract_enclosing_subgraph(
    graph: &CircuitGraph,
    features: &FeatureMatrix,
    path: &TimingPath,
    hops: usize,
) -> PathSubgraph {
    let n = graph.node_count();
    let mut depth = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for &g in &path.gates {
        if depth[g] == usize::MAX {
            depth[g] = 0;
            queue.push_back(g);
        }
    }
    while let Some(u) = queue.pop_front() {
        if depth[u] == hops {
            continue;
        }
        for &v in graph.fanin(u).iter().chain(graph.fanout(u)) {
            if depth[v] == usize::MAX {
                depth[v] = depth[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let nodes: Vec<usize> = (0..n).filter(|&v| depth[v] != usize::MAX).collect();
    let mut local = vec![usize::MAX; n];
    for (i, &v) in nodes.iter().enumerate() {
        local[v] = i;
    }
    let mut edges = Vec::new();
    for &u in &nodes {
        for &v in graph.fanout(u) {
            if local[v] != usize::MAX {
                edges.push((local[u], local[v]));
            }
        }
    }
    edges.sort_unstable();
    PathSubgraph {
        target: nodes.iter().map(|&v| depth[v] == 0).collect(),
        features: nodes.iter().map(|&v| features.hot[v]).collect(),
        feature_width: features.width,
        nodes,
        edges,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, encode_features};
    use crate::netlist::{parse_structural, CellCatalog};

    #[test]
    fn zero_hops_is_the_path() {
        let cat = CellCatalog::default();
        let n = parse_structural(
            "module c(a,b,y); input a,b; output y; wire w; \
             INV g1(.A(a),.Y(w)); NAND2 g2(.A(w),.B(b),.Y(y)); endmodule",
            &cat,
        )
        .unwrap();
        let g = build_graph(&n, &cat).unwrap();
        let x = encode_features(&g, &cat).unwrap();
        let path = TimingPath {
            start: 0,
            end: 2,
            gates: vec![3, 4],
            baseline_ps: 0.0,
        };
        let s = extract_enclosing_subgraph(&g, &x, &path, 0);
        assert_eq!(s.nodes, [3, 4]);
        assert_eq!(s.edges, [(0, 1)]);
        assert_eq!(s.target, [true, true]);
        let s = extract_enclosing_subgraph(&g, &x, &path, 1);
        assert_eq!(s.nodes, [0, 1, 2, 3, 4]);
        assert_eq!(s.edges.len(), 4);
        assert_eq!(s.in_degrees(), [0, 0, 1, 1, 2]);
        assert_eq!(s.features, x.hot);
    }
}
