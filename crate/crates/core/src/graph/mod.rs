// SPDX-License-Identifier: Apache-2.0

//! Directed circuit graph over gates, primary inputs and primary outputs.
//!
//! Node ids are assigned PIs first, then POs, then gates in declaration
//! order. An edge `(u, v)` means the output net of `u` feeds `v`. Flip-flops
//! are ordinary nodes; timing propagation treats them as path boundaries.

mod paths;
mod subgraph;

use std::collections::{HashMap, VecDeque};

use ndarray::Array2;

use crate::netlist::{CellCatalog, CellKind, Driver, Netlist, NetlistError};

pub use paths::{extract_timing_paths, PathError, TimingPath};
pub use subgraph::{extract_enclosing_subgraph, PathSubgraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRole {
    PrimaryInput,
    PrimaryOutput,
    /// `gate` indexes `Netlist::gates`; `kind` indexes [`CircuitGraph::kinds`].
    Gate {
        gate: usize,
        kind: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub name: String,
    pub role: NodeRole,
}

#[derive(Debug, Clone)]
pub struct CircuitGraph {
    pub design: String,
    pub clock_period_ns: f64,
    nodes: Vec<Node>,
    kinds: Vec<CellKind>,
    edges: Vec<(usize, usize)>,
    fanin: Vec<Vec<usize>>,
    fanout: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

/// Builds the circuit graph of a validated netlist.
pub fn build_graph(netlist: &Netlist, catalog: &CellCatalog) -> Result<CircuitGraph, NetlistError> {
    let n_pi = netlist.primary_inputs.len();
    let n_po = netlist.primary_outputs.len();
    let mut nodes = Vec::with_capacity(n_pi + n_po + netlist.gates.len());
    for pi in &netlist.primary_inputs {
        nodes.push(Node {
            name: pi.clone(),
            role: NodeRole::PrimaryInput,
        });
    }
    for po in &netlist.primary_outputs {
        nodes.push(Node {
            name: po.clone(),
            role: NodeRole::PrimaryOutput,
        });
    }
    let mut kinds: Vec<CellKind> = Vec::new();
    let mut kind_slot: HashMap<&str, usize> = HashMap::new();
    for (i, g) in netlist.gates.iter().enumerate() {
        let kind = match kind_slot.get(g.kind.as_str()) {
            Some(&k) => k,
            None => {
                let ck = catalog
                    .get(&g.kind)
                    .ok_or_else(|| NetlistError::UnknownCell(g.kind.clone()))?;
                kinds.push(ck.clone());
                kind_slot.insert(g.kind.as_str(), kinds.len() - 1);
                kinds.len() - 1
            }
        };
        nodes.push(Node {
            name: g.name.clone(),
            role: NodeRole::Gate { gate: i, kind },
        });
    }

    let drivers = netlist.drivers()?;
    let driver_node = |net: &str| -> Result<usize, NetlistError> {
        match drivers.get(net) {
            Some(Driver::PrimaryInput(i)) => Ok(*i),
            Some(Driver::Gate(g)) => Ok(n_pi + n_po + g),
            None => Err(NetlistError::UndrivenNet(net.to_string())),
        }
    };
    let mut edges = Vec::new();
    for (i, po) in netlist.primary_outputs.iter().enumerate() {
        edges.push((driver_node(po)?, n_pi + i));
    }
    for (i, g) in netlist.gates.iter().enumerate() {
        for net in &g.inputs {
            edges.push((driver_node(net)?, n_pi + n_po + i));
        }
    }
    edges.sort_unstable();
    edges.dedup();

    let n = nodes.len();
    let mut fanin = vec![Vec::new(); n];
    let mut fanout = vec![Vec::new(); n];
    for &(u, v) in &edges {
        fanout[u].push(v);
        fanin[v].push(u);
    }
    for list in fanin.iter_mut() {
        list.sort_unstable();
    }

    let mut graph = CircuitGraph {
        design: netlist.name.clone(),
        clock_period_ns: netlist.clock_period_ns,
        nodes,
        kinds,
        edges,
        fanin,
        fanout,
        topo: Vec::new(),
    };
    graph.topo = graph.combinational_order()?;
    Ok(graph)
}

impl CircuitGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    /// Sorted, duplicate-free edge list.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Fan-in node ids in ascending order.
    pub fn fanin(&self, id: usize) -> &[usize] {
        &self.fanin[id]
    }

    pub fn fanout(&self, id: usize) -> &[usize] {
        &self.fanout[id]
    }

    /// Cell kinds present in this design, referenced by `NodeRole::Gate::kind`.
    pub fn kinds(&self) -> &[CellKind] {
        &self.kinds
    }

    pub fn kind_of(&self, id: usize) -> Option<&CellKind> {
        match self.nodes[id].role {
            NodeRole::Gate { kind, .. } => Some(&self.kinds[kind]),
            _ => None,
        }
    }

    pub fn is_sequential(&self, id: usize) -> bool {
        self.kind_of(id).is_some_and(|k| k.sequential)
    }

    /// PIs and flip-flop outputs launch timing paths.
    pub fn is_start_point(&self, id: usize) -> bool {
        self.nodes[id].role == NodeRole::PrimaryInput || self.is_sequential(id)
    }

    /// Number of cell loads on a node's output net. PO ports are not loads.
    pub fn load_count(&self, id: usize) -> usize {
        self.fanout[id]
            .iter()
            .filter(|&&v| matches!(self.nodes[v].role, NodeRole::Gate { .. }))
            .count()
    }

    /// End points: PO nodes, then flip-flops (their D pin), in id order.
    pub fn endpoints(&self, flops_only: bool) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&v| {
                self.is_sequential(v)
                    || (!flops_only && self.nodes[v].role == NodeRole::PrimaryOutput)
            })
            .collect()
    }

    /// Node whose output reaches the data side of an end point.
    pub fn endpoint_driver(&self, endpoint: usize) -> usize {
        self.fanin[endpoint][0]
    }

    /// Order in which every node's combinational fan-in is visited first.
    /// Edges into flip-flops are ignored.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    fn combinational_order(&self) -> Result<Vec<usize>, NetlistError> {
        let n = self.nodes.len();
        let mut indeg: Vec<usize> = (0..n)
            .map(|v| {
                if self.is_sequential(v) {
                    0
                } else {
                    self.fanin[v].len()
                }
            })
            .collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in &self.fanout[u] {
                if self.is_sequential(v) {
                    continue;
                }
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    queue.push_back(v);
                }
            }
        }
        if order.len() != n {
            let stuck = (0..n)
                .filter(|&v| indeg[v] > 0)
                .map(|v| self.nodes[v].name.clone());
            return Err(NetlistError::CombinationalCycle(stuck.collect()));
        }
        Ok(order)
    }
}

/// One-hot node features stored as the hot column per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureMatrix {
    pub width: usize,
    pub hot: Vec<usize>,
}

impl FeatureMatrix {
    pub fn to_dense(&self) -> Array2<i32> {
        let mut x = Array2::zeros((self.hot.len(), self.width));
        for (i, &c) in self.hot.iter().enumerate() {
            x[[i, c]] = 1;
        }
        x
    }
}

/// Encodes every node as a one-hot row: the catalog function column for gates,
/// `width - 2` for PIs and `width - 1` for POs.
pub fn encode_features(
    graph: &CircuitGraph,
    catalog: &CellCatalog,
) -> Result<FeatureMatrix, NetlistError> {
    let width = catalog.feature_width();
    let hot = graph
        .nodes
        .iter()
        .map(|node| match node.role {
            NodeRole::PrimaryInput => Ok(width - 2),
            NodeRole::PrimaryOutput => Ok(width - 1),
            NodeRole::Gate { kind, .. } => {
                let name = &graph.kinds[kind].name;
                let ck = catalog
                    .get(name)
                    .ok_or_else(|| NetlistError::UnknownCell(name.clone()))?;
                Ok(catalog
                    .function_index(&ck.function)
                    .expect("catalog functions cover their kinds"))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FeatureMatrix { width, hot })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_structural;

    fn two_gate() -> (Netlist, CellCatalog) {
        let cat = CellCatalog::default();
        let n = parse_structural(
            "module m(a,b,y); input a,b; output y; wire w; \
             INV g1(.A(a),.Y(w)); NAND2 g2(.A(w),.B(b),.Y(y)); endmodule",
            &cat,
        )
        .unwrap();
        (n, cat)
    }

    #[test]
    fn node_ids_and_edges() {
        let (n, cat) = two_gate();
        let g = build_graph(&n, &cat).unwrap();
        let names: Vec<_> = g.nodes().iter().map(|n| n.name.as_str()).collect();
        assert_eq!(names, ["a", "b", "y", "g1", "g2"]);
        // a->g1, b->g2, g1->g2, g2->y
        assert_eq!(g.edges(), &[(0, 3), (1, 4), (3, 4), (4, 2)]);
        assert_eq!(g.fanin(2).len(), 1);
        assert!(g.fanout(2).is_empty());
        assert_eq!(g.load_count(4), 0);
        assert_eq!(g.load_count(3), 1);
    }

    #[test]
    fn passthrough_netlist() {
        let cat = CellCatalog::default();
        let n = Netlist {
            name: "p".into(),
            clock_period_ns: 1.0,
            primary_inputs: vec!["a".into()],
            primary_outputs: vec!["a".into()],
            gates: vec![],
        };
        let g = build_graph(&n, &cat).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn one_hot_rows() {
        let (n, cat) = two_gate();
        let g = build_graph(&n, &cat).unwrap();
        let x = encode_features(&g, &cat).unwrap();
        let k = cat.feature_width();
        let nand = cat.function_index("NAND").unwrap();
        assert_eq!(x.hot, vec![k - 2, k - 2, k - 1, 0, nand]);
        let dense = x.to_dense();
        assert!(dense.rows().into_iter().all(|r| r.sum() == 1));
        assert_eq!(dense[[4, nand]], 1);
    }

    #[test]
    fn encode_with_foreign_catalog_fails() {
        let (n, cat) = two_gate();
        let g = build_graph(&n, &cat).unwrap();
        let small = CellCatalog::new(vec![CellKind::combinational("INV", "INV", 1)]).unwrap();
        assert_eq!(
            encode_features(&g, &small),
            Err(NetlistError::UnknownCell("NAND2".into()))
        );
    }
}
