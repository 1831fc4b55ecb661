// SPDX-License-Identifier: Apache-2.0

//! Path-level reliability degradation prediction for gate-level netlists.
//!
//! The pipeline parses a netlist, builds its circuit graph, ranks timing
//! paths with a fanout-loaded static timing engine, labels each path with
//! Monte-Carlo process-variation or aging degradation, cuts an h-hop
//! enclosing subgraph around it and regresses the label with a principal
//! neighbourhood aggregation (PNA) graph network.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dataset;
pub mod graph;
pub mod netlist;
pub mod pna;
pub mod sta;
