// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::CircuitGraph;

/// Worst path into one end point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingPath {
    /// PI or flip-flop launching the path.
    pub start: usize,
    /// PO or flip-flop capturing the path.
    pub end: usize,
    /// Combinational gates from start to end, exclusive of both.
    pub gates: Vec<usize>,
    /// End-point arrival under the library the path was extracted with.
    pub baseline_ps: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PathError {
    #[error("design has no timing end points")]
    NoEndpoints,
}

/// Selects the `count` end points with the worst slack and traces the worst
/// path into each one.
///
/// `arrival` holds per-node output arrival times. Slack ordering is the
/// reverse of end-point arrival ordering, so end points are ranked by
/// descending arrival with ties going to the smaller node id. End points fed
/// directly by a start point carry no gates and are skipped.
pub fn extract_timing_paths(
    graph: &CircuitGraph,
    arrival: &[f64],
    count: usize,
    flops_only: bool,
) -> Result<Vec<TimingPath>, PathError> {
    let mut endpoints = graph.endpoints(flops_only);
    if endpoints.is_empty() {
        return Err(PathError::NoEndpoints);
    }
    endpoints.sort_by(|&a, &b| {
        let (ta, tb) = (
            arrival[graph.endpoint_driver(a)],
            arrival[graph.endpoint_driver(b)],
        );
        tb.total_cmp(&ta).then(a.cmp(&b))
    });
    let mut out = Vec::with_capacity(count.min(endpoints.len()));
    for end in endpoints {
        if out.len() == count {
            break;
        }
        if let Some(path) = trace_back(graph, arrival, end) {
            out.push(path);
        }
    }
    Ok(out)
}

fn trace_back(graph: &CircuitGraph, arrival: &[f64], end: usize) -> Option<TimingPath> {
    let mut cur = graph.endpoint_driver(end);
    if graph.is_start_point(cur) {
        return None;
    }
    let mut gates = vec![cur];
    let start = loop {
        // fan-in lists are ascending, so strict > keeps the smallest id on ties
        let mut best = graph.fanin(cur)[0];
        for &u in &graph.fanin(cur)[1..] {
            if arrival[u] > arrival[best] {
                best = u;
            }
        }
        if graph.is_start_point(best) {
            break best;
        }
        gates.push(best);
        cur = best;
    };
    gates.reverse();
    Some(TimingPath {
        start,
        end,
        gates,
        baseline_ps: arrival[graph.endpoint_driver(end)],
    })
}
