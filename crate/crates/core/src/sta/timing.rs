// SPDX-License-Identifier: Apache-2.0

use crate::graph::{CircuitGraph, NodeRole, TimingPath};

use super::{DelayLibrary, StaError, VariationInstance};

/// Fanout-loaded linear delay: `(d0 + k_load * fanout) * multiplier`.
pub fn gate_delay(d0_ps: f64, k_load_ps: f64, fanout: usize, multiplier: f64) -> f64 {
    (d0_ps + k_load_ps * fanout as f64) * multiplier
}

/// Nominal per-node delay before variation: fanout-loaded delay for
/// combinational gates, clock-to-Q for flip-flops, zero for ports.
pub fn nominal_delays(graph: &CircuitGraph, lib: &DelayLibrary) -> Result<Vec<f64>, StaError> {
    (0..graph.node_count())
        .map(|v| match graph.kind_of(v) {
            None => Ok(0.0),
            Some(kind) => {
                let cell = lib.cell(&kind.name)?;
                if kind.sequential {
                    cell.clk_to_q_ps
                        .ok_or_else(|| StaError::MissingClockToQ(kind.name.clone()))
                } else {
                    Ok(gate_delay(
                        cell.d0_ps,
                        cell.k_load_ps,
                        graph.load_count(v),
                        1.0,
                    ))
                }
            }
        })
        .collect()
}

/// Per-node delay after applying an instance's gate multipliers.
pub fn scaled_delays(
    graph: &CircuitGraph,
    nominal: &[f64],
    instance: Option<&VariationInstance>,
) -> Vec<f64> {
    match instance {
        None => nominal.to_vec(),
        Some(inst) => (0..graph.node_count())
            .map(|v| match graph.node(v).role {
                NodeRole::Gate { gate, .. } => nominal[v] * inst.multipliers[gate],
                _ => nominal[v],
            })
            .collect(),
    }
}

/// Longest-path arrival at every node's output from per-node delays.
///
/// PIs start at 0, flip-flops at their own (clock-to-Q) delay, PO nodes copy
/// their driver, gates add their delay to the latest fan-in.
pub fn propagate_arrivals(graph: &CircuitGraph, delays: &[f64]) -> Vec<f64> {
    let mut arrival = vec![0.0; graph.node_count()];
    for &v in graph.topological_order() {
        arrival[v] = match graph.node(v).role {
            NodeRole::PrimaryInput => 0.0,
            NodeRole::PrimaryOutput => arrival[graph.fanin(v)[0]],
            NodeRole::Gate { .. } if graph.is_sequential(v) => delays[v],
            NodeRole::Gate { .. } => {
                let latest = graph
                    .fanin(v)
                    .iter()
                    .map(|&u| arrival[u])
                    .fold(f64::NEG_INFINITY, f64::max);
                latest + delays[v]
            }
        };
    }
    arrival
}

/// Static timing under `lib`, optionally with a variation or aging instance.
pub fn compute_arrivals(
    graph: &CircuitGraph,
    lib: &DelayLibrary,
    instance: Option<&VariationInstance>,
) -> Result<Vec<f64>, StaError> {
    let nominal = nominal_delays(graph, lib)?;
    Ok(propagate_arrivals(
        graph,
        &scaled_delays(graph, &nominal, instance),
    ))
}

/// Arrival at the data side of an end point.
pub fn endpoint_arrival(graph: &CircuitGraph, arrival: &[f64], endpoint: usize) -> f64 {
    arrival[graph.endpoint_driver(endpoint)]
}

/// `(end point, clock period - arrival)` for every end point, in node order.
/// Negative values are timing violations.
pub fn compute_slacks(
    graph: &CircuitGraph,
    arrival: &[f64],
    clock_period_ns: f64,
) -> Vec<(usize, f64)> {
    let period_ps = clock_period_ns * 1000.0;
    graph
        .endpoints(false)
        .into_iter()
        .map(|e| (e, period_ps - endpoint_arrival(graph, arrival, e)))
        .collect()
}

/// Sum of the launching flip-flop's clock-to-Q and each path gate's delay,
/// with fanout taken from the full graph.
pub fn path_delay(
    graph: &CircuitGraph,
    lib: &DelayLibrary,
    path: &TimingPath,
    instance: Option<&VariationInstance>,
) -> Result<f64, StaError> {
    let nominal = nominal_delays(graph, lib)?;
    Ok(path_delay_with(
        graph,
        &scaled_delays(graph, &nominal, instance),
        path,
    ))
}

pub(crate) fn path_delay_with(graph: &CircuitGraph, delays: &[f64], path: &TimingPath) -> f64 {
    let launch = if graph.is_sequential(path.start) {
        delays[path.start]
    } else {
        0.0
    };
    path.gates.iter().fold(launch, |acc, &g| acc + delays[g])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use crate::netlist::{parse_structural, CellCatalog};

    #[test]
    fn delay_formula() {
        assert_eq!(gate_delay(10.0, 2.0, 3, 1.0), 16.0);
        assert!((gate_delay(10.0, 2.0, 3, 1.1) - 17.6).abs() < 1e-12);
        assert_eq!(gate_delay(10.0, 2.0, 0, 1.3), 13.0);
    }

    fn unit_lib() -> DelayLibrary {
        let mut lib = DelayLibrary::default();
        for c in lib.cells.values_mut() {
            c.d0_ps = 1.0;
            c.k_load_ps = 0.0;
            if c.clk_to_q_ps.is_some() {
                c.clk_to_q_ps = Some(1.0);
            }
        }
        lib
    }

    #[test]
    fn unit_chain_arrival() {
        let cat = CellCatalog::default();
        let n = parse_structural(
            "module c(a,y); input a; output y; wire w1,w2; \
             INV g1(.A(a),.Y(w1)); INV g2(.A(w1),.Y(w2)); INV g3(.A(w2),.Y(y)); endmodule",
            &cat,
        )
        .unwrap();
        let g = build_graph(&n, &cat).unwrap();
        let arr = compute_arrivals(&g, &unit_lib(), None).unwrap();
        assert_eq!(endpoint_arrival(&g, &arr, 1), 3.0);
        let slacks = compute_slacks(&g, &arr, 0.0035);
        assert_eq!(slacks.len(), 1);
        assert!((slacks[0].1 - 0.5).abs() < 1e-12);
        assert!(compute_slacks(&g, &arr, 0.001)[0].1 < 0.0);
    }

    #[test]
    fn flop_launch_and_capture() {
        let cat = CellCatalog::default();
        let n = parse_structural(
            "module s(a,y); input a; output y; wire q, w; \
             DFF f1(.D(w),.Q(q)); NAND2 g1(.A(q),.B(a),.Y(w)); INV g2(.A(w),.Y(y)); endmodule",
            &cat,
        )
        .unwrap();
        let g = build_graph(&n, &cat).unwrap();
        let lib = DelayLibrary::default();
        let arr = compute_arrivals(&g, &lib, None).unwrap();
        // a=0 y=1 f1=2 g1=3 g2=4; g1 drives f1 and g2 (two loads)
        let nand = lib.cell("NAND2").unwrap();
        let expect_g1 = 4.0 + nand.d0_ps + 2.0 * nand.k_load_ps;
        assert!((arr[2] - 4.0).abs() < 1e-12);
        assert!((arr[3] - expect_g1).abs() < 1e-12);
        assert!((endpoint_arrival(&g, &arr, 2) - expect_g1).abs() < 1e-12);
        let path = TimingPath {
            start: 2,
            end: 2,
            gates: vec![3],
            baseline_ps: 0.0,
        };
        assert!((path_delay(&g, &lib, &path, None).unwrap() - expect_g1).abs() < 1e-12);
    }
}
