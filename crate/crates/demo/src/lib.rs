// SPDX-License-Identifier: Apache-2.0

//! Browser demo. Every export takes plain values and returns a JSON string;
//! `www/index.html` draws the results.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use relgraph_core::graph::{
    build_graph, encode_features, extract_enclosing_subgraph, extract_timing_paths, CircuitGraph,
    TimingPath,
};
use relgraph_core::netlist::{parse_structural, CellCatalog, Netlist};
use relgraph_core::pna::degree_scalers;
use relgraph_core::sta::{compute_arrivals, variation_degradations, DelayLibrary, DelayMeasure};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, JsValue> {
    serde_json::to_string(v).map_err(js_err)
}

struct Parsed {
    netlist: Netlist,
    graph: CircuitGraph,
    paths: Vec<TimingPath>,
    catalog: CellCatalog,
    library: DelayLibrary,
}

fn parse(verilog: &str) -> Result<Parsed, String> {
    let catalog = CellCatalog::default();
    let library = DelayLibrary::default();
    let netlist = parse_structural(verilog, &catalog).map_err(|e| e.to_string())?;
    let graph = build_graph(&netlist, &catalog).map_err(|e| e.to_string())?;
    let arrival = compute_arrivals(&graph, &library, None).map_err(|e| e.to_string())?;
    let paths =
        extract_timing_paths(&graph, &arrival, usize::MAX, false).map_err(|e| e.to_string())?;
    if paths.is_empty() {
        return Err("the netlist has no timing path through a gate".into());
    }
    Ok(Parsed {
        netlist,
        graph,
        paths,
        catalog,
        library,
    })
}

fn pick(p: &Parsed, rank: usize) -> Result<&TimingPath, String> {
    p.paths.get(rank).ok_or_else(|| {
        format!(
            "path rank {rank} out of range, the design has {} paths",
            p.paths.len()
        )
    })
}

#[derive(Serialize)]
struct SubgraphNode {
    name: String,
    kind: String,
    on_path: bool,
}

#[derive(Serialize)]
struct SubgraphView {
    design: String,
    path_count: usize,
    start: String,
    end: String,
    baseline_ps: f64,
    nodes: Vec<SubgraphNode>,
    edges: Vec<(usize, usize)>,
}

/// The `hops`-hop enclosing subgraph of the `rank`-th worst path.
#[wasm_bindgen]
pub fn enclosing_subgraph(verilog: &str, rank: usize, hops: usize) -> Result<String, JsValue> {
    let p = parse(verilog).map_err(js_err)?;
    let path = pick(&p, rank).map_err(js_err)?;
    let features = encode_features(&p.graph, &p.catalog).map_err(js_err)?;
    let sub = extract_enclosing_subgraph(&p.graph, &features, path, hops);
    let kind = |v: usize| {
        p.graph
            .kind_of(v)
            .map_or_else(|| format!("{:?}", p.graph.node(v).role), |k| k.name.clone())
    };
    to_json(&SubgraphView {
        design: p.netlist.name.clone(),
        path_count: p.paths.len(),
        start: p.graph.node(path.start).name.clone(),
        end: p.graph.node(path.end).name.clone(),
        baseline_ps: path.baseline_ps,
        nodes: sub
            .nodes
            .iter()
            .zip(&sub.target)
            .map(|(&v, &on_path)| SubgraphNode {
                name: p.graph.node(v).name.clone(),
                kind: kind(v),
                on_path,
            })
            .collect(),
        edges: sub.edges,
    })
}

#[derive(Serialize)]
struct Histogram {
    values: Vec<f64>,
    mu: f64,
    max: f64,
    lo: f64,
    width: f64,
    counts: Vec<usize>,
}

/// Per-instance degradation in percent of the `rank`-th worst path, binned.
#[wasm_bindgen]
pub fn monte_carlo(
    verilog: &str,
    rank: usize,
    instances: usize,
    seed: u64,
    bins: usize,
) -> Result<String, JsValue> {
    let p = parse(verilog).map_err(js_err)?;
    let path = pick(&p, rank).map_err(js_err)?.clone();
    let per = variation_degradations(
        &p.netlist,
        &p.graph,
        &p.library,
        std::slice::from_ref(&path),
        instances.max(1),
        seed,
        DelayMeasure::Endpoint,
    )
    .map_err(js_err)?;
    let values: Vec<f64> = per.iter().map(|v| v[0]).collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bins = bins.clamp(1, 200);
    let width = ((max - lo) / bins as f64).max(1e-9);
    let mut counts = vec![0; bins];
    for v in &values {
        counts[(((v - lo) / width) as usize).min(bins - 1)] += 1;
    }
    to_json(&Histogram {
        mu: values.iter().sum::<f64>() / values.len() as f64,
        values,
        max,
        lo,
        width,
        counts,
    })
}

/// `[degree, amplification, attenuation]` for degrees `1..=max_degree`.
#[wasm_bindgen]
pub fn scaler_curve(delta: f64, max_degree: usize) -> Result<String, JsValue> {
    if !(delta > 0.0) {
        return Err(js_err("delta must be positive"));
    }
    let rows: Vec<[f64; 3]> = (1..=max_degree.clamp(1, 10_000))
        .map(|d| {
            let s = degree_scalers(d, delta);
            [d as f64, s[1], s[2]]
        })
        .collect();
    to_json(&rows)
}
