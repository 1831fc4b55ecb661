// SPDX-License-Identifier: Apache-2.0
#![allow(dead_code)]

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relgraph_core::graph::PathSubgraph;
use relgraph_core::pna::{GraphBatch, Mode, PnaLayer, PnaModel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random directed graph with distinct edges, no self-loops, and a random
/// non-empty target set.
pub fn random_subgraph(rng: &mut ChaCha8Rng, n: usize, edges: usize, k: usize) -> PathSubgraph {
    let mut e = Vec::new();
    let max_edges = n * (n - 1);
    while e.len() < edges.min(max_edges) {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v && !e.contains(&(u, v)) {
            e.push((u, v));
        }
    }
    e.sort_unstable();
    let mut target: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
    target[0] = true;
    PathSubgraph {
        nodes: (0..n).map(|i| i * 3 + 1).collect(),
        edges: e,
        target,
        features: (0..n).map(|_| rng.random_range(0..k)).collect(),
        feature_width: k,
    }
}

/// Applies a node permutation `perm[old] = new`.
pub fn relabel(g: &PathSubgraph, perm: &[usize]) -> PathSubgraph {
    let n = g.node_count();
    let mut features = vec![0; n];
    let mut target = vec![false; n];
    let mut nodes = vec![0; n];
    for old in 0..n {
        features[perm[old]] = g.features[old];
        target[perm[old]] = g.target[old];
        nodes[perm[old]] = g.nodes[old];
    }
    let mut edges: Vec<_> = g.edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
    edges.sort_unstable();
    PathSubgraph {
        nodes,
        edges,
        target,
        features,
        feature_width: g.feature_width,
    }
}

/// `|a - n| / max(|a|, |n|)`, or zero when both vanish below `floor`.
pub fn relative_error(a: f64, n: f64, floor: f64) -> f64 {
    let scale = a.abs().max(n.abs());
    if scale < floor {
        0.0
    } else {
        (a - n).abs() / scale
    }
}

pub struct GradCheck {
    pub checked: usize,
    pub worst: f64,
    pub worst_at: (usize, usize),
}

fn model_loss(model: &mut PnaModel, batch: &GraphBatch, w: &Array1<f64>) -> f64 {
    let (out, _) = model.forward(batch, Mode::Train).unwrap();
    out.dot(w)
}

/// Central differences with step `h` on every parameter entry of a model in
/// train mode, for the loss `sum_g w_g * out_g`.
pub fn check_model_gradients(
    model: &mut PnaModel,
    batch: &GraphBatch,
    w: &Array1<f64>,
    h: f64,
    floor: f64,
) -> GradCheck {
    model.zero_grad();
    let (_, cache) = model.forward(batch, Mode::Train).unwrap();
    model.backward(batch, &cache, w);
    let analytic: Vec<Array2<f64>> = model.params().iter().map(|p| p.grad.clone()).collect();
    let mut report = GradCheck {
        checked: 0,
        worst: 0.0,
        worst_at: (0, 0),
    };
    for (pi, grad) in analytic.iter().enumerate() {
        for idx in 0..grad.len() {
            let (r, c) = (idx / grad.ncols(), idx % grad.ncols());
            let orig = model.params()[pi].value[[r, c]];
            model.params_mut()[pi].value[[r, c]] = orig + h;
            let up = model_loss(model, batch, w);
            model.params_mut()[pi].value[[r, c]] = orig - h;
            let down = model_loss(model, batch, w);
            model.params_mut()[pi].value[[r, c]] = orig;
            let numeric = (up - down) / (2.0 * h);
            let err = relative_error(grad[[r, c]], numeric, floor);
            if err > report.worst {
                report.worst = err;
                report.worst_at = (pi, idx);
            }
            report.checked += 1;
        }
    }
    report
}

fn layer_loss(layer: &PnaLayer, z: &Array2<f64>, batch: &GraphBatch, w: &Array2<f64>) -> f64 {
    let (y, _) = layer.forward(z.view(), batch).unwrap();
    (&y * w).sum()
}

/// Finite-difference check of one layer for the loss `sum(W * layer(z))`,
/// over its parameters and its input.
pub fn check_layer_gradients(
    layer: &mut PnaLayer,
    z: &Array2<f64>,
    batch: &GraphBatch,
    w: &Array2<f64>,
    h: f64,
    floor: f64,
) -> GradCheck {
    for p in layer.params_mut() {
        p.zero_grad();
    }
    let (_, cache) = layer.forward(z.view(), batch).unwrap();
    let gz = layer.backward(batch, &cache, w.view());
    let analytic: Vec<Array2<f64>> = layer.params().iter().map(|p| p.grad.clone()).collect();
    let mut report = GradCheck {
        checked: 0,
        worst: 0.0,
        worst_at: (0, 0),
    };
    for (pi, grad) in analytic.iter().enumerate() {
        for idx in 0..grad.len() {
            let (r, c) = (idx / grad.ncols(), idx % grad.ncols());
            let orig = layer.params()[pi].value[[r, c]];
            layer.params_mut()[pi].value[[r, c]] = orig + h;
            let up = layer_loss(layer, z, batch, w);
            layer.params_mut()[pi].value[[r, c]] = orig - h;
            let down = layer_loss(layer, z, batch, w);
            layer.params_mut()[pi].value[[r, c]] = orig;
            let err = relative_error(grad[[r, c]], (up - down) / (2.0 * h), floor);
            if err > report.worst {
                report.worst = err;
                report.worst_at = (pi, idx);
            }
            report.checked += 1;
        }
    }
    let mut zp = z.clone();
    for idx in 0..z.len() {
        let (r, c) = (idx / z.ncols(), idx % z.ncols());
        let orig = z[[r, c]];
        zp[[r, c]] = orig + h;
        let up = layer_loss(layer, &zp, batch, w);
        zp[[r, c]] = orig - h;
        let down = layer_loss(layer, &zp, batch, w);
        zp[[r, c]] = orig;
        let err = relative_error(gz[[r, c]], (up - down) / (2.0 * h), floor);
        if err > report.worst {
            report.worst = err;
            report.worst_at = (usize::MAX, idx);
        }
        report.checked += 1;
    }
    report
}

fn affine(w: &Array2<f64>, b: &Array2<f64>, x: &[f64]) -> Vec<f64> {
    (0..w.nrows())
        .map(|o| b[[0, o]] + (0..w.ncols()).map(|i| w[[o, i]] * x[i]).sum::<f64>())
        .collect()
}

/// Straight-line reimplementation of one layer over an edge list `(u, v)`.
pub fn naive_layer(layer: &PnaLayer, z: &[Vec<f64>], edges: &[(usize, usize)]) -> Vec<Vec<f64>> {
    let cfg = layer.config;
    let n = z.len();
    let c = cfg.f_in / cfg.towers;
    let mut concat = vec![Vec::new(); n];
    for (t, tower) in layer.towers.iter().enumerate() {
        let part = |v: usize| z[v][t * c..(t + 1) * c].to_vec();
        for v in 0..n {
            let mut msgs = Vec::new();
            for &(u, dst) in edges {
                if dst == v {
                    let mut h = part(v);
                    h.extend(part(u));
                    msgs.push(affine(
                        &tower.message.weight.value,
                        &tower.message.bias.value,
                        &h,
                    ));
                }
            }
            let d = msgs.len();
            let mut stats = vec![0.0; 4 * c];
            if d > 0 {
                for j in 0..c {
                    let col: Vec<f64> = msgs.iter().map(|m| m[j]).collect();
                    let mean = col.iter().sum::<f64>() / d as f64;
                    let sq = col.iter().map(|x| x * x).sum::<f64>() / d as f64;
                    stats[j] = mean;
                    stats[c + j] = ((sq - mean * mean).max(0.0) + cfg.epsilon).sqrt();
                    stats[2 * c + j] = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    stats[3 * c + j] = col.iter().cloned().fold(f64::INFINITY, f64::min);
                }
            }
            let amp = if d == 0 {
                1.0
            } else {
                ((d + 1) as f64).ln() / cfg.delta
            };
            let mut u_in = part(v);
            for s in [1.0, amp, 1.0 / amp] {
                u_in.extend(stats.iter().map(|x| x * s));
            }
            concat[v].extend(affine(
                &tower.update.weight.value,
                &tower.update.bias.value,
                &u_in,
            ));
        }
    }
    concat
        .iter()
        .map(|x| affine(&layer.mix.weight.value, &layer.mix.bias.value, x))
        .collect()
}

use relgraph_core::graph::{CircuitGraph, NodeRole};
use relgraph_core::netlist::{CellCatalog, GateInstance, Netlist};

/// Random valid netlist: combinational gates read earlier nets, flip-flops
/// capture any net, and loadless gate outputs become primary outputs.
pub fn random_netlist(rng: &mut ChaCha8Rng, n_gates: usize, catalog: &CellCatalog) -> Netlist {
    let n_pi = rng.random_range(1..4);
    let n_ff = rng.random_range(0..=n_gates / 4);
    let n_comb = n_gates - n_ff;
    let primary_inputs: Vec<String> = (0..n_pi).map(|i| format!("in{i}")).collect();
    let mut nets: Vec<String> = primary_inputs.clone();
    nets.extend((0..n_ff).map(|i| format!("ffq{i}")));
    let comb: Vec<_> = catalog.kinds().iter().filter(|k| !k.sequential).collect();
    let mut gates = Vec::new();
    let mut used = std::collections::HashSet::new();
    for i in 0..n_comb {
        let kind = comb[rng.random_range(0..comb.len())];
        let inputs: Vec<String> = (0..kind.input_pins)
            .map(|_| nets[rng.random_range(0..nets.len())].clone())
            .collect();
        used.extend(inputs.iter().cloned());
        let out = format!("w{i}");
        gates.push(GateInstance {
            name: format!("u{i}"),
            kind: kind.name.clone(),
            inputs,
            output: out.clone(),
        });
        nets.push(out);
    }
    for i in 0..n_ff {
        let d = nets[rng.random_range(0..nets.len())].clone();
        used.insert(d.clone());
        gates.push(GateInstance {
            name: format!("ff{i}"),
            kind: "DFF".into(),
            inputs: vec![d],
            output: format!("ffq{i}"),
        });
    }
    let mut primary_outputs: Vec<String> = gates[..n_comb]
        .iter()
        .filter(|g| !used.contains(&g.output) || rng.random_bool(0.1))
        .map(|g| g.output.clone())
        .collect();
    if primary_outputs.is_empty() && n_comb > 0 {
        primary_outputs.push(gates[n_comb - 1].output.clone());
    }
    Netlist {
        name: "rand".into(),
        clock_period_ns: 1.0,
        primary_inputs,
        primary_outputs,
        gates,
    }
}

/// All-pairs hop distances on the undirected skeleton by Floyd-Warshall.
pub fn undirected_distances(g: &CircuitGraph) -> Vec<Vec<usize>> {
    let n = g.node_count();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for &(u, v) in g.edges() {
        d[u][v] = 1;
        d[v][u] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            if d[i][k] == inf {
                continue;
            }
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Every start-to-node path, with its delay summed from the start.
pub fn enumerate_arrivals(g: &CircuitGraph, delays: &[f64]) -> Vec<f64> {
    fn walk(g: &CircuitGraph, delays: &[f64], v: usize, acc: f64, best: &mut [f64]) {
        best[v] = best[v].max(acc);
        for &w in g.fanout(v) {
            match g.node(w).role {
                NodeRole::PrimaryOutput => best[w] = best[w].max(acc),
                NodeRole::Gate { .. } if !g.is_sequential(w) => {
                    walk(g, delays, w, acc + delays[w], best)
                }
                _ => {}
            }
        }
    }
    let mut best = vec![f64::NEG_INFINITY; g.node_count()];
    for v in 0..g.node_count() {
        if g.is_start_point(v) {
            let launch = if g.is_sequential(v) { delays[v] } else { 0.0 };
            walk(g, delays, v, launch, &mut best);
        }
    }
    best
}
