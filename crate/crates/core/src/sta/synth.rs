// SPDX-License-Identifier: Apache-2.0

//! Random layered netlists with flip-flop boundaries, used as desk-scale
//! benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::netlist::{CellCatalog, GateInstance, Netlist};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    /// Total cell instances, flip-flops included.
    pub n_gates: usize,
    /// Number of combinational layers between sources and registers.
    pub depth: usize,
    pub seed: u64,
    /// Share of `n_gates` that are flip-flops.
    pub flop_fraction: f64,
    /// Primary inputs; `None` picks `max(2, n_gates / 50)`.
    pub inputs: Option<usize>,
}

impl SynthConfig {
    pub fn new(n_gates: usize, depth: usize, seed: u64) -> Self {
        Self {
            n_gates,
            depth,
            seed,
            flop_fraction: 0.45,
            inputs: None,
        }
    }
}

/// Builds a valid netlist: sources are PIs and flip-flop outputs,
/// combinational gates sit on `depth` layers and draw inputs mostly from the
/// previous layer, flip-flops capture from the deeper half, and every
/// combinational gate without a load becomes a primary output.
pub fn generate_synthetic_netlist(config: &SynthConfig, catalog: &CellCatalog) -> Netlist {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n_gates = config.n_gates.max(1);
    let depth = config.depth.max(1);
    let comb_kinds: Vec<_> = catalog.kinds().iter().filter(|k| !k.sequential).collect();
    let flop_kind = catalog.kinds().iter().find(|k| k.sequential);
    let n_ff = match flop_kind {
        Some(_) if n_gates > 1 => {
            ((n_gates as f64 * config.flop_fraction).round() as usize).min(n_gates - 1)
        }
        _ => 0,
    };
    let n_comb = n_gates - n_ff;
    let n_pi = config.inputs.unwrap_or((n_gates / 50).max(2)).max(1);

    // layer 0 holds source nets
    let mut layers: Vec<Vec<String>> = vec![Vec::new(); depth + 1];
    let primary_inputs: Vec<String> = (0..n_pi).map(|i| format!("pi{i}")).collect();
    layers[0].extend(primary_inputs.iter().cloned());
    layers[0].extend((0..n_ff).map(|i| format!("q{i}")));

    let mut layer_of = Vec::with_capacity(n_comb);
    for i in 0..n_comb {
        // spread evenly, then jitter by one layer
        let base = 1 + i * depth / n_comb;
        let l = match rng.random_range(0..4) {
            0 if base > 1 => base - 1,
            1 if base < depth => base + 1,
            _ => base,
        };
        layer_of.push(l);
    }
    layer_of.sort_unstable();

    let mut loads = std::collections::HashMap::<String, usize>::new();
    let mut gates = Vec::with_capacity(n_gates);
    for (i, &l) in layer_of.iter().enumerate() {
        let kind = comb_kinds[rng.random_range(0..comb_kinds.len())];
        let mut inputs: Vec<String> = Vec::with_capacity(kind.input_pins);
        for _ in 0..kind.input_pins {
            let mut pick = String::new();
            for _attempt in 0..8 {
                let from = if rng.random_bool(0.6) && !layers[l - 1].is_empty() {
                    l - 1
                } else {
                    loop {
                        let cand = rng.random_range(0..l);
                        if !layers[cand].is_empty() {
                            break cand;
                        }
                    }
                };
                pick = layers[from][rng.random_range(0..layers[from].len())].clone();
                if !inputs.contains(&pick) {
                    break;
                }
            }
            *loads.entry(pick.clone()).or_default() += 1;
            inputs.push(pick);
        }
        let output = format!("n{i}");
        layers[l].push(output.clone());
        gates.push(GateInstance {
            name: format!("g{i}"),
            kind: kind.name.clone(),
            inputs,
            output,
        });
    }

    if let Some(ff) = flop_kind {
        let deep_from = (depth / 2).max(1);
        let deep: Vec<&String> = layers[deep_from..].iter().flatten().collect();
        for i in 0..n_ff {
            let d = if deep.is_empty() {
                primary_inputs[rng.random_range(0..n_pi)].clone()
            } else {
                deep[rng.random_range(0..deep.len())].clone()
            };
            *loads.entry(d.clone()).or_default() += 1;
            gates.push(GateInstance {
                name: format!("ff{i}"),
                kind: ff.name.clone(),
                inputs: vec![d],
                output: format!("q{i}"),
            });
        }
    }

    let mut primary_outputs: Vec<String> = gates[..n_comb]
        .iter()
        .filter(|g| !loads.contains_key(&g.output))
        .map(|g| g.output.clone())
        .collect();
    if primary_outputs.is_empty() {
        primary_outputs.push(gates[n_comb - 1].output.clone());
    }

    Netlist {
        name: format!("synth_{}_{}", n_gates, config.seed),
        // rough constraint: 20 ps per layer plus margin
        clock_period_ns: (depth as f64 * 0.02 * 1.2).max(0.05),
        primary_inputs,
        primary_outputs,
        gates,
    }
}
