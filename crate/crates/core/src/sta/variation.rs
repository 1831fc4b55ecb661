// SPDX-License-Identifier: Apache-2.0

//! Seeded per-gate delay multipliers for process variation and aging.
//!
//! Every gate draws from its own ChaCha8 stream (`stream = gate index`) keyed
//! by the instance seed, so a multiplier depends only on `(seed, gate)` and
//! never on evaluation order or thread count. Monte-Carlo instance `i` of a
//! run with seed `s` uses `derive_seed(s, i)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::netlist::Netlist;

use super::{DelayLibrary, StaError};

/// Truncation bound of the variation normal, in standard deviations.
pub const TRUNCATION_SIGMAS: f64 = 3.0;

/// One delay-perturbed copy of a netlist: a multiplier per gate, in
/// `Netlist::gates` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationInstance {
    pub seed: u64,
    pub multipliers: Vec<f64>,
}

impl VariationInstance {
    pub fn identity(gates: usize) -> Self {
        Self {
            seed: 0,
            multipliers: vec![1.0; gates],
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for sub-run `index` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0x5EED)))
}

fn gate_rng(seed: u64, gate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(gate as u64);
    rng
}

/// Draws one multiplier per gate from `Normal(1, sigma_rel(kind))` truncated
/// to `1 ± 3 sigma` by rejection.
pub fn sample_variation_instance(
    netlist: &Netlist,
    lib: &DelayLibrary,
    seed: u64,
) -> Result<VariationInstance, StaError> {
    let multipliers = netlist
        .gates
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let sigma = lib.cell(&g.kind)?.sigma_rel;
            if sigma == 0.0 {
                return Ok(1.0);
            }
            let mut rng = gate_rng(seed, i);
            let z = loop {
                let z: f64 = rng.sample(StandardNormal);
                if z.abs() <= TRUNCATION_SIGMAS {
                    break z;
                }
            };
            Ok(1.0 + sigma * z)
        })
        .collect::<Result<Vec<_>, StaError>>()?;
    Ok(VariationInstance { seed, multipliers })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StressMode {
    /// Every gate fully stressed.
    WorstCase,
    /// Stress uniform in `[0, 1]` per gate.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgingParams {
    pub stress_mode: StressMode,
    pub global_scale: f64,
}

impl Default for AgingParams {
    fn default() -> Self {
        Self {
            stress_mode: StressMode::WorstCase,
            global_scale: 1.0,
        }
    }
}

/// End-of-life multipliers: `1 + aging_rel(kind) * stress(gate) * global_scale`.
pub fn apply_aging(
    netlist: &Netlist,
    lib: &DelayLibrary,
    params: &AgingParams,
    seed: u64,
) -> Result<VariationInstance, StaError> {
    if !(params.global_scale >= 0.0 && params.global_scale.is_finite()) {
        return Err(StaError::AgingScale(params.global_scale));
    }
    let multipliers = netlist
        .gates
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let rel = lib.cell(&g.kind)?.aging_rel;
            let stress = match params.stress_mode {
                StressMode::WorstCase => 1.0,
                StressMode::Random => gate_rng(seed, i).random::<f64>(),
            };
            Ok(1.0 + rel * stress * params.global_scale)
        })
        .collect::<Result<Vec<_>, StaError>>()?;
    Ok(VariationInstance { seed, multipliers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::CellCatalog;
    use crate::sta::{generate_synthetic_netlist, SynthConfig};

    fn design() -> Netlist {
        generate_synthetic_netlist(&SynthConfig::new(300, 8, 7), &CellCatalog::default())
    }

    #[test]
    fn zero_sigma_gives_identity() {
        let n = design();
        let inst =
            sample_variation_instance(&n, &DelayLibrary::default().with_sigma(0.0), 3).unwrap();
        assert!(inst.multipliers.iter().all(|&m| m == 1.0));
    }

    #[test]
    fn same_seed_same_instance() {
        let n = design();
        let lib = DelayLibrary::default();
        let a = sample_variation_instance(&n, &lib, 99).unwrap();
        assert_eq!(a, sample_variation_instance(&n, &lib, 99).unwrap());
        assert_ne!(a, sample_variation_instance(&n, &lib, 100).unwrap());
        let bound = 1.0 + TRUNCATION_SIGMAS * 0.2;
        assert!(a
            .multipliers
            .iter()
            .all(|&m| m > 0.0 && m <= bound && m >= 2.0 - bound));
    }

    #[test]
    fn multiplier_depends_only_on_gate_index() {
        let mut n = design();
        let lib = DelayLibrary::default();
        let full = sample_variation_instance(&n, &lib, 5).unwrap();
        n.gates.truncate(50);
        let part = sample_variation_instance(&n, &lib, 5).unwrap();
        assert_eq!(&full.multipliers[..50], &part.multipliers[..]);
    }

    #[test]
    fn empirical_spread_matches_sigma() {
        // 10,000 draws of one kind: spread within 5% of sigma_rel. A 3-sigma
        // truncation shrinks the standard deviation by about 1.4%.
        let kinds = CellCatalog::default();
        let lib = DelayLibrary::default();
        let sigma = lib.cell("NAND2").unwrap().sigma_rel;
        let n = Netlist {
            name: "flat".into(),
            clock_period_ns: 1.0,
            primary_inputs: vec!["a".into(), "b".into()],
            primary_outputs: vec![],
            gates: (0..10_000)
                .map(|i| crate::netlist::GateInstance {
                    name: format!("g{i}"),
                    kind: "NAND2".into(),
                    inputs: vec!["a".into(), "b".into()],
                    output: format!("w{i}"),
                })
                .collect(),
        };
        n.validate(&kinds).unwrap();
        let m = sample_variation_instance(&n, &lib, 2024)
            .unwrap()
            .multipliers;
        let mean = m.iter().sum::<f64>() / m.len() as f64;
        let var = m.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m.len() - 1) as f64;
        let ratio = var.sqrt() / mean;
        assert!(
            (ratio - sigma).abs() / sigma < 0.05,
            "sigma/mu {ratio} vs {sigma}"
        );
    }

    #[test]
    fn aging_multipliers() {
        let n = design();
        let lib = DelayLibrary::default();
        let fresh = AgingParams {
            stress_mode: StressMode::Random,
            global_scale: 0.0,
        };
        assert!(apply_aging(&n, &lib, &fresh, 1)
            .unwrap()
            .multipliers
            .iter()
            .all(|&m| m == 1.0));
        let worst = apply_aging(&n, &lib.with_aging(0.2), &AgingParams::default(), 1).unwrap();
        assert!(worst.multipliers.iter().all(|&m| (m - 1.2).abs() < 1e-15));
        let random = AgingParams {
            stress_mode: StressMode::Random,
            global_scale: 1.0,
        };
        let a = apply_aging(&n, &lib, &random, 8).unwrap();
        assert_eq!(a, apply_aging(&n, &lib, &random, 8).unwrap());
        assert!(a.multipliers.iter().any(|&m| m < 1.1));
        let bad = AgingParams {
            stress_mode: StressMode::WorstCase,
            global_scale: -1.0,
        };
        assert!(apply_aging(&n, &lib, &bad, 0).is_err());
    }
}
