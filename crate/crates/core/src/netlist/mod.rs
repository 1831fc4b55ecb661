// SPDX-License-Identifier: Apache-2.0

//! Gate-level netlists.
//!
//! Two text formats feed the same validated [`Netlist`]: a small structural
//! Verilog subset ([`parse_structural`]) and the native canonical JSON document
//! ([`parse_canonical`] / [`write_canonical`]). Every accepted netlist has a
//! single driver per net, a driver for every consumed net, and an acyclic
//! combinational core (cycles are allowed only through flip-flops).

mod canonical;
mod catalog;
mod structural;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

pub use canonical::{parse_canonical, write_canonical};
pub use catalog::{CatalogError, CellCatalog, CellKind};
pub use structural::parse_structural;

/// Clock period assigned to netlists whose source text carries no constraint.
pub const DEFAULT_CLOCK_PERIOD_NS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetlistError {
    #[error("unknown cell kind `{0}`")]
    UnknownCell(String),
    #[error("net `{0}` has more than one driver")]
    MultipleDrivers(String),
    #[error("net `{0}` is used but never driven")]
    UndrivenNet(String),
    #[error("combinational cycle through {}", .0.join(" -> "))]
    CombinationalCycle(Vec<String>),
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("instance `{instance}`: {message}")]
    Pins { instance: String, message: String },
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("clock period must be positive and finite, got {0}")]
    ClockPeriod(f64),
}

/// A placed cell with its pin-ordered connections.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateInstance {
    pub name: String,
    pub kind: String,
    pub inputs: Vec<String>,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Netlist {
    pub name: String,
    pub clock_period_ns: f64,
    pub primary_inputs: Vec<String>,
    pub primary_outputs: Vec<String>,
    pub gates: Vec<GateInstance>,
}

/// Who drives a net.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Driver {
    PrimaryInput(usize),
    Gate(usize),
}

impl Netlist {
    /// Checks every structural invariant against `catalog`.
    pub fn validate(&self, catalog: &CellCatalog) -> Result<(), NetlistError> {
        if !(self.clock_period_ns > 0.0 && self.clock_period_ns.is_finite()) {
            return Err(NetlistError::ClockPeriod(self.clock_period_ns));
        }
        let mut names = HashMap::new();
        for g in &self.gates {
            if names.insert(g.name.as_str(), ()).is_some() {
                return Err(NetlistError::DuplicateName(g.name.clone()));
            }
            let kind = catalog
                .get(&g.kind)
                .ok_or_else(|| NetlistError::UnknownCell(g.kind.clone()))?;
            if g.inputs.len() != kind.input_pins {
                return Err(NetlistError::Pins {
                    instance: g.name.clone(),
                    message: format!(
                        "{} expects {} inputs, got {}",
                        kind.name,
                        kind.input_pins,
                        g.inputs.len()
                    ),
                });
            }
        }
        let mut seen_po = HashMap::new();
        for po in &self.primary_outputs {
            if seen_po.insert(po.as_str(), ()).is_some() {
                return Err(NetlistError::DuplicateName(po.clone()));
            }
        }
        let drivers = self.drivers()?;
        for g in &self.gates {
            for net in &g.inputs {
                if !drivers.contains_key(net.as_str()) {
                    return Err(NetlistError::UndrivenNet(net.clone()));
                }
            }
        }
        for po in &self.primary_outputs {
            if !drivers.contains_key(po.as_str()) {
                return Err(NetlistError::UndrivenNet(po.clone()));
            }
        }
        self.check_acyclic(catalog, &drivers)
    }

    /// Net name to driver. Fails on the first net with two drivers.
    pub fn drivers(&self) -> Result<HashMap<&str, Driver>, NetlistError> {
        let mut map = HashMap::with_capacity(self.primary_inputs.len() + self.gates.len());
        for (i, pi) in self.primary_inputs.iter().enumerate() {
            if map.insert(pi.as_str(), Driver::PrimaryInput(i)).is_some() {
                return Err(NetlistError::MultipleDrivers(pi.clone()));
            }
        }
        for (i, g) in self.gates.iter().enumerate() {
            if map.insert(g.output.as_str(), Driver::Gate(i)).is_some() {
                return Err(NetlistError::MultipleDrivers(g.output.clone()));
            }
        }
        Ok(map)
    }

    fn check_acyclic(
        &self,
        catalog: &CellCatalog,
        drivers: &HashMap<&str, Driver>,
    ) -> Result<(), NetlistError> {
        let n = self.gates.len();
        let sequential: Vec<bool> = self
            .gates
            .iter()
            .map(|g| catalog.get(&g.kind).map(|k| k.sequential).unwrap_or(false))
            .collect();
        // gate -> combinational fanout gates; flip-flops cut every cycle
        let mut fanout: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut indegree = vec![0usize; n];
        for (v, g) in self.gates.iter().enumerate() {
            if sequential[v] {
                continue;
            }
            for net in &g.inputs {
                if let Some(Driver::Gate(u)) = drivers.get(net.as_str()) {
                    if !sequential[*u] {
                        fanout[*u].push(v);
                        indegree[v] += 1;
                    }
                }
            }
        }
        let mut stack: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut removed = 0;
        while let Some(u) = stack.pop() {
            removed += 1;
            for &v in &fanout[u] {
                indegree[v] -= 1;
                if indegree[v] == 0 {
                    stack.push(v);
                }
            }
        }
        if removed == n {
            return Ok(());
        }
        // walk backwards inside the leftover set until a node repeats
        let leftover: Vec<bool> = indegree.iter().map(|&d| d > 0).collect();
        let mut fanin: BTreeMap<usize, usize> = BTreeMap::new();
        for u in 0..n {
            for &v in &fanout[u] {
                if leftover[u] && leftover[v] {
                    fanin.entry(v).or_insert(u);
                }
            }
        }
        let start = leftover.iter().position(|&b| b).unwrap_or(0);
        let mut order = vec![start];
        let mut pos = HashMap::from([(start, 0usize)]);
        let mut cur = start;
        while let Some(&prev) = fanin.get(&cur) {
            if let Some(&at) = pos.get(&prev) {
                let cycle = order[at..]
                    .iter()
                    .rev()
                    .map(|&g| self.gates[g].name.clone());
                return Err(NetlistError::CombinationalCycle(cycle.collect()));
            }
            pos.insert(prev, order.len());
            order.push(prev);
            cur = prev;
        }
        Err(NetlistError::CombinationalCycle(
            order.iter().map(|&g| self.gates[g].name.clone()).collect(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gate(name: &str, kind: &str, inputs: &[&str], output: &str) -> GateInstance {
        GateInstance {
            name: name.into(),
            kind: kind.into(),
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            output: output.into(),
        }
    }

    fn base(gates: Vec<GateInstance>) -> Netlist {
        Netlist {
            name: "t".into(),
            clock_period_ns: 1.0,
            primary_inputs: vec!["a".into(), "b".into()],
            primary_outputs: vec!["y".into()],
            gates,
        }
    }

    #[test]
    fn cycle_through_flip_flop_is_fine() {
        let n = base(vec![
            gate("f", "DFF", &["w2"], "q"),
            gate("g1", "NAND2", &["q", "a"], "w2"),
            gate("g2", "INV", &["w2"], "y"),
        ]);
        n.validate(&CellCatalog::default()).unwrap();
    }

    #[test]
    fn combinational_cycle_is_reported() {
        let n = base(vec![
            gate("g1", "NAND2", &["w3", "a"], "w1"),
            gate("g2", "INV", &["w1"], "w2"),
            gate("g3", "INV", &["w2"], "w3"),
            gate("g4", "INV", &["w3"], "y"),
        ]);
        match n.validate(&CellCatalog::default()) {
            Err(NetlistError::CombinationalCycle(c)) => {
                let mut sorted = c.clone();
                sorted.sort();
                assert_eq!(sorted, ["g1", "g2", "g3"]);
            }
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn pi_and_gate_driving_same_net() {
        let n = base(vec![
            gate("g1", "INV", &["b"], "a"),
            gate("g2", "INV", &["a"], "y"),
        ]);
        assert_eq!(
            n.validate(&CellCatalog::default()),
            Err(NetlistError::MultipleDrivers("a".into()))
        );
    }

    #[test]
    fn bad_clock_and_pin_count() {
        let mut n = base(vec![gate("g1", "INV", &["a"], "y")]);
        n.clock_period_ns = 0.0;
        assert_eq!(
            n.validate(&CellCatalog::default()),
            Err(NetlistError::ClockPeriod(0.0))
        );
        let n = base(vec![gate("g1", "INV", &["a", "b"], "y")]);
        assert!(matches!(
            n.validate(&CellCatalog::default()),
            Err(NetlistError::Pins { .. })
        ));
    }

    #[test]
    fn undriven_po() {
        let n = base(vec![gate("g1", "INV", &["a"], "w")]);
        assert_eq!(
            n.validate(&CellCatalog::default()),
            Err(NetlistError::UndrivenNet("y".into()))
        );
    }
}
