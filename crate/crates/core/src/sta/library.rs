// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::StaError;

/// Synthetic characterization of one cell kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellTiming {
    pub d0_ps: f64,
    pub k_load_ps: f64,
    /// Relative delay spread (sigma over mean) under process variation.
    pub sigma_rel: f64,
    /// Relative delay increase at end of life under full stress.
    pub aging_rel: f64,
    #[serde(default)]
    pub clk_to_q_ps: Option<f64>,
}

/// Kind name to timing parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DelayLibrary {
    pub cells: BTreeMap<String, CellTiming>,
}

const DEFAULT_LIBRARY: &str = include_str!("../../data/default_library.v1.json");

impl DelayLibrary {
    pub fn from_json(text: &str) -> Result<Self, StaError> {
        let lib: Self = serde_json::from_str(text).map_err(|e| StaError::Library(e.to_string()))?;
        lib.validate()?;
        Ok(lib)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("library serializes");
        s.push('\n');
        s
    }

    /// `sigma_rel` must be 0 (no variation) or inside `[0.02, 0.20]`.
    pub fn validate(&self) -> Result<(), StaError> {
        for (name, c) in &self.cells {
            let bad = |what: &str| Err(StaError::Library(format!("{name}: {what}")));
            if !(c.d0_ps > 0.0 && c.d0_ps.is_finite()) {
                return bad("d0_ps must be positive");
            }
            if !(c.k_load_ps >= 0.0 && c.k_load_ps.is_finite()) {
                return bad("k_load_ps must be non-negative");
            }
            if !(c.sigma_rel == 0.0 || (0.02..=0.20).contains(&c.sigma_rel)) {
                return bad("sigma_rel must be 0 or within [0.02, 0.20]");
            }
            if !(c.aging_rel >= 0.0 && c.aging_rel.is_finite()) {
                return bad("aging_rel must be non-negative");
            }
            if let Some(t) = c.clk_to_q_ps {
                if !(t >= 0.0 && t.is_finite()) {
                    return bad("clk_to_q_ps must be non-negative");
                }
            }
        }
        Ok(())
    }

    pub fn cell(&self, kind: &str) -> Result<&CellTiming, StaError> {
        self.cells
            .get(kind)
            .ok_or_else(|| StaError::MissingCell(kind.to_string()))
    }

    /// Copy with every kind's `sigma_rel` replaced.
    pub fn with_sigma(&self, sigma_rel: f64) -> Self {
        let mut lib = self.clone();
        lib.cells.values_mut().for_each(|c| c.sigma_rel = sigma_rel);
        lib
    }

    pub fn with_aging(&self, aging_rel: f64) -> Self {
        let mut lib = self.clone();
        lib.cells.values_mut().for_each(|c| c.aging_rel = aging_rel);
        lib
    }
}

impl Default for DelayLibrary {
    /// The shipped synthetic library for the default cell catalog.
    fn default() -> Self {
        Self::from_json(DEFAULT_LIBRARY).expect("bundled library is valid")
    }
}
