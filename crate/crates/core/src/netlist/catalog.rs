// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

/// One cell type of the standard-cell vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellKind {
    pub name: String,
    /// Boolean-function tag. Kinds sharing a tag (AND2, AND3) share a feature column.
    pub function: String,
    pub input_pins: usize,
    #[serde(default)]
    pub sequential: bool,
}

impl CellKind {
    pub fn combinational(name: &str, function: &str, input_pins: usize) -> Self {
        Self {
            name: name.to_string(),
            function: function.to_string(),
            input_pins,
            sequential: false,
        }
    }

    pub fn flip_flop(name: &str) -> Self {
        Self {
            name: name.to_string(),
            function: name.to_string(),
            input_pins: 1,
            sequential: true,
        }
    }

    /// Input pin names in connection order: `D` for flip-flops, `A`, `B`, `C`, ... otherwise.
    pub fn input_pin_names(&self) -> Vec<String> {
        if self.sequential {
            vec!["D".to_string()]
        } else {
            (0..self.input_pins)
                .map(|i| ((b'A' + i as u8) as char).to_string())
                .collect()
        }
    }

    pub fn output_pin_name(&self) -> &'static str {
        if self.sequential {
            "Q"
        } else {
            "Y"
        }
    }
}

/// Ordered cell vocabulary. Feature columns are derived from the order in which
/// function tags first appear, so the order must stay fixed for a trained model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCatalog {
    kinds: Vec<CellKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error("duplicate cell kind `{0}`")]
    DuplicateKind(String),
    #[error("cell kind `{0}` must have at least one input pin")]
    NoInputs(String),
    #[error("sequential cell kind `{0}` must have exactly one data input")]
    SequentialPins(String),
}

impl CellCatalog {
    pub fn new(kinds: Vec<CellKind>) -> Result<Self, CatalogError> {
        for (i, k) in kinds.iter().enumerate() {
            if kinds[..i].iter().any(|o| o.name == k.name) {
                return Err(CatalogError::DuplicateKind(k.name.clone()));
            }
            if k.input_pins == 0 {
                return Err(CatalogError::NoInputs(k.name.clone()));
            }
            if k.sequential && k.input_pins != 1 {
                return Err(CatalogError::SequentialPins(k.name.clone()));
            }
        }
        Ok(Self { kinds })
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let kinds: Vec<CellKind> = serde_json::from_str(text).map_err(|e| e.to_string())?;
        Self::new(kinds).map_err(|e| e.to_string())
    }

    pub fn kinds(&self) -> &[CellKind] {
        &self.kinds
    }

    pub fn get(&self, name: &str) -> Option<&CellKind> {
        self.kinds.iter().find(|k| k.name == name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.kinds.iter().position(|k| k.name == name)
    }

    /// Distinct function tags in first-appearance order.
    pub fn functions(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for k in &self.kinds {
            if !out.contains(&k.function.as_str()) {
                out.push(&k.function);
            }
        }
        out
    }

    pub fn function_index(&self, function: &str) -> Option<usize> {
        self.functions().iter().position(|f| *f == function)
    }

    /// Feature vector length: one column per function tag plus PI and PO.
    pub fn feature_width(&self) -> usize {
        self.functions().len() + 2
    }
}

impl Default for CellCatalog {
    fn default() -> Self {
        let kinds = vec![
            CellKind::combinational("INV", "INV", 1),
            CellKind::combinational("BUF", "BUF", 1),
            CellKind::combinational("NAND2", "NAND", 2),
            CellKind::combinational("NOR2", "NOR", 2),
            CellKind::combinational("AND2", "AND", 2),
            CellKind::combinational("OR2", "OR", 2),
            CellKind::combinational("XOR2", "XOR", 2),
            CellKind::combinational("XNOR2", "XNOR", 2),
            CellKind::combinational("AOI21", "AOI21", 3),
            CellKind::combinational("OAI21", "OAI21", 3),
            CellKind::combinational("AND3", "AND", 3),
            CellKind::flip_flop("DFF"),
        ];
        Self::new(kinds).expect("default catalog is well formed")
    }
}
