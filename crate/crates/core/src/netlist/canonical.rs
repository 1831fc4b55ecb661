// SPDX-License-Identifier: Apache-2.0

//! Canonical netlist document: pretty-printed JSON with a fixed key order.

use super::{CellCatalog, Netlist, NetlistError};

/// Parses a canonical document and validates it against `catalog`.
pub fn parse_canonical(text: &str, catalog: &CellCatalog) -> Result<Netlist, NetlistError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let netlist: Netlist = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        NetlistError::Schema {
            path,
            message: e.into_inner().to_string(),
        }
    })?;
    netlist.validate(catalog)?;
    Ok(netlist)
}

/// Serializes with keys in declaration order; equal netlists give equal bytes.
pub fn write_canonical(netlist: &Netlist) -> String {
    let mut s = serde_json::to_string_pretty(netlist).expect("netlist serializes");
    s.push('\n');
    s
}
