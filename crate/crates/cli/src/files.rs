// SPDX-License-Identifier: Apache-2.0

//! Reading and writing pipeline artifacts.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use relgraph_core::graph::{build_graph, encode_features, CircuitGraph, FeatureMatrix, TimingPath};
use relgraph_core::netlist::{parse_canonical, parse_structural, CellCatalog, Netlist};
use relgraph_core::sta::DelayLibrary;
use serde::{Deserialize, Serialize};

/// A parsed design with its graph view and node features.
pub struct Design {
    pub netlist: Netlist,
    pub graph: CircuitGraph,
    pub features: FeatureMatrix,
}

/// `.v` files are structural Verilog; anything else is a canonical document.
pub fn read_netlist(path: &Path, catalog: &CellCatalog) -> Result<Netlist> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed = if path.extension().is_some_and(|e| e == "v") {
        parse_structural(&text, catalog)
    } else {
        parse_canonical(&text, catalog)
    };
    parsed.with_context(|| format!("in netlist {}", path.display()))
}

pub fn load_design(path: &Path, catalog: &CellCatalog) -> Result<Design> {
    let netlist = read_netlist(path, catalog)?;
    let graph =
        build_graph(&netlist, catalog).with_context(|| format!("in netlist {}", path.display()))?;
    let features = encode_features(&graph, catalog)?;
    Ok(Design {
        netlist,
        graph,
        features,
    })
}

/// The bundled library unless a file is given.
pub fn read_library(path: Option<&Path>) -> Result<DelayLibrary> {
    let Some(path) = path else {
        return Ok(DelayLibrary::default());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    DelayLibrary::from_json(&text).with_context(|| format!("in library {}", path.display()))
}

/// Selected timing paths of one design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathList {
    pub design: String,
    pub flops_only: bool,
    pub paths: Vec<TimingPath>,
}

pub fn read_paths(path: &Path, design: &Design) -> Result<PathList> {
    let list: PathList = read_json(path)?;
    if list.design != design.netlist.name {
        bail!(
            "path list {} belongs to design `{}`, not `{}`",
            path.display(),
            list.design,
            design.netlist.name
        );
    }
    let n = design.graph.node_count();
    for (i, p) in list.paths.iter().enumerate() {
        if p.start >= n || p.end >= n || p.gates.iter().any(|&g| g >= n) {
            bail!(
                "path {i} in {} refers to a node outside the design",
                path.display()
            );
        }
    }
    Ok(list)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// One compact JSON value per line.
pub fn write_json_lines<T: Serialize>(
    path: &Path,
    values: impl IntoIterator<Item = T>,
) -> Result<()> {
    let file = create(path)?;
    let mut w = BufWriter::new(file);
    for v in values {
        serde_json::to_writer(&mut w, &v)?;
        w.write_all(b"\n")?;
    }
    w.flush()
        .with_context(|| format!("writing {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = create(path)?;
    f.write_all(text.as_bytes())
        .with_context(|| format!("writing {}", path.display()))
}

pub fn create(path: &Path) -> Result<fs::File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::File::create(path).with_context(|| format!("creating {}", path.display()))
}
