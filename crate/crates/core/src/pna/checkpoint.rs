// SPDX-License-Identifier: Apache-2.0

//! Binary model container.
//!
//! Layout: the 8-byte magic `RELGPNA1`, a little-endian `u32` header length,
//! a JSON header with the model configuration and target scaling, a `u64`
//! value count, then every parameter followed by every running statistic as
//! little-endian `f64`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{PnaConfig, PnaModel};
use super::PnaError;

const MAGIC: &[u8; 8] = b"RELGPNA1";

#[derive(Serialize, Deserialize)]
struct Header {
    config: PnaConfig,
    target_shift: f64,
    target_scale: f64,
}

fn running_stats(model: &PnaModel) -> impl Iterator<Item = &ndarray::Array2<f64>> {
    model
        .norms
        .iter()
        .flat_map(|n| [&n.running_mean, &n.running_var])
}

pub fn to_bytes(model: &PnaModel) -> Vec<u8> {
    let header = serde_json::to_vec(&Header {
        config: model.config.clone(),
        target_shift: model.target_shift,
        target_scale: model.target_scale,
    })
    .expect("header serializes");
    let params = model.params();
    let count: usize = params.iter().map(|p| p.len()).sum::<usize>()
        + running_stats(model).map(|a| a.len()).sum::<usize>();
    let mut out = Vec::with_capacity(24 + header.len() + 8 * count);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    out.extend_from_slice(&(count as u64).to_le_bytes());
    let arrays = params.iter().map(|p| &p.value).chain(running_stats(model));
    for a in arrays {
        for v in a.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn take<'a>(bytes: &mut &'a [u8], n: usize) -> Result<&'a [u8], PnaError> {
    if bytes.len() < n {
        return Err(PnaError::Checkpoint("truncated".into()));
    }
    let (head, tail) = bytes.split_at(n);
    *bytes = tail;
    Ok(head)
}

pub fn from_bytes(mut bytes: &[u8]) -> Result<PnaModel, PnaError> {
    if take(&mut bytes, 8)? != MAGIC {
        return Err(PnaError::Checkpoint("bad magic".into()));
    }
    let len = u32::from_le_bytes(take(&mut bytes, 4)?.try_into().unwrap()) as usize;
    let header: Header = serde_json::from_slice(take(&mut bytes, len)?)
        .map_err(|e| PnaError::Checkpoint(format!("header: {e}")))?;
    let count = u64::from_le_bytes(take(&mut bytes, 8)?.try_into().unwrap()) as usize;
    let mut model = PnaModel::new(header.config, 0)?;
    model.target_shift = header.target_shift;
    model.target_scale = header.target_scale;
    let expected =
        model.parameter_count() + model.norms.iter().map(|n| 2 * n.channels()).sum::<usize>();
    if count != expected || bytes.len() != 8 * count {
        return Err(PnaError::Checkpoint(format!(
            "expected {expected} values, header says {count} with {} bytes left",
            bytes.len()
        )));
    }
    let mut values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    for p in model.params_mut() {
        p.value.iter_mut().for_each(|v| *v = values.next().unwrap());
    }
    for n in &mut model.norms {
        for a in [&mut n.running_mean, &mut n.running_var] {
            a.iter_mut().for_each(|v| *v = values.next().unwrap());
        }
    }
    Ok(model)
}

pub fn save(model: &PnaModel, path: impl AsRef<Path>) -> Result<(), PnaError> {
    std::fs::write(path, to_bytes(model)).map_err(|e| PnaError::Io(e.to_string()))
}

pub fn load(path: impl AsRef<Path>) -> Result<PnaModel, PnaError> {
    let bytes = std::fs::read(path).map_err(|e| PnaError::Io(e.to_string()))?;
    from_bytes(&bytes)
}
