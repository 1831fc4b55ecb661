// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::graph::{CircuitGraph, TimingPath};
use crate::netlist::Netlist;

use super::timing::{nominal_delays, path_delay_with, propagate_arrivals, scaled_delays};
use super::{
    apply_aging, derive_seed, endpoint_arrival, sample_variation_instance, AgingParams,
    DelayLibrary, StaError,
};

/// Statistics of a path's degradation over Monte-Carlo instances, in
/// percentage points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegradationLabel {
    pub mu: f64,
    pub sigma: f64,
    pub max: f64,
}

/// Which delay a path's degradation is measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayMeasure {
    /// Sum of delays along the fixed gate sequence of the path.
    Path,
    /// Worst arrival at the path's end point, re-timed per instance.
    #[default]
    Endpoint,
}

/// `100 * (degraded - baseline) / baseline`. Negative values are kept.
pub fn degradation_percent(baseline_ps: f64, degraded_ps: f64) -> Result<f64, StaError> {
    if !(baseline_ps > 0.0) {
        return Err(StaError::NonpositiveBaseline(baseline_ps));
    }
    Ok(100.0 * (degraded_ps - baseline_ps) / baseline_ps)
}

/// Sample mean, sample standard deviation (divisor `n - 1`) and maximum.
pub fn summarize(values: &[f64]) -> Result<DegradationLabel, StaError> {
    if values.len() < 2 {
        return Err(StaError::TooFewInstances(values.len()));
    }
    let n = values.len() as f64;
    let mu = values.iter().sum::<f64>() / n;
    let ss = values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(DegradationLabel {
        mu,
        sigma: (ss / (n - 1.0)).sqrt(),
        max,
    })
}

fn measured(
    graph: &CircuitGraph,
    delays: &[f64],
    paths: &[TimingPath],
    measure: DelayMeasure,
) -> Vec<f64> {
    match measure {
        DelayMeasure::Path => paths
            .iter()
            .map(|p| path_delay_with(graph, delays, p))
            .collect(),
        DelayMeasure::Endpoint => {
            let arrival = propagate_arrivals(graph, delays);
            paths
                .iter()
                .map(|p| endpoint_arrival(graph, &arrival, p.end))
                .collect()
        }
    }
}

/// Baseline delay of every path under `lib` for the chosen measure.
pub fn baseline_delays(
    graph: &CircuitGraph,
    lib: &DelayLibrary,
    paths: &[TimingPath],
    measure: DelayMeasure,
) -> Result<Vec<f64>, StaError> {
    Ok(measured(
        graph,
        &nominal_delays(graph, lib)?,
        paths,
        measure,
    ))
}

#[cfg(feature = "parallel")]
fn map_instances<F>(n: usize, f: F) -> Result<Vec<Vec<f64>>, StaError>
where
    F: Fn(usize) -> Result<Vec<f64>, StaError> + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_instances<F>(n: usize, f: F) -> Result<Vec<Vec<f64>>, StaError>
where
    F: Fn(usize) -> Result<Vec<f64>, StaError>,
{
    (0..n).map(f).collect()
}

/// Per-instance degradation of every path: `result[i][p]` is instance `i`,
/// path `p`. Instance `i` is sampled with `derive_seed(seed, i)`.
pub fn variation_degradations(
    netlist: &Netlist,
    graph: &CircuitGraph,
    lib: &DelayLibrary,
    paths: &[TimingPath],
    n_instances: usize,
    seed: u64,
    measure: DelayMeasure,
) -> Result<Vec<Vec<f64>>, StaError> {
    let nominal = nominal_delays(graph, lib)?;
    let base = measured(graph, &nominal, paths, measure);
    map_instances(n_instances, |i| {
        let inst = sample_variation_instance(netlist, lib, derive_seed(seed, i as u64))?;
        let delays = scaled_delays(graph, &nominal, Some(&inst));
        measured(graph, &delays, paths, measure)
            .iter()
            .zip(&base)
            .map(|(&d, &b)| degradation_percent(b, d))
            .collect()
    })
}

/// Process-variation label (mean, std, max over instances) for every path.
pub fn label_process_variation(
    netlist: &Netlist,
    graph: &CircuitGraph,
    lib: &DelayLibrary,
    paths: &[TimingPath],
    n_instances: usize,
    seed: u64,
    measure: DelayMeasure,
) -> Result<Vec<DegradationLabel>, StaError> {
    if n_instances < 2 {
        return Err(StaError::TooFewInstances(n_instances));
    }
    let per_instance =
        variation_degradations(netlist, graph, lib, paths, n_instances, seed, measure)?;
    let mut column = vec![0.0; n_instances];
    (0..paths.len())
        .map(|p| {
            for (slot, row) in column.iter_mut().zip(&per_instance) {
                *slot = row[p];
            }
            summarize(&column)
        })
        .collect()
}

/// Aging degradation in percent for every path.
pub fn label_aging(
    netlist: &Netlist,
    graph: &CircuitGraph,
    lib: &DelayLibrary,
    paths: &[TimingPath],
    params: &AgingParams,
    seed: u64,
    measure: DelayMeasure,
) -> Result<Vec<f64>, StaError> {
    let nominal = nominal_delays(graph, lib)?;
    let base = measured(graph, &nominal, paths, measure);
    let aged = apply_aging(netlist, lib, params, seed)?;
    let delays = scaled_delays(graph, &nominal, Some(&aged));
    measured(graph, &delays, paths, measure)
        .iter()
        .zip(&base)
        .map(|(&d, &b)| degradation_percent(b, d))
        .collect()
}
