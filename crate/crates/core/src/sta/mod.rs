// SPDX-License-Identifier: Apache-2.0

//! Simplified static timing plus Monte-Carlo variation and aging models that
//! produce baseline delays, slacks and degradation labels.

mod labels;
mod library;
mod synth;
mod timing;
mod variation;

pub use labels::{
    baseline_delays, degradation_percent, label_aging, label_process_variation, summarize,
    variation_degradations, DegradationLabel, DelayMeasure,
};
pub use library::{CellTiming, DelayLibrary};
pub use synth::{generate_synthetic_netlist, SynthConfig};
pub use timing::{
    compute_arrivals, compute_slacks, endpoint_arrival, gate_delay, nominal_delays, path_delay,
    propagate_arrivals, scaled_delays,
};
pub use variation::{
    apply_aging, derive_seed, sample_variation_instance, AgingParams, StressMode,
    VariationInstance, TRUNCATION_SIGMAS,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StaError {
    #[error("delay library has no entry for cell kind `{0}`")]
    MissingCell(String),
    #[error("sequential cell kind `{0}` has no clk_to_q_ps")]
    MissingClockToQ(String),
    #[error("invalid delay library: {0}")]
    Library(String),
    #[error("baseline delay must be positive, got {0}")]
    NonpositiveBaseline(f64),
    #[error("at least two variation instances are required, got {0}")]
    TooFewInstances(usize),
    #[error("aging global_scale must be non-negative, got {0}")]
    AgingScale(f64),
}
