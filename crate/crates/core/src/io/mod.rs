//! Text formats, preference sampling and experiment sweeps.

mod allocation_file;
mod experiment;
mod instance_file;
mod mallows;
mod preflib;

pub use allocation_file::{format_allocation, parse_allocation};
pub use experiment::{
    run_experiment, summarize, trial_instance, ExperimentConfig, ExperimentObjective,
    ExperimentResult, ResultRow, SummaryRow,
};
pub use instance_file::{parse_instance, serialize_instance};
pub use mallows::{mallows_instance, seeded_mallows_instance, Mallows, MallowsConfig};
pub use preflib::{parse_preflib, PreflibProfile};
