//! Experiment runner for learning-based tracking control of port-Hamiltonian systems.
//!
//! Every stage of the experiment reads and writes plain files in a run directory, so a
//! run can be resumed, inspected or rerun stage by stage from the `gpphs` binary.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod metrics;
pub mod model_file;
pub mod pipeline;

pub use config::ExperimentConfig;
pub use error::LabError;
pub use metrics::MetricsReport;
