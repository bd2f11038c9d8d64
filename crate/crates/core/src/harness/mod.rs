//! Simulation, metrics and experiment plumbing.

pub mod experiment;
pub mod metrics;
pub mod output;
pub mod sim;

pub use experiment::{run_experiment, ExperimentResult};
pub use metrics::{RunMetrics, Standing, StandingCounts};
pub use sim::{simulate, Prioritizers, SimError, SimObserver, SimOptions, SimOutput};
