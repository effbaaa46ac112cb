//! Monte-Carlo harness for finite-alphabet precoding studies.
//!
//! An [`config::ExperimentConfig`] describes one study. [`experiments::run`]
//! executes it over a worker pool and [`results::emit_results`] writes the
//! aggregated [`results::SweepResult`] into a directory named by the config
//! hash. Output bytes depend only on the config, never on the worker count.

pub mod config;
pub mod experiments;
pub mod results;
pub mod seeds;
pub mod solvers;

pub use config::{ExperimentConfig, ExperimentKind, SolverKind};
pub use experiments::{run, run_sweep};
pub use results::{emit_results, Format, SweepResult};
