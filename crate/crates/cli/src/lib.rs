//! Experiment harness behind the `rfxy` binary: instance files, solver
//! configuration, campaign execution, and kernel benchmarks.

pub mod bench;
pub mod campaign;
pub mod config;
pub mod instance_io;
