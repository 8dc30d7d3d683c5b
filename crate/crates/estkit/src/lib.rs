//! File formats, a thread-pool executor and the `estkit` command line for
//! [`estkit_core`].
//!
//! Sweeps are described by a TOML or JSON [`config::SweepConfig`], executed
//! on a [`pool::WorkerPool`] and written as CSV or JSON records with a fit
//! sidecar and a manifest holding the resolved configuration.

pub mod cli;
pub mod config;
pub mod descriptor;
pub mod error;
pub mod output;
pub mod pool;

pub use error::{CliError, CliResult};
