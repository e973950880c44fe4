//! Files, sweeps, latency benchmarks and the command-line front end for the
//! cooperative sensing lab in `coopsense-core`.

pub mod bench;
pub mod checkpoint;
pub mod cli;
pub mod config;
mod error;
pub mod fit;
pub mod io;
pub mod sweep;

pub use error::{Error, Result};
