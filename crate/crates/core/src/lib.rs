//! Cooperative spectrum sensing lab: channel simulation, energy detection,
//! a small from-scratch CNN fusion network, and the classical fusion rules it
//! is benchmarked against.
//!
//! The crate is `no_std` and only needs `alloc`. Every random quantity is drawn
//! from an explicit [`rng::Stream`], so a fixed seed replays bit-identically.
//! File formats, sweeps and the command-line front end live in the `coopsense`
//! companion crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod config;
pub mod dataset;
pub mod dcs;
mod error;
pub mod math;
pub mod metrics;
pub mod neural;
pub mod rng;
pub mod sensing;
pub mod sim;

pub use config::ScenarioConfig;
pub use dataset::{Dataset, LabeledSample, Standardizer};
pub use error::{Error, Result};
pub use metrics::{Detector, Metrics};
pub use sensing::{Hypothesis, ReportMode, SensingMatrix};
