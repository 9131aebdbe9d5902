//! Simulator for federated distillation: clients share soft labels on a
//! public pool instead of model weights, a server aggregates them
//! (plain averaging or entropy-reducing sharpening) and distills, and a
//! Gaussian-mixture analysis predicts how much self-training on unlabeled
//! data helps.
//!
//! Modules build bottom-up: [`numerics`] and [`data`] feed [`model`];
//! [`protocol`] and [`sampling`] describe what crosses the wire; [`engine`]
//! runs whole experiments; [`theory`] covers the mixture analysis; [`cli`]
//! backs the `fedsim` binary.

pub mod cli;
pub mod data;
pub mod engine;
pub mod error;
pub mod model;
pub mod numerics;
pub mod protocol;
pub mod sampling;
pub mod theory;

pub use error::{Error, Result};
