//! Traffic offloading and helper energy cost in cache-enabled D2D networks.
//!
//! * [`model`]: demand, network, radio and battery types; Zipf popularity and
//!   path gain.
//! * [`caching`]: offloading ratio and its maximizing caching distribution.
//! * [`power`]: per-link energy and the energy-minimal transmit power.
//! * [`analytics`]: link-distance density, average helper energy, energy cost
//!   ratio and tradeoff curves.
//! * [`sim`]: Monte Carlo simulator of a cache-enabled D2D cell.
//! * [`harness`]: configuration files, presets and the CSV-producing commands
//!   behind the `d2d-offload` CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod caching;
pub mod error;
pub mod harness;
pub mod model;
pub mod power;
pub mod quadrature;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
