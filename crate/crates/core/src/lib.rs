//! Coordinated BEV charging/discharging across multiple charging stations on a
//! radial distribution feeder.
//!
//! The crate is organised around the stages of a day-ahead scheduling run:
//!
//! * [`fleet`]: stochastic driving behaviour, per-node BEV counts and station
//!   assignment.
//! * [`grid`]: radial feeder model, backward/forward sweep load flow, losses and
//!   voltage limits.
//! * [`market`]: time-of-use tariffs, price-elastic demand, economic dispatch
//!   and the peak-price adjustment line search.
//! * [`valuation`]: BEV owner cost, station benefit, carbon credits, battery
//!   degradation and SOC dynamics.
//! * [`optimizer`]: NSGA-II over (station benefit, loss cost), weighted
//!   selection and the water-filling baseline.
//! * [`metrics`]: load-profile indices and scenario reports.
//! * [`scenario`]: configuration presets, orchestration and artifact output.

pub mod config;
pub mod error;
pub mod evaluation;
pub mod fleet;
pub mod grid;
pub mod market;
pub mod metrics;
pub mod optimizer;
pub mod rng;
pub mod scenario;
pub mod valuation;

pub use error::{Error, Result};

/// Scheduling horizon in hourly slots.
pub const HOURS: usize = 24;

/// Slot length in hours.
pub const DT_HOURS: f64 = 1.0;
