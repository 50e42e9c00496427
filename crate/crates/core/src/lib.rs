//! Photovoltaic panel simulation and maximum power point tracking.
//!
//! The crate couples a single-diode panel model to an averaged boost
//! converter and drives it with pluggable MPPT controllers on fixed-step
//! irradiance/temperature profiles. Traces can be scored for tracking
//! efficiency and settling, and sampled waveforms for harmonic distortion.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod controllers;
pub mod environment;
pub mod error;
pub mod metrics;
pub mod power_stage;
pub mod pv_model;
pub mod sim;

pub use controllers::{Controller, ControllerKind, ControllerSettings, ControllerState, Measurement, Mode};
pub use environment::{Profile, Scenario, Segment, SimSettings};
pub use error::{Error, Result};
pub use power_stage::{BusParams, OperatingPoint};
pub use pv_model::{EnvSample, PanelParams, PanelPoint};
pub use sim::{simulate, simulate_with, Trace, TraceRecord};
