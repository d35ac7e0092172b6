//! Deterministic simulator of an event-driven ultra-low-power smart
//! camera node.
//!
//! The simulated node couples a 128x64 spatial-contrast binary imager to
//! a low-power FPGA camera interface and a power-gated parallel
//! processor. The imager counts changed pixels in its Idle mode; when the
//! count overcomes a threshold the interface reads the full address-event
//! stream and wakes the processor, which clusters the events into blobs,
//! tracks them with Kalman filtering and raises application triggers.
//! Per-component power states are integrated over the simulated timeline
//! to compare fully-active, periodic-polling and event-driven operation.
//!
//! Modules follow the system structure:
//!
//! - [`sensor`]: contrast binarization, frame differencing and the native
//!   readout protocol (count vs address-event stream).
//! - [`interface`]: threshold-gated mode switching, 4-pixel packing into
//!   the 1024-event storage memory, SPI transfer timing.
//! - [`power`]: the external power-manager state machine and its timed
//!   activation records.
//! - [`energy`]: component power tables, timeline integration, framework
//!   comparison and processing-model calibration.
//! - [`pipeline`]: event clustering, tracking and trigger rules.
//! - [`baseline`] and [`metrics`]: the frame-based comparison detector
//!   and precision/recall evaluation.
//! - [`scene`], [`config`], [`scenario`]: synthetic scene generation,
//!   INI-style configuration and end-to-end scenario runs.

pub mod baseline;
pub mod config;
pub mod energy;
pub mod error;
pub mod interface;
pub mod metrics;
pub mod pgm;
pub mod pipeline;
pub mod power;
pub mod scenario;
pub mod scene;
pub mod sensor;
pub mod time;

pub use error::{Error, Result};
