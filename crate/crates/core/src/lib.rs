//! Core algorithms for a data-driven feedforward steering compensator.
//!
//! The crate is `no_std` with `alloc`. It contains the delayed steering plant,
//! the reference paths and preview tracker, principal component analysis, the
//! tapped-delay-line network with its trainer, the switching PI/PD
//! compensator, the evaluation metrics, and an in-memory closed-loop driver.
//! File formats, configuration and the command line live in the `ffcomp`
//! crate.

#![no_std]

extern crate alloc;

#[cfg(feature = "std")]
extern crate std;

pub mod compensator;
pub mod log;
pub mod metrics;
pub mod pca;
pub mod plant;
pub mod sim;
pub mod tdnn;
pub mod tracking;

pub use compensator::{CompensatorConfig, CompensatorState, Mode};
pub use log::{Channel, SampleLog};
pub use plant::{ActuatorState, PlantConfig, VehicleState};
pub use tracking::{ReferencePath, TrackerConfig};

/// Kilometres per hour to metres per second.
pub fn kmh_to_mps(kmh: f64) -> f64 {
    kmh / 3.6
}
