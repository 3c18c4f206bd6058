//! Simulation and guidance core for infrared light-field drone landing.
//!
//! Everything here is `no_std` (with `alloc`): light-field and photodiode
//! models, the kinematic drone, the guidance controllers and the scenario
//! runner. File formats, the CLI and parallel sweeps live in the `irland` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod dynamics;
pub mod guidance;
pub mod lightfield;
pub mod scenario;
pub mod sensing;

pub use lightfield::Vec3;
