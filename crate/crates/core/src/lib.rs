//! Particles moving through an 8-direction switching lattice inside a
//! reflecting disk, with non-local and future-aware symmetry rules that
//! freeze pattern points.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod format;
pub mod geometry;
pub mod metrics;
pub mod quantizer;
pub mod render;
pub mod rng;
pub mod symmetry;
pub mod verify;

pub use error::{Error, Result};
