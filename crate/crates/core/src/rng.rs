//! Portable 64-bit linear congruential generator.
//!
//! The recurrence and the way draws are turned into reals are fixed so that
//! any implementation fed the same seed produces the same particles.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::Position;

pub const MULTIPLIER: u64 = 6364136223846793005;
pub const INCREMENT: u64 = 1442695040888963407;

const UNIT_SCALE: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngState {
    pub state: u64,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Advances the state and returns the new state as the output.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(MULTIPLIER).wrapping_add(INCREMENT);
        self.state
    }

    /// Uniform real in `[0, 1)` built from the top 53 bits of one draw.
    pub fn next_unit(&mut self) -> f64 {
        unit_from_bits(self.next_u64())
    }

    /// Uniform point in the open disk of radius `r` centred at the origin.
    ///
    /// Consumes exactly two draws: radius fraction first, then angle.
    pub fn sample_disk(&mut self, r: f64) -> Result<Position> {
        if r.is_nan() || r <= 0.0 || !r.is_finite() {
            return Err(Error::InvalidParameter(format!("disk radius must be positive, got {r}")));
        }
        let u1 = self.next_unit();
        let u2 = self.next_unit();
        Ok(disk_point(r, u1, u2))
    }
}

pub(crate) fn unit_from_bits(value: u64) -> f64 {
    (value >> 11) as f64 * UNIT_SCALE
}

pub(crate) fn disk_point(r: f64, u1: f64, u2: f64) -> Position {
    let rho = r * u1.sqrt();
    let phi = TAU * u2;
    Position::new(rho * phi.cos(), rho * phi.sin())
}
