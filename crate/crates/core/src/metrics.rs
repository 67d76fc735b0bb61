//! Pattern descriptors: symmetric-particle count and radial distribution.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::format::sig9;
use crate::geometry::{Domain, Lattice};
use crate::symmetry::Deposit;

/// Number of symmetric particles: the deduplicated deposit count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct NsCount(pub usize);

pub fn ns_count(deposits: &[Deposit]) -> NsCount {
    NsCount(deposits.len())
}

/// Distances from the origin binned over `[0, r]`; the last bin is closed.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialHistogram {
    pub bin_width: f64,
    pub radius: f64,
    pub counts: Vec<u64>,
}

impl RadialHistogram {
    pub fn from_distances(distances: impl IntoIterator<Item = f64>, bins: usize, dom: Domain) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidParameter("histogram needs at least one bin".into()));
        }
        let radius = dom.radius();
        let bin_width = radius / bins as f64;
        let mut counts = vec![0u64; bins];
        for dist in distances {
            let k = ((dist / bin_width).floor() as usize).min(bins - 1);
            counts[k] += 1;
        }
        Ok(Self { bin_width, radius, counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `bin_lo,bin_hi,count` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,count\n");
        for (k, c) in self.counts.iter().enumerate() {
            let lo = k as f64 * self.bin_width;
            let hi = if k + 1 == self.counts.len() { self.radius } else { (k + 1) as f64 * self.bin_width };
            writeln!(out, "{},{},{}", sig9(lo), sig9(hi), c).unwrap();
        }
        out
    }
}

pub fn radial_distribution(deposits: &[Deposit], bins: usize, lattice: &Lattice) -> Result<RadialHistogram> {
    RadialHistogram::from_distances(deposits.iter().map(|d| lattice.position(d.node).norm()), bins, lattice.domain())
}
