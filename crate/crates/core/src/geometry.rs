//! Positions, the origin-centred lattice and the reflecting circular domain.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const ORIGIN: Position = Position { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Position) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn distance(self, other: Position) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Position {
    type Output = Position;
    fn add(self, rhs: Position) -> Position {
        Position::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Position {
    type Output = Position;
    fn sub(self, rhs: Position) -> Position {
        Position::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Position {
    type Output = Position;
    fn mul(self, k: f64) -> Position {
        Position::new(self.x * k, self.y * k)
    }
}

/// Unit heading vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction {
    pub dx: f64,
    pub dy: f64,
}

impl Direction {
    pub fn from_angle(theta: f64) -> Self {
        Self { dx: theta.cos(), dy: theta.sin() }
    }

    /// Normalizes `(dx, dy)`; fails on the zero vector.
    pub fn new(dx: f64, dy: f64) -> Result<Self> {
        let n = (dx * dx + dy * dy).sqrt();
        if n.is_nan() || n <= 0.0 || !n.is_finite() {
            return Err(Error::InvalidParameter(format!("direction ({dx}, {dy}) has no heading")));
        }
        Ok(Self { dx: dx / n, dy: dy / n })
    }

    pub fn as_vector(self) -> Position {
        Position::new(self.dx, self.dy)
    }

    pub fn length(self) -> f64 {
        self.as_vector().norm()
    }
}

/// Lattice node `(i, j)`, located at `(i / D, j / D)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridIndex {
    pub i: i64,
    pub j: i64,
}

impl GridIndex {
    pub const fn new(i: i64, j: i64) -> Self {
        Self { i, j }
    }

    pub fn offset(self, (di, dj): (i64, i64)) -> Self {
        Self::new(self.i + di, self.j + dj)
    }

    pub fn chebyshev(self, other: GridIndex) -> i64 {
        (self.i - other.i).abs().max((self.j - other.j).abs())
    }
}

/// Neighbour offsets in switching order: E, NE, N, NW, W, SW, S, SE.
pub const NEIGHBOR_OFFSETS: [(i64, i64); 8] =
    [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

pub fn neighbors8(g: GridIndex) -> [GridIndex; 8] {
    NEIGHBOR_OFFSETS.map(|o| g.offset(o))
}

fn check_scale(d: f64) -> Result<()> {
    if d >= 1.0 && d.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("lattice scale D must be >= 1, got {d}")))
    }
}

/// Rounds half toward +infinity.
fn round_half_up(v: f64) -> i64 {
    (v + 0.5).floor() as i64
}

/// Nearest lattice node, halves rounding toward +infinity per component.
pub fn snap(p: Position, d: f64) -> Result<GridIndex> {
    check_scale(d)?;
    Ok(GridIndex::new(round_half_up(p.x * d), round_half_up(p.y * d)))
}

pub fn node_position(g: GridIndex, d: f64) -> Position {
    Position::new(g.i as f64 / d, g.j as f64 / d)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    r: f64,
}

impl Domain {
    pub fn new(r: f64) -> Result<Self> {
        if r > 0.0 && r.is_finite() {
            Ok(Self { r })
        } else {
            Err(Error::InvalidParameter(format!("domain radius must be positive, got {r}")))
        }
    }

    pub fn radius(self) -> f64 {
        self.r
    }

    /// Closed disk membership.
    pub fn contains(self, p: Position) -> bool {
        p.norm_sq() <= self.r * self.r
    }
}

/// A lattice of scale `D` clipped to a circular domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lattice {
    scale: f64,
    domain: Domain,
}

impl Lattice {
    pub fn new(scale: f64, domain: Domain) -> Result<Self> {
        check_scale(scale)?;
        Ok(Self { scale, domain })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.scale
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn snap(&self, p: Position) -> GridIndex {
        GridIndex::new(round_half_up(p.x * self.scale), round_half_up(p.y * self.scale))
    }

    pub fn position(&self, g: GridIndex) -> Position {
        node_position(g, self.scale)
    }

    pub fn contains(&self, g: GridIndex) -> bool {
        self.domain.contains(self.position(g))
    }

    /// Snapped node if it lies in the domain, otherwise the closest in-domain
    /// node among its eight neighbours (first in switching order on ties).
    pub fn snap_inside(&self, p: Position) -> Result<GridIndex> {
        let g = self.snap(p);
        if self.contains(g) {
            return Ok(g);
        }
        let mut best: Option<(f64, GridIndex)> = None;
        for n in neighbors8(g) {
            if !self.contains(n) {
                continue;
            }
            let dist = self.position(n).distance(p);
            if best.is_none_or(|(b, _)| dist < b) {
                best = Some((dist, n));
            }
        }
        best.map(|(_, n)| n).ok_or_else(|| {
            Error::InvalidParameter(format!("no lattice node inside the domain near ({}, {})", p.x, p.y))
        })
    }
}

/// Specular reflection `d - 2 (d . n) n` about the unit normal `n`.
pub fn specular(d: Direction, normal: Position) -> Direction {
    let k = 2.0 * d.as_vector().dot(normal);
    Direction { dx: d.dx - k * normal.x, dy: d.dy - k * normal.y }
}

/// Reflects an outward heading at a boundary point back into the disk.
pub fn reflect(pos: Position, d: Direction, dom: Domain) -> Result<Direction> {
    let len = pos.norm();
    if len == 0.0 {
        return Err(Error::DegenerateNormal);
    }
    if (len - dom.radius()).abs() > 1e-9 {
        return Err(Error::Precondition(format!(
            "reflection point at radius {len} is not on the boundary r = {}",
            dom.radius()
        )));
    }
    let normal = pos * (1.0 / len);
    if d.as_vector().dot(normal) <= 0.0 {
        return Err(Error::Precondition("heading does not point out of the domain".into()));
    }
    Ok(specular(d, normal))
}
