//! Particle motion: exact billiard paths in the disk, their lattice
//! quantization, and the node visit index used for non-local matching.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{specular, Direction, Domain, GridIndex, Lattice, Position};
use crate::quantizer::{greedy_quantize, RuleTrajectory};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MovementEquation {
    pub p0: Position,
    pub theta0: f64,
    pub v: f64,
}

impl MovementEquation {
    pub fn heading(&self) -> Direction {
        Direction::from_angle(self.theta0)
    }

    /// Distance from the centre to the line of the initial chord.
    pub fn chord_distance(&self) -> f64 {
        let d = self.heading();
        (self.p0.x * d.dy - self.p0.y * d.dx).abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Particle {
    pub id: usize,
    pub eq: MovementEquation,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Trajectory {
    pub particle: usize,
    pub nodes: Vec<GridIndex>,
}

/// Tick length giving one lattice cell of travel per tick.
pub fn tick_duration(scale: f64, v: f64) -> f64 {
    1.0 / (scale * v)
}

/// Ticks needed to cover `time` at one cell per tick.
pub fn tick_count(time: f64, scale: f64, v: f64) -> usize {
    (time * scale * v).ceil() as usize
}

/// Positions at `t * dt` for `t = 0..=k` along the straight-line path with
/// specular reflections off the circle.
pub fn ideal_path(eq: &MovementEquation, dom: Domain, k: usize, dt: f64) -> Result<Vec<Position>> {
    if !eq.p0.is_finite() || !dom.contains(eq.p0) {
        return Err(Error::InvalidParameter(format!(
            "initial position ({}, {}) lies outside the domain",
            eq.p0.x, eq.p0.y
        )));
    }
    if eq.v.is_nan() || eq.v <= 0.0 || dt.is_nan() || dt <= 0.0 {
        return Err(Error::InvalidParameter(format!("speed {} and tick {dt} must be positive", eq.v)));
    }
    let r = dom.radius();
    let step = eq.v * dt;
    let mut pos = eq.p0;
    let mut dir = eq.heading();
    let mut out = Vec::with_capacity(k + 1);
    out.push(pos);
    for _ in 0..k {
        let mut remaining = step;
        loop {
            let u = dir.as_vector();
            let b = pos.dot(u);
            let c = pos.norm_sq() - r * r;
            let disc = b * b - c;
            let to_wall = if disc > 0.0 { (-b + disc.sqrt()).max(0.0) } else { 0.0 };
            if to_wall >= remaining || (to_wall == 0.0 && b <= 0.0) {
                pos = pos + u * remaining;
                break;
            }
            let hit = pos + u * to_wall;
            let normal = hit * (1.0 / hit.norm());
            pos = normal * r;
            dir = specular(dir, normal);
            remaining -= to_wall;
        }
        out.push(pos);
    }
    Ok(out)
}

/// Greedy lattice tracking of an ideal path from `start`.
pub fn quantize_trajectory(particle: usize, ideal: &[Position], start: GridIndex, lattice: &Lattice) -> Result<Trajectory> {
    let f = RuleTrajectory::new(ideal.to_vec())?;
    let plan = greedy_quantize(&f, start, lattice)?;
    Ok(Trajectory { particle, nodes: plan.nodes })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Visit {
    pub tick: usize,
    pub particle: usize,
}

/// Lattice node to every `(tick, particle)` that occupies it, tick-sorted.
#[derive(Clone, Debug, Default)]
pub struct VisitIndex {
    visits: HashMap<GridIndex, Vec<Visit>>,
    len: usize,
}

impl VisitIndex {
    pub fn lookup(&self, g: GridIndex) -> &[Visit] {
        self.visits.get(&g).map_or(&[], Vec::as_slice)
    }

    /// Earliest visit to `g` at or after `tick`, ties to the lowest particle id.
    pub fn first_at_or_after(&self, g: GridIndex, tick: usize) -> Option<Visit> {
        let list = self.lookup(g);
        let k = list.partition_point(|v| v.tick < tick);
        list.get(k).copied()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn node_count(&self) -> usize {
        self.visits.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GridIndex, &[Visit])> {
        self.visits.iter().map(|(g, v)| (g, v.as_slice()))
    }
}

pub fn build_visit_index(trajectories: &[Trajectory]) -> Result<VisitIndex> {
    let Some(first) = trajectories.first() else {
        return Ok(VisitIndex::default());
    };
    let ticks = first.nodes.len();
    if let Some(t) = trajectories.iter().find(|t| t.nodes.len() != ticks) {
        return Err(Error::InvalidInput(format!(
            "trajectory of particle {} has {} ticks, expected {ticks}",
            t.particle,
            t.nodes.len()
        )));
    }
    let mut order: Vec<&Trajectory> = trajectories.iter().collect();
    order.sort_by_key(|t| t.particle);
    let mut visits: HashMap<GridIndex, Vec<Visit>> = HashMap::new();
    // tick-major insertion keeps every list sorted by (tick, particle)
    for tick in 0..ticks {
        for t in &order {
            visits.entry(t.nodes[tick]).or_default().push(Visit { tick, particle: t.particle });
        }
    }
    Ok(VisitIndex { visits, len: ticks * trajectories.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantizer::{max_deviation, SwitchPlan};
    use crate::rng::RngState;
    use proptest::prelude::*;
    use std::collections::BTreeSet;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

    fn unit_disk() -> Domain {
        Domain::new(1.0).unwrap()
    }

    #[test]
    fn head_on_chord_reverses_at_wall() {
        let eq = MovementEquation { p0: Position::ORIGIN, theta0: 0.0, v: 1.0 };
        let path = ideal_path(&eq, unit_disk(), 8, tick_duration(4.0, 1.0)).unwrap();
        let xs: Vec<f64> = path.iter().map(|p| p.x).collect();
        let expected = [0.0, 0.25, 0.5, 0.75, 1.0, 0.75, 0.5, 0.25, 0.0];
        for (a, b) in xs.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{xs:?}");
        }
        assert!(path.iter().all(|p| p.y.abs() < 1e-12));
    }

    #[test]
    fn vertical_chord_mirrors_horizontal() {
        let eq = MovementEquation { p0: Position::ORIGIN, theta0: FRAC_PI_2, v: 1.0 };
        let path = ideal_path(&eq, unit_disk(), 8, 0.25).unwrap();
        let expected = [0.0, 0.25, 0.5, 0.75, 1.0, 0.75, 0.5, 0.25, 0.0];
        for (p, y) in path.iter().zip(expected) {
            assert!((p.y - y).abs() < 1e-12 && p.x.abs() < 1e-12);
        }
    }

    #[test]
    fn first_bounce_of_offset_vertical_chord() {
        // x = 0.5 meets the unit circle at y = sqrt(0.75); the normal there is
        // (0.5, sqrt(0.75)), so the heading (0, 1) reflects to
        // (0, 1) - 2 sqrt(0.75) (0.5, sqrt(0.75)) = (-sqrt(0.75), -0.5)
        let eq = MovementEquation { p0: Position::new(0.5, 0.0), theta0: FRAC_PI_2, v: 1.0 };
        let y_hit = 0.75f64.sqrt();
        let dt = 0.01;
        let path = ideal_path(&eq, unit_disk(), 120, dt).unwrap();
        let t_hit = (y_hit / dt).floor() as usize;
        let before = path[t_hit];
        assert!((before.x - 0.5).abs() < 1e-12 && (before.y - t_hit as f64 * dt).abs() < 1e-12);
        let after = path[t_hit + 1];
        let rest = (t_hit + 1) as f64 * dt - y_hit;
        let expected = Position::new(0.5 - y_hit * rest, y_hit - 0.5 * rest);
        assert!(after.distance(expected) < 1e-12, "{after:?} vs {expected:?}");
    }

    #[test]
    fn ideal_path_rejects_outside_start() {
        let eq = MovementEquation { p0: Position::new(1.5, 0.0), theta0: 0.0, v: 1.0 };
        assert!(matches!(ideal_path(&eq, unit_disk(), 3, 0.1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn quantize_exact_lattice_path() {
        let d = 10.0;
        let lat = Lattice::new(d, unit_disk()).unwrap();
        let ideal: Vec<Position> = (0..5).map(|t| Position::new(t as f64 / d, -0.3)).collect();
        let tr = quantize_trajectory(0, &ideal, lat.snap(ideal[0]), &lat).unwrap();
        let f = RuleTrajectory::new(ideal).unwrap();
        let plan = SwitchPlan::from_nodes(tr.nodes).unwrap();
        assert_eq!(crate::quantizer::plan_cost(&plan, &f, d).unwrap().total, 0.0);
    }

    #[test]
    fn quantize_diagonal_is_all_northeast() {
        let d = 20.0;
        let lat = Lattice::new(d, unit_disk()).unwrap();
        let ideal: Vec<Position> = (0..10).map(|t| Position::new(t as f64 / d, t as f64 / d)).collect();
        let tr = quantize_trajectory(0, &ideal, GridIndex::new(0, 0), &lat).unwrap();
        let plan = SwitchPlan::from_nodes(tr.nodes).unwrap();
        assert!(plan.actions.iter().all(|&a| a == crate::quantizer::Action::NE));
    }

    #[test]
    fn reflected_path_stays_within_tracking_bound() {
        let d = 10.0;
        let lat = Lattice::new(d, unit_disk()).unwrap();
        let eq = MovementEquation { p0: Position::new(0.13, -0.21), theta0: 0.7, v: 1.0 };
        let ideal = ideal_path(&eq, unit_disk(), 40, tick_duration(d, 1.0)).unwrap();
        let tr = quantize_trajectory(0, &ideal, lat.snap(ideal[0]), &lat).unwrap();
        let f = RuleTrajectory::new(ideal).unwrap();
        let plan = SwitchPlan::from_nodes(tr.nodes).unwrap();
        assert!(max_deviation(&plan, &f, d) <= 2f64.sqrt() / d);
    }

    #[test]
    fn index_counts_every_visit() {
        let tr = Trajectory {
            particle: 0,
            nodes: vec![GridIndex::new(0, 0), GridIndex::new(1, 0), GridIndex::new(1, 0), GridIndex::new(2, 1)],
        };
        let idx = build_visit_index(&[tr]).unwrap();
        assert_eq!(idx.len(), 4);
        assert_eq!(idx.lookup(GridIndex::new(1, 0)).len(), 2);
    }

    #[test]
    fn crossing_particles_share_sorted_node() {
        let a = Trajectory { particle: 0, nodes: vec![GridIndex::new(5, 5), GridIndex::new(0, 0), GridIndex::new(1, 0)] };
        let b = Trajectory { particle: 1, nodes: vec![GridIndex::new(0, 0), GridIndex::new(0, 1), GridIndex::new(0, 2)] };
        let idx = build_visit_index(&[b, a]).unwrap();
        assert_eq!(
            idx.lookup(GridIndex::new(0, 0)),
            &[Visit { tick: 0, particle: 1 }, Visit { tick: 1, particle: 0 }]
        );
        assert_eq!(idx.first_at_or_after(GridIndex::new(0, 0), 1), Some(Visit { tick: 1, particle: 0 }));
        assert_eq!(idx.first_at_or_after(GridIndex::new(0, 0), 2), None);
    }

    #[test]
    fn index_rejects_ragged_input() {
        let a = Trajectory { particle: 0, nodes: vec![GridIndex::new(0, 0)] };
        let b = Trajectory { particle: 1, nodes: vec![GridIndex::new(0, 0); 2] };
        assert!(matches!(build_visit_index(&[a, b]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn index_matches_naive_rebuild() {
        let mut rng = RngState::new(8);
        let trajectories: Vec<Trajectory> = (0..4)
            .map(|particle| {
                let mut g = GridIndex::new(0, 0);
                let nodes = (0..30)
                    .map(|_| {
                        g = g.offset(((rng.next_u64() % 3) as i64 - 1, (rng.next_u64() % 3) as i64 - 1));
                        g
                    })
                    .collect();
                Trajectory { particle, nodes }
            })
            .collect();
        let idx = build_visit_index(&trajectories).unwrap();
        let nodes: BTreeSet<GridIndex> = trajectories.iter().flat_map(|t| t.nodes.iter().copied()).collect();
        assert_eq!(idx.node_count(), nodes.len());
        for g in nodes {
            let mut naive = vec![];
            for t in &trajectories {
                for (tick, &n) in t.nodes.iter().enumerate() {
                    if n == g {
                        naive.push(Visit { tick, particle: t.particle });
                    }
                }
            }
            naive.sort();
            assert_eq!(idx.lookup(g), naive.as_slice());
        }
        assert_eq!(idx.len(), 4 * 30);
    }

    proptest! {
        #[test]
        fn ideal_path_invariants(
            rho in 0.0f64..0.99,
            phi in 0.0f64..TAU,
            theta in 0.0f64..TAU,
            d in 5.0f64..60.0,
        ) {
            let eq = MovementEquation { p0: Position::new(rho * phi.cos(), rho * phi.sin()), theta0: theta, v: 1.0 };
            let dt = tick_duration(d, 1.0);
            let path = ideal_path(&eq, unit_disk(), 400, dt).unwrap();
            let caustic = eq.chord_distance();
            for w in path.windows(2) {
                // a step never covers more than one cell of arc length
                prop_assert!(w[0].distance(w[1]) <= dt + 1e-12);
            }
            for p in &path {
                prop_assert!(p.norm() <= 1.0 + 1e-9);
                prop_assert!(p.norm() >= caustic - 1e-9);
            }
        }

        #[test]
        fn straight_segment_steps_are_exactly_one_cell(theta in 0.0f64..TAU, d in 5.0f64..100.0) {
            let eq = MovementEquation { p0: Position::ORIGIN, theta0: theta, v: 1.0 };
            let k = (0.9 * d) as usize;
            let path = ideal_path(&eq, unit_disk(), k, tick_duration(d, 1.0)).unwrap();
            for w in path.windows(2) {
                prop_assert!((w[0].distance(w[1]) - 1.0 / d).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_start_has_zero_chord_distance() {
        let eq = MovementEquation { p0: Position::new(0.3, 0.3), theta0: FRAC_PI_4, v: 1.0 };
        assert!(eq.chord_distance() < 1e-15);
    }
}
