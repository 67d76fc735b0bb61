//! Turning a sampled rule trajectory into a lattice switching plan.
//!
//! The objective is the summed Euclidean deviation between each planned node
//! and the trajectory sample at the same tick. Three solvers are provided:
//! an online greedy policy (what the simulator runs), a corridor-restricted
//! dynamic program, and exhaustive enumeration for tiny horizons.
//!
//! Every solver uses the same action preference for ties: HOLD first, then
//! the eight moves in neighbour order. All solvers skip nodes outside the
//! domain.

use crate::error::{Error, Result};
use crate::geometry::{GridIndex, Lattice, Position, NEIGHBOR_OFFSETS};

/// One switching decision at a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    E,
    NE,
    N,
    NW,
    W,
    SW,
    S,
    SE,
    Hold,
}

impl Action {
    /// Tie-break preference order.
    pub const PREFERENCE: [Action; 9] = [
        Action::Hold,
        Action::E,
        Action::NE,
        Action::N,
        Action::NW,
        Action::W,
        Action::SW,
        Action::S,
        Action::SE,
    ];

    const MOVES: [Action; 8] =
        [Action::E, Action::NE, Action::N, Action::NW, Action::W, Action::SW, Action::S, Action::SE];

    /// Wire index: 0..=7 for the moves in neighbour order, 8 for HOLD.
    pub fn index(self) -> u8 {
        match self {
            Action::Hold => 8,
            m => Self::MOVES.iter().position(|&a| a == m).unwrap() as u8,
        }
    }

    pub fn from_index(k: u8) -> Option<Action> {
        match k {
            0..=7 => Some(Self::MOVES[k as usize]),
            8 => Some(Action::Hold),
            _ => None,
        }
    }

    /// Position in [`Action::PREFERENCE`].
    pub fn rank(self) -> usize {
        match self {
            Action::Hold => 0,
            m => m.index() as usize + 1,
        }
    }

    pub fn offset(self) -> (i64, i64) {
        match self {
            Action::Hold => (0, 0),
            m => NEIGHBOR_OFFSETS[m.index() as usize],
        }
    }

    /// The action that moves `from` onto `to`, if they are adjacent or equal.
    pub fn between(from: GridIndex, to: GridIndex) -> Option<Action> {
        let delta = (to.i - from.i, to.j - from.j);
        Self::PREFERENCE.into_iter().find(|a| a.offset() == delta)
    }
}

/// Sampled rule trajectory, one position per tick `0..=K`.
#[derive(Clone, Debug, PartialEq)]
pub struct RuleTrajectory {
    samples: Vec<Position>,
}

impl RuleTrajectory {
    pub fn new(samples: Vec<Position>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidInput("rule trajectory has no samples".into()));
        }
        if let Some(t) = samples.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidInput(format!("sample {t} is not finite")));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[Position] {
        &self.samples
    }

    /// Number of transitions `K`.
    pub fn horizon(&self) -> usize {
        self.samples.len() - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SwitchPlan {
    pub nodes: Vec<GridIndex>,
    pub actions: Vec<Action>,
}

impl SwitchPlan {
    /// Builds a plan from a node walk, rejecting non-adjacent steps.
    pub fn from_nodes(nodes: Vec<GridIndex>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidInput("plan has no nodes".into()));
        }
        let actions = nodes
            .windows(2)
            .enumerate()
            .map(|(t, w)| {
                Action::between(w[0], w[1]).ok_or_else(|| {
                    Error::InvalidInput(format!("step {t} from {:?} to {:?} is not a lattice move", w[0], w[1]))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { nodes, actions })
    }

    /// Replays the actions from the first node; true when they reproduce `nodes`.
    pub fn is_consistent(&self) -> bool {
        if self.nodes.is_empty() || self.actions.len() + 1 != self.nodes.len() {
            return false;
        }
        let mut at = self.nodes[0];
        for (a, &next) in self.actions.iter().zip(&self.nodes[1..]) {
            at = at.offset(a.offset());
            if at != next {
                return false;
            }
        }
        true
    }
}

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct PlanCost {
    pub total: f64,
}

/// Summed Euclidean deviation between plan nodes and trajectory samples.
pub fn plan_cost(plan: &SwitchPlan, f: &RuleTrajectory, d: f64) -> Result<PlanCost> {
    if plan.nodes.len() != f.samples.len() {
        return Err(Error::InvalidInput(format!(
            "plan has {} nodes but trajectory has {} samples",
            plan.nodes.len(),
            f.samples.len()
        )));
    }
    let total = plan
        .nodes
        .iter()
        .zip(&f.samples)
        .fold(0.0, |acc, (&g, &p)| acc + crate::geometry::node_position(g, d).distance(p));
    Ok(PlanCost { total })
}

/// Largest per-tick deviation between plan and trajectory.
pub fn max_deviation(plan: &SwitchPlan, f: &RuleTrajectory, d: f64) -> f64 {
    plan.nodes
        .iter()
        .zip(&f.samples)
        .map(|(&g, &p)| crate::geometry::node_position(g, d).distance(p))
        .fold(0.0, f64::max)
}

fn check_start(start: GridIndex, lattice: &Lattice) -> Result<()> {
    if lattice.contains(start) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("start node {start:?} is outside the domain")))
    }
}

/// Online policy: at each tick take the action whose node lands closest to
/// the next sample.
pub fn greedy_quantize(f: &RuleTrajectory, start: GridIndex, lattice: &Lattice) -> Result<SwitchPlan> {
    check_start(start, lattice)?;
    let k = f.horizon();
    let mut nodes = Vec::with_capacity(k + 1);
    let mut actions = Vec::with_capacity(k);
    nodes.push(start);
    let mut at = start;
    for target in &f.samples[1..] {
        let mut best: Option<(f64, Action, GridIndex)> = None;
        for a in Action::PREFERENCE {
            let cand = at.offset(a.offset());
            if !lattice.contains(cand) {
                continue;
            }
            let dist = lattice.position(cand).distance(*target);
            if best.is_none_or(|(b, _, _)| dist < b) {
                best = Some((dist, a, cand));
            }
        }
        // HOLD is always a candidate since `at` is inside the domain
        let (_, a, cand) = best.expect("hold keeps the walk inside the domain");
        actions.push(a);
        nodes.push(cand);
        at = cand;
    }
    Ok(SwitchPlan { nodes, actions })
}

/// Minimum-cost plan among walks that stay within Chebyshev distance `w` of
/// the snapped trajectory at every tick.
pub fn optimal_quantize(f: &RuleTrajectory, start: GridIndex, lattice: &Lattice, w: usize) -> Result<SwitchPlan> {
    if w < 1 {
        return Err(Error::InvalidParameter("corridor window must be at least 1".into()));
    }
    check_start(start, lattice)?;
    let wi = w as i64;
    let side = 2 * w + 1;
    let cells = side * side;
    let samples = f.samples();
    let centers: Vec<GridIndex> = samples.iter().map(|&p| lattice.snap(p)).collect();

    let cell_of = |t: usize, g: GridIndex| -> Option<usize> {
        let c = centers[t];
        let (a, b) = (g.i - c.i, g.j - c.j);
        (a.abs() <= wi && b.abs() <= wi).then(|| ((a + wi) as usize) * side + (b + wi) as usize)
    };
    let node_of = |t: usize, cell: usize| -> GridIndex {
        let c = centers[t];
        GridIndex::new(c.i + (cell / side) as i64 - wi, c.j + (cell % side) as i64 - wi)
    };

    let start_cell = cell_of(0, start)
        .ok_or_else(|| Error::Infeasible(format!("start {start:?} lies outside the corridor at tick 0")))?;

    let mut cost = vec![f64::INFINITY; cells];
    cost[start_cell] = lattice.position(start).distance(samples[0]);
    // back[t - 1][cell] = preference rank of the action that entered `cell` at tick t
    let mut back: Vec<Vec<u8>> = Vec::with_capacity(f.horizon());

    #[allow(clippy::needless_range_loop)]
    for t in 1..samples.len() {
        let mut next = vec![f64::INFINITY; cells];
        let mut choice = vec![u8::MAX; cells];
        for cell in 0..cells {
            let node = node_of(t, cell);
            if !lattice.contains(node) {
                continue;
            }
            let here = lattice.position(node).distance(samples[t]);
            for (rank, a) in Action::PREFERENCE.iter().enumerate() {
                let (di, dj) = a.offset();
                let pred = GridIndex::new(node.i - di, node.j - dj);
                let Some(pc) = cell_of(t - 1, pred) else { continue };
                let c = cost[pc] + here;
                if c < next[cell] {
                    next[cell] = c;
                    choice[cell] = rank as u8;
                }
            }
        }
        if next.iter().all(|c| c.is_infinite()) {
            return Err(Error::Infeasible(format!("corridor of radius {w} is disconnected at tick {t}")));
        }
        cost = next;
        back.push(choice);
    }

    let mut end = 0;
    for cell in 1..cells {
        if cost[cell] < cost[end] {
            end = cell;
        }
    }
    let k = f.horizon();
    let mut nodes = vec![start; k + 1];
    let mut cell = end;
    for t in (1..=k).rev() {
        let node = node_of(t, cell);
        nodes[t] = node;
        let (di, dj) = Action::PREFERENCE[back[t - 1][cell] as usize].offset();
        cell = cell_of(t - 1, GridIndex::new(node.i - di, node.j - dj)).expect("predecessor lies in corridor");
    }
    debug_assert_eq!(node_of(0, cell), start);
    SwitchPlan::from_nodes(nodes)
}

/// Largest horizon accepted by [`brute_force_quantize`].
pub const BRUTE_FORCE_MAX_HORIZON: usize = 6;

/// Exhaustive search over all `9^K` action sequences.
pub fn brute_force_quantize(f: &RuleTrajectory, start: GridIndex, lattice: &Lattice) -> Result<SwitchPlan> {
    let k = f.horizon();
    if k > BRUTE_FORCE_MAX_HORIZON {
        return Err(Error::Budget(format!(
            "exhaustive search is limited to K <= {BRUTE_FORCE_MAX_HORIZON}, got K = {k}"
        )));
    }
    check_start(start, lattice)?;

    struct Search<'a> {
        samples: &'a [Position],
        lattice: &'a Lattice,
        path: Vec<GridIndex>,
        best: Option<(f64, Vec<GridIndex>)>,
    }

    impl Search<'_> {
        fn descend(&mut self, acc: f64) {
            let t = self.path.len();
            if t == self.samples.len() {
                if self.best.as_ref().is_none_or(|(b, _)| acc < *b) {
                    self.best = Some((acc, self.path.clone()));
                }
                return;
            }
            let at = *self.path.last().unwrap();
            for a in Action::PREFERENCE {
                let next = at.offset(a.offset());
                if !self.lattice.contains(next) {
                    continue;
                }
                let c = acc + self.lattice.position(next).distance(self.samples[t]);
                self.path.push(next);
                self.descend(c);
                self.path.pop();
            }
        }
    }

    let mut search = Search { samples: f.samples(), lattice, path: vec![start], best: None };
    let first = lattice.position(start).distance(f.samples()[0]);
    search.descend(first);
    let (_, nodes) = search.best.expect("HOLD-only plan always exists");
    SwitchPlan::from_nodes(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use crate::rng::RngState;

    fn open_lattice(d: f64) -> Lattice {
        Lattice::new(d, Domain::new(1e6).unwrap()).unwrap()
    }

    fn traj(points: &[(f64, f64)]) -> RuleTrajectory {
        RuleTrajectory::new(points.iter().map(|&(x, y)| Position::new(x, y)).collect()).unwrap()
    }

    /// Second summation route: pairwise distances collected first, then summed.
    fn resum(plan: &SwitchPlan, f: &RuleTrajectory, d: f64) -> f64 {
        let mut parts = Vec::new();
        for t in 0..plan.nodes.len() {
            let g = plan.nodes[t];
            let (dx, dy) = (g.i as f64 / d - f.samples()[t].x, g.j as f64 / d - f.samples()[t].y);
            parts.push(dx.hypot(dy));
        }
        parts.iter().sum()
    }

    #[test]
    fn action_indices_round_trip() {
        for k in 0..9u8 {
            assert_eq!(Action::from_index(k).unwrap().index(), k);
        }
        assert_eq!(Action::from_index(9), None);
        assert_eq!(Action::Hold.rank(), 0);
        assert_eq!(Action::E.rank(), 1);
    }

    #[test]
    fn cost_zero_on_exact_plan() {
        let d = 10.0;
        let plan = SwitchPlan::from_nodes(vec![GridIndex::new(0, 0), GridIndex::new(1, 0), GridIndex::new(2, 1)]).unwrap();
        let f = traj(&[(0.0, 0.0), (0.1, 0.0), (0.2, 0.1)]);
        assert_eq!(plan_cost(&plan, &f, d).unwrap().total, 0.0);
    }

    #[test]
    fn cost_of_alternating_plan() {
        let d = 8.0;
        let g = GridIndex::new(2, 3);
        let e = g.offset((1, 0));
        let plan = SwitchPlan::from_nodes(vec![g, e, g, e]).unwrap();
        let p = node_pos(g, d);
        let f = RuleTrajectory::new(vec![p; 4]).unwrap();
        assert!((plan_cost(&plan, &f, d).unwrap().total - 2.0 / d).abs() < 1e-15);
    }

    fn node_pos(g: GridIndex, d: f64) -> Position {
        crate::geometry::node_position(g, d)
    }

    #[test]
    fn cost_rejects_length_mismatch() {
        let plan = SwitchPlan::from_nodes(vec![GridIndex::new(0, 0)]).unwrap();
        let f = traj(&[(0.0, 0.0), (0.0, 0.0)]);
        assert!(matches!(plan_cost(&plan, &f, 4.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn cost_matches_independent_resummation() {
        let mut rng = RngState::new(5);
        let d = 6.0;
        for _ in 0..20 {
            let mut nodes = vec![GridIndex::new(0, 0)];
            let mut samples = vec![];
            for t in 0..5 {
                if t > 0 {
                    let a = Action::from_index((rng.next_u64() % 9) as u8).unwrap();
                    let last = *nodes.last().unwrap();
                    nodes.push(last.offset(a.offset()));
                }
                samples.push(Position::new(rng.next_unit() - 0.5, rng.next_unit() - 0.5));
            }
            let plan = SwitchPlan::from_nodes(nodes).unwrap();
            let f = RuleTrajectory::new(samples).unwrap();
            let a = plan_cost(&plan, &f, d).unwrap().total;
            assert!((a - resum(&plan, &f, d)).abs() < 1e-12);
        }
    }

    #[test]
    fn greedy_holds_on_constant_target() {
        let d = 10.0;
        let g = GridIndex::new(-3, 4);
        let f = RuleTrajectory::new(vec![node_pos(g, d); 6]).unwrap();
        let plan = greedy_quantize(&f, g, &open_lattice(d)).unwrap();
        assert!(plan.actions.iter().all(|&a| a == Action::Hold));
        assert_eq!(plan_cost(&plan, &f, d).unwrap().total, 0.0);
    }

    #[test]
    fn greedy_follows_eastward_motion() {
        let d = 10.0;
        let f = traj(&(0..8).map(|t| (t as f64 / d, 0.2)).collect::<Vec<_>>());
        let plan = greedy_quantize(&f, GridIndex::new(0, 2), &open_lattice(d)).unwrap();
        assert!(plan.actions.iter().all(|&a| a == Action::E));
        assert_eq!(plan_cost(&plan, &f, d).unwrap().total, 0.0);
    }

    #[test]
    fn greedy_matches_brute_force_on_30_degree_line() {
        let d = 10.0;
        let (c, s) = (30f64.to_radians().cos(), 30f64.to_radians().sin());
        let f = traj(&(0..=6).map(|t| (t as f64 * c / d, t as f64 * s / d)).collect::<Vec<_>>());
        let lat = open_lattice(d);
        let greedy = greedy_quantize(&f, GridIndex::new(0, 0), &lat).unwrap();
        let brute = brute_force_quantize(&f, GridIndex::new(0, 0), &lat).unwrap();
        let gc = plan_cost(&greedy, &f, d).unwrap().total;
        let bc = plan_cost(&brute, &f, d).unwrap().total;
        assert!((gc - bc).abs() < 1e-12, "greedy {gc} brute {bc}");
    }

    #[test]
    fn greedy_errors() {
        assert!(RuleTrajectory::new(vec![]).is_err());
        let lat = Lattice::new(10.0, Domain::new(1.0).unwrap()).unwrap();
        let f = traj(&[(0.0, 0.0)]);
        assert!(matches!(greedy_quantize(&f, GridIndex::new(11, 0), &lat), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn greedy_never_leaves_domain() {
        let lat = Lattice::new(10.0, Domain::new(1.0).unwrap()).unwrap();
        let f = traj(&(0..30).map(|t| (t as f64 * 0.1, 0.0)).collect::<Vec<_>>());
        let plan = greedy_quantize(&f, GridIndex::new(0, 0), &lat).unwrap();
        assert!(plan.nodes.iter().all(|&g| lat.contains(g)));
        assert_eq!(*plan.nodes.last().unwrap(), GridIndex::new(10, 0));
    }

    #[test]
    fn optimal_follows_exact_lattice_path() {
        let d = 5.0;
        let nodes = [(0, 0), (1, 1), (1, 2), (0, 2), (0, 2), (-1, 1)];
        let f = traj(&nodes.iter().map(|&(i, j)| (i as f64 / d, j as f64 / d)).collect::<Vec<_>>());
        let plan = optimal_quantize(&f, GridIndex::new(0, 0), &open_lattice(d), 3).unwrap();
        assert_eq!(plan_cost(&plan, &f, d).unwrap().total, 0.0);
        let expected: Vec<_> = nodes.iter().map(|&(i, j)| GridIndex::new(i, j)).collect();
        assert_eq!(plan.nodes, expected);
    }

    #[test]
    fn narrow_corridor_costs_more_on_fast_target() {
        // the target jumps two cells per tick while the walk makes one, so the
        // lag reaches 3 cells: inside a W = 3 corridor, outside a W = 1 one
        let d = 4.0;
        let f = traj(&(0..4).map(|t| (2.0 * t as f64 / d, 0.0)).collect::<Vec<_>>());
        let lat = open_lattice(d);
        let wide = optimal_quantize(&f, GridIndex::new(0, 0), &lat, 3).unwrap();
        let brute = brute_force_quantize(&f, GridIndex::new(0, 0), &lat).unwrap();
        let cw = plan_cost(&wide, &f, d).unwrap().total;
        assert_eq!(cw, plan_cost(&brute, &f, d).unwrap().total);
        assert!((cw - 6.0 / d).abs() < 1e-12);
        let narrow = optimal_quantize(&f, GridIndex::new(0, 0), &lat, 1);
        assert!(matches!(narrow, Err(Error::Infeasible(_))));
    }

    #[test]
    fn optimal_errors() {
        let lat = open_lattice(4.0);
        let f = traj(&[(0.0, 0.0), (0.25, 0.0)]);
        assert!(matches!(optimal_quantize(&f, GridIndex::new(5, 0), &lat, 2), Err(Error::Infeasible(_))));
        assert!(matches!(optimal_quantize(&f, GridIndex::new(0, 0), &lat, 0), Err(Error::InvalidParameter(_))));
        let jump = traj(&[(0.0, 0.0), (5.0, 0.0)]);
        assert!(matches!(optimal_quantize(&jump, GridIndex::new(0, 0), &lat, 1), Err(Error::Infeasible(_))));
    }

    #[test]
    fn brute_force_examples() {
        let d = 4.0;
        let lat = open_lattice(d);
        let f = traj(&[(0.0, 0.0), (0.25, 0.25)]);
        assert_eq!(brute_force_quantize(&f, GridIndex::new(0, 0), &lat).unwrap().actions, vec![Action::NE]);
        let f = traj(&[(0.0, 0.0); 3]);
        assert_eq!(
            brute_force_quantize(&f, GridIndex::new(0, 0), &lat).unwrap().actions,
            vec![Action::Hold, Action::Hold]
        );
        let f = traj(&[(0.0, 0.0); 8]);
        assert!(matches!(brute_force_quantize(&f, GridIndex::new(0, 0), &lat), Err(Error::Budget(_))));
    }

    #[test]
    fn plans_are_adjacent_walks() {
        let mut rng = RngState::new(17);
        let d = 8.0;
        let lat = Lattice::new(d, Domain::new(1.0).unwrap()).unwrap();
        for _ in 0..20 {
            let mut p = Position::new(rng.next_unit() * 0.5, rng.next_unit() * 0.5);
            let mut samples = vec![p];
            for _ in 0..5 {
                let phi = rng.next_unit() * std::f64::consts::TAU;
                p = p + Position::new(phi.cos(), phi.sin()) * (rng.next_unit() / d);
                samples.push(p);
            }
            let f = RuleTrajectory::new(samples).unwrap();
            let start = lat.snap(f.samples()[0]);
            for plan in [
                greedy_quantize(&f, start, &lat).unwrap(),
                optimal_quantize(&f, start, &lat, 3).unwrap(),
                brute_force_quantize(&f, start, &lat).unwrap(),
            ] {
                assert!(plan.is_consistent());
                assert_eq!(plan.nodes[0], start);
            }
        }
    }

    #[test]
    fn corrupted_plan_is_inconsistent() {
        let mut plan = SwitchPlan::from_nodes(vec![GridIndex::new(0, 0), GridIndex::new(1, 0)]).unwrap();
        plan.actions[0] = Action::N;
        assert!(!plan.is_consistent());
        assert!(SwitchPlan::from_nodes(vec![GridIndex::new(0, 0), GridIndex::new(2, 0)]).is_err());
    }
}
