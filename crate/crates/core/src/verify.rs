//! Self-check harness: solver cross-checks, matcher equivalence against a
//! naive scan, and closure of the produced patterns.

use std::collections::BTreeSet;
use std::f64::consts::{SQRT_2, TAU};
use std::fmt;

use crate::config::SimConfig;
use crate::dynamics::{build_visit_index, Trajectory};
use crate::experiment::{deposit_nodes, simulate};
use crate::geometry::{Domain, GridIndex, Lattice, Position};
use crate::quantizer::{
    brute_force_quantize, greedy_quantize, max_deviation, optimal_quantize, plan_cost, RuleTrajectory,
};
use crate::rng::RngState;
use crate::symmetry::{
    causality_guard, find_match, oracle, GuardVerdict, RuleDescriptor, SymmetryKind,
};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

/// Random walk target with per-tick displacement at most one cell.
pub fn random_slow_trajectory(rng: &mut RngState, k: usize, d: f64, spread: f64) -> RuleTrajectory {
    let mut p = Position::new((rng.next_unit() - 0.5) * spread, (rng.next_unit() - 0.5) * spread);
    let mut samples = vec![p];
    for _ in 0..k {
        let phi = TAU * rng.next_unit();
        let step = rng.next_unit() / d;
        p = p + Position::new(phi.cos(), phi.sin()) * step;
        samples.push(p);
    }
    RuleTrajectory::new(samples).expect("finite samples")
}

fn describe(f: &RuleTrajectory) -> String {
    let pts: Vec<String> = f.samples().iter().map(|p| format!("({:?},{:?})", p.x, p.y)).collect();
    format!("[{}]", pts.join(","))
}

/// Greedy / DP / exhaustive agreement on small instances.
pub fn check_quantizer_sandwich(seed: u64, instances: usize) -> CheckResult {
    let mut rng = RngState::new(seed);
    let dom = Domain::new(1.0).unwrap();
    for n in 0..instances {
        let d = if n % 2 == 0 { 4.0 } else { 8.0 };
        let k = 1 + (rng.next_u64() % 6) as usize;
        let lattice = Lattice::new(d, dom).unwrap();
        let f = random_slow_trajectory(&mut rng, k, d, 1.0);
        let start = lattice.snap(f.samples()[0]);
        let run = || -> crate::Result<(f64, f64, f64)> {
            let b = plan_cost(&brute_force_quantize(&f, start, &lattice)?, &f, d)?.total;
            let o = plan_cost(&optimal_quantize(&f, start, &lattice, 4)?, &f, d)?.total;
            let g = plan_cost(&greedy_quantize(&f, start, &lattice)?, &f, d)?.total;
            Ok((b, o, g))
        };
        let fail = |why: String| CheckResult {
            name: "quantizer-sandwich",
            passed: false,
            detail: format!("instance {n} (seed {seed}, D={d}, start={start:?}, f={}): {why}", describe(&f)),
        };
        match run() {
            Ok((b, o, g)) if b == o && o <= g => {}
            Ok((b, o, g)) => return fail(format!("brute {b:?} optimal {o:?} greedy {g:?}")),
            Err(e) => return fail(e.to_string()),
        }
    }
    CheckResult { name: "quantizer-sandwich", passed: true, detail: format!("{instances} instances, seed {seed}") }
}

/// Straight lines at one cell per tick stay within sqrt(2) cells under greedy.
pub fn check_tracking_bound(seed: u64, lines: usize, k: usize, d: f64) -> CheckResult {
    let mut rng = RngState::new(seed);
    let lattice = Lattice::new(d, Domain::new(1e9).unwrap()).unwrap();
    let bound = SQRT_2 / d;
    let mut worst: f64 = 0.0;
    for n in 0..lines {
        let start = GridIndex::new((rng.next_u64() % 21) as i64 - 10, (rng.next_u64() % 21) as i64 - 10);
        let origin = lattice.position(start);
        let phi = TAU * rng.next_unit();
        let step = Position::new(phi.cos(), phi.sin()) * (1.0 / d);
        let f = RuleTrajectory::new((0..=k).map(|t| origin + step * t as f64).collect()).unwrap();
        let plan = greedy_quantize(&f, start, &lattice).expect("start is inside");
        let dev = max_deviation(&plan, &f, d);
        worst = worst.max(dev);
        if dev > bound {
            return CheckResult {
                name: "greedy-tracking",
                passed: false,
                detail: format!("line {n} (seed {seed}, start {start:?}, heading {phi:?}): deviation {dev:?} > {bound:?}"),
            };
        }
    }
    CheckResult {
        name: "greedy-tracking",
        passed: true,
        detail: format!("{lines} lines, worst deviation {:.6} cells", worst * d),
    }
}

/// Small simulation used by the matcher and closure checks.
pub fn small_config(seed: u64, particles: usize, time: f64, scale: f64, kind: SymmetryKind) -> SimConfig {
    SimConfig { seed, time, particles, scale, symmetry: kind, ..SimConfig::default() }
}

/// Indexed matching equals the naive all-pairs scan for every (particle, tick).
pub fn matcher_agrees(trajectories: &[Trajectory], kind: SymmetryKind) -> Result<usize, String> {
    let index = build_visit_index(trajectories).map_err(|e| e.to_string())?;
    let mut fired = 0;
    for tr in trajectories {
        for (t, &g) in tr.nodes.iter().enumerate() {
            let fast: BTreeSet<_> = find_match(tr.particle, t, g, &index, kind).into_iter().collect();
            let slow: BTreeSet<_> = oracle::naive_find_match(tr.particle, t, g, trajectories, kind).into_iter().collect();
            if fast != slow {
                return Err(format!("particle {} tick {t} node {g:?}: indexed {fast:?} naive {slow:?}", tr.particle));
            }
            fired += usize::from(!fast.is_empty());
        }
    }
    Ok(fired)
}

pub fn check_matcher_equivalence(seed: u64, instances: usize) -> CheckResult {
    let mut fired = 0;
    for n in 0..instances as u64 {
        let kind = if n % 2 == 0 { SymmetryKind::MirrorY } else { SymmetryKind::FourFold };
        // D = 10 and T <= 6 gives K <= 60
        let cfg = small_config(seed + n, 3, 2.0 + (n % 5) as f64, 10.0, kind);
        let sim = match simulate(&cfg) {
            Ok(s) => s,
            Err(e) => return CheckResult { name: "matcher-equivalence", passed: false, detail: e.to_string() },
        };
        match matcher_agrees(&sim.trajectories, kind) {
            Ok(k) => fired += k,
            Err(why) => {
                return CheckResult {
                    name: "matcher-equivalence",
                    passed: false,
                    detail: format!("seed {} {kind}: {why}", cfg.seed),
                }
            }
        }
    }
    CheckResult {
        name: "matcher-equivalence",
        passed: true,
        detail: format!("{instances} instances, {fired} matching visits"),
    }
}

pub fn mirror_image(nodes: &BTreeSet<GridIndex>) -> BTreeSet<GridIndex> {
    nodes.iter().map(|g| GridIndex::new(-g.i, g.j)).collect()
}

pub fn fourfold_closed(nodes: &BTreeSet<GridIndex>) -> bool {
    nodes.iter().all(|g| {
        [GridIndex::new(-g.i, g.j), GridIndex::new(g.i, -g.j), GridIndex::new(-g.i, -g.j)]
            .iter()
            .all(|img| nodes.contains(img))
    })
}

/// Deposit node sets are closed under the active symmetry group, and every
/// deposit is certified by the naive scan.
pub fn check_closure_and_soundness(seed: u64, runs: usize) -> CheckResult {
    let mut total = 0;
    for n in 0..runs as u64 {
        let kind = if n % 2 == 0 { SymmetryKind::MirrorY } else { SymmetryKind::FourFold };
        let cfg = small_config(seed + n, 4, 3.0, 20.0, kind);
        let sim = match simulate(&cfg) {
            Ok(s) => s,
            Err(e) => return CheckResult { name: "pattern-closure", passed: false, detail: e.to_string() },
        };
        let nodes = deposit_nodes(&sim.deposits);
        let closed = match kind {
            SymmetryKind::MirrorY => mirror_image(&nodes) == nodes,
            SymmetryKind::FourFold => fourfold_closed(&nodes),
        };
        let sound = oracle::deposits_are_sound(&sim.deposits, &sim.trajectories, &cfg.rule());
        if !closed || !sound {
            return CheckResult {
                name: "pattern-closure",
                passed: false,
                detail: format!("seed {} {kind}: closed={closed} sound={sound}", cfg.seed),
            };
        }
        total += sim.deposits.len();
    }
    CheckResult { name: "pattern-closure", passed: true, detail: format!("{runs} runs, {total} deposits") }
}

pub fn check_causality_guard() -> CheckResult {
    let symmetric_ok = [SymmetryKind::MirrorY, SymmetryKind::FourFold]
        .iter()
        .all(|&k| causality_guard(RuleDescriptor::symmetry(k)) == GuardVerdict::Ok);
    let steering = causality_guard(RuleDescriptor { reads_future: true, modifies_motion: true });
    let passed = symmetric_ok && steering == GuardVerdict::Rejected;
    CheckResult {
        name: "causality-guard",
        passed,
        detail: format!("symmetry rules ok={symmetric_ok}, future-steering rule {steering:?}"),
    }
}

/// Runs every check with fixed seeds.
pub fn verify() -> VerifyReport {
    VerifyReport {
        checks: vec![
            check_quantizer_sandwich(1, 50),
            check_tracking_bound(2, 200, 200, 50.0),
            check_matcher_equivalence(3, 10),
            check_closure_and_soundness(4, 6),
            check_causality_guard(),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_report_passes_and_is_stable() {
        let a = verify();
        assert!(a.passed(), "{a}");
        assert_eq!(a.to_string(), verify().to_string());
    }

    #[test]
    fn closure_helpers() {
        let set: BTreeSet<_> = [GridIndex::new(1, 2), GridIndex::new(-1, 2)].into_iter().collect();
        assert_eq!(mirror_image(&set), set);
        assert!(!fourfold_closed(&set));
    }
}
