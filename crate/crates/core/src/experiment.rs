//! Whole simulations: particle set-up, paths, matching, artifacts and sweeps.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::config::SimConfig;
use crate::dynamics::{
    build_visit_index, ideal_path, quantize_trajectory, tick_count, tick_duration, MovementEquation, Particle,
    Trajectory,
};
use crate::error::{Error, Result};
use crate::format::sig9;
use crate::geometry::{Domain, GridIndex, Lattice, Position};
use crate::metrics::{ns_count, radial_distribution, RadialHistogram};
use crate::render::{render, PgmImage};
use crate::rng::RngState;
use crate::symmetry::{apply_rule, causality_guard, Deposit, DepositSource, GuardVerdict, RuleDescriptor};

/// Everything a run computes, before it is written anywhere.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub lattice: Lattice,
    pub ticks: usize,
    pub particles: Vec<Particle>,
    pub trajectories: Vec<Trajectory>,
    pub deposits: Vec<Deposit>,
}

impl Simulation {
    pub fn ns(&self) -> usize {
        ns_count(&self.deposits).0
    }

    pub fn histogram(&self, bins: usize) -> Result<RadialHistogram> {
        radial_distribution(&self.deposits, bins, &self.lattice)
    }

    /// Smallest and largest deposit distance from the origin.
    pub fn radius_range(&self) -> Option<(f64, f64)> {
        self.deposits.iter().map(|d| self.lattice.position(d.node).norm()).fold(None, |acc, r| match acc {
            None => Some((r, r)),
            Some((lo, hi)) => Some((lo.min(r), hi.max(r))),
        })
    }
}

/// Draws each particle's position (two draws) then heading (one draw), in id
/// order, then applies any fixed initial-condition overrides.
pub fn initial_particles(cfg: &SimConfig, rng: &mut RngState) -> Result<Vec<Particle>> {
    let dom = Domain::new(cfg.radius)?;
    (0..cfg.particles)
        .map(|id| {
            let sampled = rng.sample_disk(cfg.radius)?;
            let theta = TAU * rng.next_unit();
            let p0 = Position::new(cfg.x0.unwrap_or(sampled.x), cfg.y0.unwrap_or(sampled.y));
            if p0.norm().is_nan() || p0.norm() >= dom.radius() {
                return Err(Error::Infeasible(format!(
                    "particle {id} starts at ({}, {}), outside the open disk of radius {}",
                    p0.x, p0.y, cfg.radius
                )));
            }
            Ok(Particle { id, eq: MovementEquation { p0, theta0: cfg.theta0.unwrap_or(theta), v: cfg.speed } })
        })
        .collect()
}

pub fn simulate(cfg: &SimConfig) -> Result<Simulation> {
    if let Err((key, msg)) = cfg.validate() {
        return Err(Error::InvalidParameter(format!("{key} {msg}")));
    }
    if causality_guard(RuleDescriptor::symmetry(cfg.symmetry)) == GuardVerdict::Rejected {
        return Err(Error::InvalidParameter("rule would make the present depend on a future it changes".into()));
    }
    let dom = Domain::new(cfg.radius)?;
    let lattice = Lattice::new(cfg.scale, dom)?;
    let mut rng = RngState::new(cfg.seed);
    let particles = initial_particles(cfg, &mut rng)?;
    let ticks = tick_count(cfg.time, cfg.scale, cfg.speed);
    let dt = tick_duration(cfg.scale, cfg.speed);

    let trajectories = particles
        .par_iter()
        .map(|p| {
            let ideal = ideal_path(&p.eq, dom, ticks, dt)?;
            let start = lattice.snap_inside(ideal[0])?;
            quantize_trajectory(p.id, &ideal, start, &lattice)
        })
        .collect::<Result<Vec<_>>>()?;

    let index = build_visit_index(&trajectories)?;
    let deposits = apply_rule(&trajectories, &index, &cfg.rule(), &mut rng);
    Ok(Simulation { lattice, ticks, particles, trajectories, deposits })
}

/// `tick,particle,x,y,source` rows in canonical order.
pub fn deposits_csv(deposits: &[Deposit], lattice: &Lattice) -> String {
    let mut rows: Vec<&Deposit> = deposits.iter().collect();
    rows.sort_by_key(|d| (d.tick, d.particle, d.node));
    let mut out = String::from("tick,particle,x,y,source\n");
    for d in rows {
        let p = lattice.position(d.node);
        writeln!(out, "{},{},{},{},{}", d.tick, d.particle, sig9(p.x), sig9(p.y), d.source).unwrap();
    }
    out
}

/// Reads a deposits CSV back, snapping coordinates onto `lattice`.
pub fn parse_deposits_csv(text: &str, lattice: &Lattice) -> Result<Vec<Deposit>> {
    let mut lines = text.lines();
    match lines.next() {
        Some("tick,particle,x,y,source") => {}
        other => return Err(Error::InvalidInput(format!("unexpected deposits header {other:?}"))),
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, line)| {
            let bad = || Error::InvalidInput(format!("deposits row {}: `{line}`", n + 2));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(bad());
            }
            let x: f64 = f[2].parse().map_err(|_| bad())?;
            let y: f64 = f[3].parse().map_err(|_| bad())?;
            Ok(Deposit {
                tick: f[0].parse().map_err(|_| bad())?,
                particle: f[1].parse().map_err(|_| bad())?,
                node: lattice.snap(Position::new(x, y)),
                source: match f[4] {
                    "immediate" => DepositSource::Immediate,
                    "scheduled" => DepositSource::Scheduled,
                    _ => return Err(bad()),
                },
            })
        })
        .collect()
}

/// Distances from the origin of every row of a deposits CSV.
pub fn deposit_distances(text: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines();
    if lines.next() != Some("tick,particle,x,y,source") {
        return Err(Error::InvalidInput("missing deposits header".into()));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            let parse = |s: &str| s.parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad row `{line}`")));
            match f.as_slice() {
                [_, _, x, y, _] => Ok(Position::new(parse(x)?, parse(y)?).norm()),
                _ => Err(Error::InvalidInput(format!("bad row `{line}`"))),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub ns: usize,
    pub ticks: usize,
    pub particles: usize,
    pub wall_ms: u128,
}

impl std::fmt::Display for RunSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "NS={} K={} N={} wall_ms={}", self.ns, self.ticks, self.particles, self.wall_ms)
    }
}

#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub deposits_csv: PathBuf,
    pub histogram_csv: PathBuf,
    pub pattern_pgm: PathBuf,
    pub summary_csv: PathBuf,
    pub summary: RunSummary,
}

pub const DEPOSITS_FILE: &str = "deposits.csv";
pub const HISTOGRAM_FILE: &str = "histogram.csv";
pub const PATTERN_FILE: &str = "pattern.pgm";
pub const SUMMARY_FILE: &str = "summary.csv";

pub fn render_pattern(sim: &Simulation, cfg: &SimConfig) -> PgmImage {
    render(&sim.deposits, &sim.lattice, cfg.size, cfg.image_width)
}

/// Simulates `cfg` and writes the deposits, histogram, render and summary
/// into `out_dir`.
pub fn run(cfg: &SimConfig, out_dir: &Path) -> Result<RunArtifacts> {
    let started = Instant::now();
    let sim = simulate(cfg)?;
    fs::create_dir_all(out_dir)?;
    let deposits_csv = out_dir.join(DEPOSITS_FILE);
    let histogram_csv = out_dir.join(HISTOGRAM_FILE);
    let pattern_pgm = out_dir.join(PATTERN_FILE);
    let summary_csv = out_dir.join(SUMMARY_FILE);
    fs::write(&deposits_csv, deposits_csv_text(&sim))?;
    fs::write(&histogram_csv, sim.histogram(cfg.bins)?.to_csv())?;
    fs::write(&pattern_pgm, render_pattern(&sim, cfg).to_plain())?;
    let summary =
        RunSummary { ns: sim.ns(), ticks: sim.ticks, particles: cfg.particles, wall_ms: started.elapsed().as_millis() };
    fs::write(
        &summary_csv,
        format!("NS,K,N,wall_ms\n{},{},{},{}\n", summary.ns, summary.ticks, summary.particles, summary.wall_ms),
    )?;
    Ok(RunArtifacts { deposits_csv, histogram_csv, pattern_pgm, summary_csv, summary })
}

fn deposits_csv_text(sim: &Simulation) -> String {
    deposits_csv(&sim.deposits, &sim.lattice)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub param: String,
    pub seed: u64,
    pub ns: usize,
    pub radius_range: Option<(f64, f64)>,
    pub wall_ms: u128,
}

/// Runs every `(value, seed)` pair; rows follow the order of `values`, then
/// `seeds`, whatever order the runs finish in.
pub fn sweep(base: &SimConfig, key: &str, values: &[String], seeds: &[u64]) -> Result<Vec<SweepRow>> {
    let mut jobs = Vec::with_capacity(values.len() * seeds.len());
    for value in values {
        let mut cfg = base.clone();
        cfg.set(key, value).map_err(|msg| Error::Parse { line: 0, key: key.to_string(), msg })?;
        for &seed in seeds {
            jobs.push((value.clone(), seed, SimConfig { seed, ..cfg.clone() }));
        }
    }
    jobs.into_par_iter()
        .map(|(param, seed, cfg)| {
            let started = Instant::now();
            let sim = simulate(&cfg)?;
            Ok(SweepRow {
                param,
                seed,
                ns: sim.ns(),
                radius_range: sim.radius_range(),
                wall_ms: started.elapsed().as_millis(),
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("param,seed,NS,min_radius,max_radius,wall_ms\n");
    for row in rows {
        let (lo, hi) = row.radius_range.map_or((String::new(), String::new()), |(lo, hi)| (sig9(lo), sig9(hi)));
        writeln!(out, "{},{},{},{},{},{}", row.param, row.seed, row.ns, lo, hi, row.wall_ms).unwrap();
    }
    out
}

/// Node set of a deposit list.
pub fn deposit_nodes(deposits: &[Deposit]) -> std::collections::BTreeSet<GridIndex> {
    deposits.iter().map(|d| d.node).collect()
}
