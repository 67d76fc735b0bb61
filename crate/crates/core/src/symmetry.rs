//! Symmetry rules that look at every particle's present and future.
//!
//! A particle at node `g` on tick `t` is frozen into the pattern when the
//! images of `g` under the active symmetry are visited by some particle at a
//! tick `t' >= t`. Both ends of the correspondence are deposited. Motion is
//! never altered: the frozen copy stays behind while the particle keeps
//! following its own path.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::dynamics::{Trajectory, VisitIndex};
use crate::error::{Error, Result};
use crate::geometry::GridIndex;
use crate::rng::RngState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymmetryKind {
    /// Reflection about the y axis.
    MirrorY,
    /// Reflections about both axes and the point reflection through the origin.
    FourFold,
}

impl fmt::Display for SymmetryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymmetryKind::MirrorY => "mirror_y",
            SymmetryKind::FourFold => "fourfold",
        })
    }
}

impl FromStr for SymmetryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mirror_y" => Ok(SymmetryKind::MirrorY),
            "fourfold" => Ok(SymmetryKind::FourFold),
            other => Err(Error::InvalidInput(format!("unknown symmetry `{other}` (expected mirror_y or fourfold)"))),
        }
    }
}

/// Images of `g` under `kind`, deduplicated, never containing `g` itself.
pub fn orbit(g: GridIndex, kind: SymmetryKind) -> Vec<GridIndex> {
    let images: &[GridIndex] = match kind {
        SymmetryKind::MirrorY => &[GridIndex::new(-g.i, g.j)],
        SymmetryKind::FourFold => &[GridIndex::new(-g.i, g.j), GridIndex::new(g.i, -g.j), GridIndex::new(-g.i, -g.j)],
    };
    let mut out: Vec<GridIndex> = Vec::with_capacity(images.len());
    for &img in images {
        if img != g && !out.contains(&img) {
            out.push(img);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MatchEvent {
    pub particle: usize,
    pub tick: usize,
    pub partner: usize,
    pub partner_tick: usize,
    pub image_node: GridIndex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DepositSource {
    Immediate,
    Scheduled,
}

impl fmt::Display for DepositSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DepositSource::Immediate => "immediate",
            DepositSource::Scheduled => "scheduled",
        })
    }
}

/// A frozen pattern point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Deposit {
    pub node: GridIndex,
    pub tick: usize,
    pub particle: usize,
    pub source: DepositSource,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RuleConfig {
    pub kind: SymmetryKind,
    pub probability: f64,
    pub overrides: BTreeMap<usize, SymmetryKind>,
}

impl RuleConfig {
    pub fn new(kind: SymmetryKind) -> Self {
        Self { kind, probability: 1.0, overrides: BTreeMap::new() }
    }

    pub fn with_probability(mut self, probability: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&probability) {
            return Err(Error::InvalidParameter(format!("rule probability {probability} is outside [0, 1]")));
        }
        self.probability = probability;
        Ok(self)
    }

    pub fn kind_for(&self, particle: usize) -> SymmetryKind {
        self.overrides.get(&particle).copied().unwrap_or(self.kind)
    }
}

/// Correspondences certifying that particle `i` at node `g` on tick `t` is
/// symmetric. Empty when the rule does not fire.
///
/// Mirror-Y needs the single image visited at some `t' >= t`. Four-fold needs
/// every image visited; each event names the earliest such visit.
pub fn find_match(i: usize, t: usize, g: GridIndex, index: &VisitIndex, kind: SymmetryKind) -> Vec<MatchEvent> {
    let images = orbit(g, kind);
    let mut events = Vec::with_capacity(images.len());
    for image in images {
        let list = index.lookup(image);
        let from = list.partition_point(|v| v.tick < t);
        let Some(v) = list[from..].iter().find(|v| (v.particle, v.tick) != (i, t)) else {
            return Vec::new();
        };
        events.push(MatchEvent { particle: i, tick: t, partner: v.particle, partner_tick: v.tick, image_node: image });
    }
    events
}

/// Runs the rule over every `(tick, particle)` in ascending order and returns
/// the deduplicated deposits sorted by `(tick, particle, node)`.
///
/// When `cfg.probability < 1` each check consumes one draw from `rng`.
pub fn apply_rule(
    trajectories: &[Trajectory],
    index: &VisitIndex,
    cfg: &RuleConfig,
    rng: &mut RngState,
) -> Vec<Deposit> {
    let mut ordered: Vec<&Trajectory> = trajectories.iter().collect();
    ordered.sort_by_key(|t| t.particle);
    let ticks = ordered.first().map_or(0, |t| t.nodes.len());
    let gated = cfg.probability < 1.0;

    let mut found: BTreeMap<(usize, usize, GridIndex), DepositSource> = BTreeMap::new();
    for t in 0..ticks {
        for tr in &ordered {
            if gated && rng.next_unit() >= cfg.probability {
                continue;
            }
            let g = tr.nodes[t];
            let events = find_match(tr.particle, t, g, index, cfg.kind_for(tr.particle));
            if events.is_empty() {
                continue;
            }
            found.insert((t, tr.particle, g), DepositSource::Immediate);
            for e in events {
                found.entry((e.partner_tick, e.partner, e.image_node)).or_insert(DepositSource::Scheduled);
            }
        }
    }
    found
        .into_iter()
        .map(|((tick, particle, node), source)| Deposit { node, tick, particle, source })
        .collect()
}

/// Declared behaviour of a rule, checked for causal loops.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RuleDescriptor {
    pub reads_future: bool,
    pub modifies_motion: bool,
}

impl RuleDescriptor {
    pub fn symmetry(_kind: SymmetryKind) -> Self {
        Self { reads_future: true, modifies_motion: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GuardVerdict {
    Ok,
    Rejected,
}

/// A rule that both reads the future and steers particles could change the
/// very future it read, so it is rejected.
pub fn causality_guard(rule: RuleDescriptor) -> GuardVerdict {
    if rule.reads_future && rule.modifies_motion {
        GuardVerdict::Rejected
    } else {
        GuardVerdict::Ok
    }
}

/// Index-free reference implementations, used to cross-check the indexed
/// matcher and the deposit set.
pub mod oracle {
    use super::*;

    /// Scans every trajectory at every tick for the images of `g`.
    pub fn naive_find_match(
        i: usize,
        t: usize,
        g: GridIndex,
        trajectories: &[Trajectory],
        kind: SymmetryKind,
    ) -> Vec<MatchEvent> {
        let mut events = Vec::new();
        for image in orbit(g, kind) {
            let mut best: Option<(usize, usize)> = None;
            for tr in trajectories {
                for (tick, &node) in tr.nodes.iter().enumerate() {
                    if node != image || tick < t || (tr.particle, tick) == (i, t) {
                        continue;
                    }
                    if best.is_none_or(|b| (tick, tr.particle) < b) {
                        best = Some((tick, tr.particle));
                    }
                }
            }
            match best {
                Some((partner_tick, partner)) => {
                    events.push(MatchEvent { particle: i, tick: t, partner, partner_tick, image_node: image })
                }
                None => return Vec::new(),
            }
        }
        events
    }

    /// Checks every deposit against the trajectories: the particle really sits
    /// on the deposited node at that tick, and some orbit-complete set of
    /// visits certifies it (or it is the partner of such a set).
    pub fn deposits_are_sound(deposits: &[Deposit], trajectories: &[Trajectory], cfg: &RuleConfig) -> bool {
        let by_id: HashMap<usize, &Trajectory> = trajectories.iter().map(|t| (t.particle, t)).collect();
        deposits.iter().all(|dep| {
            let Some(tr) = by_id.get(&dep.particle) else { return false };
            if tr.nodes.get(dep.tick) != Some(&dep.node) {
                return false;
            }
            match dep.source {
                DepositSource::Immediate => {
                    !naive_find_match(dep.particle, dep.tick, dep.node, trajectories, cfg.kind_for(dep.particle))
                        .is_empty()
                }
                DepositSource::Scheduled => trajectories.iter().any(|other| {
                    let kind = cfg.kind_for(other.particle);
                    other.nodes.iter().enumerate().take(dep.tick + 1).any(|(t, &g)| {
                        orbit(g, kind).contains(&dep.node)
                            && !naive_find_match(other.particle, t, g, trajectories, kind).is_empty()
                    })
                }),
            }
        })
    }
}
