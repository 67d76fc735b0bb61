//! `key = value` run configuration.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::symmetry::{RuleConfig, SymmetryKind};

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    /// Movement time `T`.
    pub time: f64,
    /// Particle count `N`.
    pub particles: usize,
    /// Rendered particle size `S`, in pixels.
    pub size: u32,
    /// Lattice nodes per distance unit `D`.
    pub scale: f64,
    pub radius: f64,
    pub speed: f64,
    pub symmetry: SymmetryKind,
    pub rule_probability: f64,
    pub rule_overrides: BTreeMap<usize, SymmetryKind>,
    pub bins: usize,
    pub x0: Option<f64>,
    pub y0: Option<f64>,
    pub theta0: Option<f64>,
    pub image_width: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            time: 1.0,
            particles: 1,
            size: 1,
            scale: 1.0,
            radius: 1.0,
            speed: 1.0,
            symmetry: SymmetryKind::MirrorY,
            rule_probability: 1.0,
            rule_overrides: BTreeMap::new(),
            bins: 50,
            x0: None,
            y0: None,
            theta0: None,
            image_width: 800,
        }
    }
}

const REQUIRED: [&str; 4] = ["T", "N", "D", "symmetry"];

impl SimConfig {
    pub fn rule(&self) -> RuleConfig {
        RuleConfig {
            kind: self.symmetry,
            probability: self.rule_probability,
            overrides: self.rule_overrides.clone(),
        }
    }

    /// Sets one key from its textual value. `x0` and `y0` accept an `r`
    /// suffix (`0.4r`); `theta0` accepts a `pi` suffix (`0.5pi`).
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "seed" => self.seed = parse_num(value)?,
            "T" => self.time = parse_num(value)?,
            "N" => self.particles = parse_num(value)?,
            "S" => self.size = parse_num(value)?,
            "D" => self.scale = parse_num(value)?,
            "r" => self.radius = parse_num(value)?,
            "v" => self.speed = parse_num(value)?,
            "symmetry" => self.symmetry = value.parse().map_err(|e: Error| e.to_string())?,
            "rule_probability" => self.rule_probability = parse_num(value)?,
            "bins" => self.bins = parse_num(value)?,
            "image_width" => self.image_width = parse_num(value)?,
            "x0" => self.x0 = Some(parse_length(value, self.radius)?),
            "y0" => self.y0 = Some(parse_length(value, self.radius)?),
            "theta0" => self.theta0 = Some(parse_angle(value)?),
            _ => {
                let Some(id) = key.strip_prefix("rule_override.") else {
                    return Err("unknown key".into());
                };
                let id: usize = id.parse().map_err(|_| format!("`{id}` is not a particle id"))?;
                let kind = value.parse().map_err(|e: Error| e.to_string())?;
                self.rule_overrides.insert(id, kind);
            }
        }
        Ok(())
    }

    /// Checks every range constraint, naming the first offending key.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        let checks: [(&'static str, bool, &str); 9] = [
            ("T", self.time > 0.0 && self.time.is_finite(), "must be positive"),
            ("N", self.particles >= 1, "must be at least 1"),
            ("S", self.size >= 1, "must be at least 1"),
            ("D", self.scale >= 1.0 && self.scale.is_finite(), "must be at least 1"),
            ("r", self.radius > 0.0 && self.radius.is_finite(), "must be positive"),
            ("v", self.speed > 0.0 && self.speed.is_finite(), "must be positive"),
            ("rule_probability", (0.0..=1.0).contains(&self.rule_probability), "must lie in [0, 1]"),
            ("bins", self.bins >= 1, "must be at least 1"),
            ("image_width", self.image_width >= 16, "must be at least 16"),
        ];
        match checks.into_iter().find(|(_, ok, _)| !ok) {
            Some((key, _, msg)) => Err((key, msg.to_string())),
            None => Ok(()),
        }
    }
}

fn parse_num<T: std::str::FromStr>(value: &str) -> std::result::Result<T, String> {
    value.parse().map_err(|_| format!("malformed value `{value}`"))
}

fn parse_length(value: &str, radius: f64) -> std::result::Result<f64, String> {
    match value.strip_suffix('r') {
        Some(k) => Ok(parse_num::<f64>(k)? * radius),
        None => parse_num(value),
    }
}

fn parse_angle(value: &str) -> std::result::Result<f64, String> {
    match value.strip_suffix("pi") {
        Some("") => Ok(PI),
        Some(k) => Ok(parse_num::<f64>(k.trim_end_matches('*'))? * PI),
        None => parse_num(value),
    }
}

/// Parses line-based `key = value` text; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    let mut cfg = SimConfig::default();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    // r must be known before x0 / y0 resolve their `r` suffix
    let mut deferred: Vec<(usize, String, String)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse { line: line_no, key: line.to_string(), msg: "expected `key = value`".into() });
        };
        let (key, value) = (key.trim().to_string(), value.trim().to_string());
        if let Some(prev) = seen.insert(key.clone(), line_no) {
            return Err(Error::Parse { line: line_no, key, msg: format!("duplicate of line {prev}") });
        }
        if key == "x0" || key == "y0" {
            deferred.push((line_no, key, value));
            continue;
        }
        cfg.set(&key, &value).map_err(|msg| Error::Parse { line: line_no, key: key.clone(), msg })?;
    }
    for (line_no, key, value) in deferred {
        cfg.set(&key, &value).map_err(|msg| Error::Parse { line: line_no, key: key.clone(), msg })?;
    }
    if let Some(missing) = REQUIRED.iter().find(|k| !seen.contains_key(**k)) {
        return Err(Error::Parse { line: 0, key: missing.to_string(), msg: "required key is missing".into() });
    }
    cfg.validate().map_err(|(key, msg)| Error::Parse {
        line: seen.get(key).copied().unwrap_or(0),
        key: key.to_string(),
        msg,
    })?;
    Ok(cfg)
}
