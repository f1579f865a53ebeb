//! Scenario configuration in a flat `key = value` text format.
//!
//! One assignment per line, `#` starts a comment, keys use dotted section
//! prefixes (`mpc.kp`, `fuzzy.gain`, ...). Omitted keys keep their defaults;
//! unknown keys and bad values are errors and are all reported together.
//! [`ScenarioConfig::to_text`] writes every key and reads back unchanged.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::linalg::{Mat4, Vec4};
use crate::mpc::{ControllerKind, ErrorChannels, MpcConfig, ReferenceMode};
use crate::optimizer::SolverSettings;
use crate::plant::{CoeffSet, DisturbanceKind, DisturbanceSpec, PlantParams};
use crate::reference::ReferenceSpec;

use super::HarnessError;

/// Fuzzy model layout, adaptation and initialisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzyConfig {
    /// Membership functions per state.
    pub counts: [usize; 4],
    /// Interval spanned by the membership centers of each state.
    pub ranges: [(f64, f64); 4],
    /// Adaptation gain `γ`.
    pub gain: f64,
    pub g_floor: f64,
    pub channels: ErrorChannels,
    /// Parameter magnitude treated as a blow-up.
    pub bound: f64,
    /// The initial least-squares fit samples this fraction of each range.
    pub fit_fraction: f64,
    /// Fit samples per state (the fit uses `fit_points⁴` samples).
    pub fit_points: usize,
}

impl Default for FuzzyConfig {
    fn default() -> Self {
        Self {
            counts: [3, 3, 3, 3],
            ranges: [(-20.0, 20.0), (-40.0, 40.0), (-1.0, 1.0), (-5.0, 5.0)],
            gain: 8.0,
            g_floor: crate::fuzzy::DEFAULT_G_FLOOR,
            channels: ErrorChannels::Pendulum,
            bound: 1e6,
            fit_fraction: 0.7,
            fit_points: 9,
        }
    }
}

/// Everything needed to run one closed loop.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub plant: PlantParams,
    pub controller: ControllerKind,
    pub mpc: MpcConfig,
    pub reference_mode: ReferenceMode,
    pub solver: SolverSettings,
    pub fuzzy: FuzzyConfig,
    /// Hurwitz matrix of the error dynamics used for `P`.
    pub lyapunov_a: Mat4,
    /// `Q = lyapunov_q · I`.
    pub lyapunov_q: f64,
    pub reference: ReferenceSpec,
    pub disturbance: DisturbanceSpec,
    /// Per-coefficient factors applied to the true coefficients to get the
    /// controller's model.
    pub mismatch: CoeffSet,
    pub initial: Vec4,
    /// Simulated time (s).
    pub duration: f64,
    /// Plant integration step (s).
    pub dt: f64,
    pub seed: u64,
    /// Write measured solve times to the CSV. Off by default so that logs
    /// are byte-reproducible.
    pub record_timing: bool,
}

/// Companion-form error dynamics with characteristic polynomial
/// `s⁴ + 7s³ + 10s² + 20.5s + 17.2`.
pub fn default_lyapunov_a() -> Mat4 {
    Mat4::new(
        0.0, 1.0, 0.0, 0.0, //
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        -17.2, -20.5, -10.0, -7.0,
    )
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            plant: PlantParams::default(),
            controller: ControllerKind::Adaptive,
            mpc: MpcConfig::default(),
            reference_mode: ReferenceMode::Inversion,
            solver: SolverSettings::default(),
            fuzzy: FuzzyConfig::default(),
            lyapunov_a: default_lyapunov_a(),
            lyapunov_q: 500.0,
            reference: ReferenceSpec::Sinusoid {
                amplitude: 0.1,
                frequency: 0.2,
            },
            disturbance: DisturbanceSpec::default(),
            mismatch: CoeffSet {
                a3: 1.2,
                ..CoeffSet::unit()
            },
            initial: Vec4::new(0.0, 0.0, 0.3, 0.0),
            duration: 10.0,
            dt: 1e-3,
            seed: 0,
            record_timing: false,
        }
    }
}

const STATE_NAMES: [&str; 4] = ["theta", "theta_dot", "alpha", "alpha_dot"];

fn list<T: Display>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

/// Four diagonal entries when `q` is diagonal, otherwise all 16 row-major.
fn weight_text(q: &Mat4) -> String {
    if *q == Mat4::from_diagonal(&q.diagonal()) {
        list(q.diagonal().iter())
    } else {
        list(q.transpose().iter())
    }
}

fn parse_list<T: FromStr>(value: &str, len: usize) -> Result<Vec<T>, String> {
    let items: Vec<&str> = value.split(',').map(str::trim).collect();
    if items.len() != len {
        return Err(format!("expected {len} comma-separated values, got {}", items.len()));
    }
    items
        .iter()
        .map(|s| s.parse().map_err(|_| format!("cannot parse {s:?}")))
        .collect()
}

fn parse_one<T: FromStr>(value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("cannot parse {value:?}"))
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got {value:?}")),
    }
}

/// Reference fields are kept flat in the file and assembled afterwards.
#[derive(Debug, Clone, Copy)]
struct ReferenceFields {
    kind: &'static str,
    amplitude: f64,
    frequency: f64,
    time: f64,
}

impl ReferenceFields {
    fn from_spec(spec: &ReferenceSpec) -> Self {
        let mut out = Self {
            kind: spec.kind_name(),
            amplitude: 0.0,
            frequency: 0.2,
            time: 0.0,
        };
        match *spec {
            ReferenceSpec::Zero => {}
            ReferenceSpec::Step { amplitude, time } => {
                out.amplitude = amplitude;
                out.time = time;
            }
            ReferenceSpec::Sinusoid { amplitude, frequency } => {
                out.amplitude = amplitude;
                out.frequency = frequency;
            }
        }
        out
    }

    fn to_spec(self) -> ReferenceSpec {
        match self.kind {
            "step" => ReferenceSpec::Step {
                amplitude: self.amplitude,
                time: self.time,
            },
            "sinusoid" => ReferenceSpec::Sinusoid {
                amplitude: self.amplitude,
                frequency: self.frequency,
            },
            _ => ReferenceSpec::Zero,
        }
    }
}

impl ScenarioConfig {
    /// Every key with its current value, in file order.
    pub fn entries(&self) -> Vec<(String, String)> {
        let p = &self.plant;
        let m = &self.mpc;
        let s = &self.solver;
        let f = &self.fuzzy;
        let r = ReferenceFields::from_spec(&self.reference);
        let d = &self.disturbance;
        let k = &self.mismatch;
        let mut out: Vec<(String, String)> = vec![
            ("plant.m1".into(), p.m1.to_string()),
            ("plant.k1".into(), p.k1.to_string()),
            ("plant.a_p".into(), p.a_p.to_string()),
            ("plant.j1".into(), p.j1.to_string()),
            ("plant.g".into(), p.g.to_string()),
            ("plant.l1".into(), p.l1.to_string()),
            ("plant.c1".into(), p.c1.to_string()),
            ("plant.k_p".into(), p.k_p.to_string()),
            ("controller".into(), self.controller.name().into()),
            ("mpc.kp".into(), m.kp.to_string()),
            ("mpc.kc".into(), m.kc.to_string()),
            ("mpc.q".into(), weight_text(&m.q)),
            ("mpc.r".into(), m.r.to_string()),
            ("mpc.u_max".into(), m.u_max.to_string()),
            ("mpc.period".into(), m.period.to_string()),
            ("mpc.substeps".into(), m.substeps.to_string()),
            ("mpc.reference".into(), self.reference_mode.name().into()),
            ("solver.kkt_tolerance".into(), s.kkt_tolerance.to_string()),
            ("solver.max_iterations".into(), s.max_iterations.to_string()),
            ("solver.fd_step".into(), s.finite_difference_step.to_string()),
            ("solver.hessian_reset".into(), s.hessian_reset_threshold.to_string()),
            ("solver.elastic_penalty".into(), s.elastic_penalty.to_string()),
            ("fuzzy.counts".into(), list(f.counts)),
        ];
        for (name, (lo, hi)) in STATE_NAMES.iter().zip(f.ranges) {
            out.push((format!("fuzzy.range.{name}"), list([lo, hi])));
        }
        out.extend([
            ("fuzzy.gain".into(), f.gain.to_string()),
            ("fuzzy.g_floor".into(), f.g_floor.to_string()),
            ("fuzzy.error".into(), f.channels.name().into()),
            ("fuzzy.bound".into(), f.bound.to_string()),
            ("fuzzy.fit_fraction".into(), f.fit_fraction.to_string()),
            ("fuzzy.fit_points".into(), f.fit_points.to_string()),
            ("lyapunov.a".into(), list(self.lyapunov_a.transpose().iter())),
            ("lyapunov.q".into(), self.lyapunov_q.to_string()),
            ("reference.kind".into(), r.kind.into()),
            ("reference.amplitude".into(), r.amplitude.to_string()),
            ("reference.frequency".into(), r.frequency.to_string()),
            ("reference.time".into(), r.time.to_string()),
            ("disturbance.kind".into(), d.kind.name().into()),
            ("disturbance.amplitude".into(), d.amplitude.to_string()),
            ("disturbance.frequency".into(), d.frequency.to_string()),
            ("mismatch.a1".into(), k.a1.to_string()),
            ("mismatch.a2".into(), k.a2.to_string()),
            ("mismatch.a3".into(), k.a3.to_string()),
            ("mismatch.a4".into(), k.a4.to_string()),
            ("mismatch.b1".into(), k.b1.to_string()),
            ("mismatch.b2".into(), k.b2.to_string()),
        ]);
        for (i, name) in STATE_NAMES.iter().enumerate() {
            out.push((format!("initial.{name}"), self.initial[i].to_string()));
        }
        out.extend([
            ("sim.duration".into(), self.duration.to_string()),
            ("sim.dt".into(), self.dt.to_string()),
            ("sim.seed".into(), self.seed.to_string()),
            ("output.timing".into(), self.record_timing.to_string()),
        ]);
        out
    }

    /// The full configuration in the file format.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# afmpc scenario configuration\n");
        let mut section = String::new();
        for (key, value) in self.entries() {
            let head = match key.split_once('.') {
                Some((h, _)) => h.to_string(),
                None => String::new(),
            };
            if head != section {
                out.push('\n');
            }
            section = head;
            out.push_str(&format!("{key} = {value}\n"));
        }
        out
    }

    fn assign(&mut self, key: &str, value: &str, reference: &mut ReferenceFields) -> Result<(), String> {
        let p = &mut self.plant;
        let m = &mut self.mpc;
        let s = &mut self.solver;
        let f = &mut self.fuzzy;
        let k = &mut self.mismatch;
        match key {
            "plant.m1" => p.m1 = parse_one(value)?,
            "plant.k1" => p.k1 = parse_one(value)?,
            "plant.a_p" => p.a_p = parse_one(value)?,
            "plant.j1" => p.j1 = parse_one(value)?,
            "plant.g" => p.g = parse_one(value)?,
            "plant.l1" => p.l1 = parse_one(value)?,
            "plant.c1" => p.c1 = parse_one(value)?,
            "plant.k_p" => p.k_p = parse_one(value)?,
            "controller" => {
                self.controller =
                    ControllerKind::parse(value).ok_or_else(|| format!("expected classical or afmpc, got {value:?}"))?
            }
            "mpc.kp" => m.kp = parse_one(value)?,
            "mpc.kc" => m.kc = parse_one(value)?,
            "mpc.q" => {
                let n = value.split(',').count();
                let v: Vec<f64> = parse_list(value, if n == 4 { 4 } else { 16 })?;
                m.q = if n == 4 {
                    Mat4::from_diagonal(&Vec4::from_column_slice(&v))
                } else {
                    Mat4::from_row_slice(&v)
                };
            }
            "mpc.r" => m.r = parse_one(value)?,
            "mpc.u_max" => m.u_max = parse_one(value)?,
            "mpc.period" => m.period = parse_one(value)?,
            "mpc.substeps" => m.substeps = parse_one(value)?,
            "mpc.reference" => {
                self.reference_mode =
                    ReferenceMode::parse(value).ok_or_else(|| format!("expected output or inversion, got {value:?}"))?
            }
            "solver.kkt_tolerance" => s.kkt_tolerance = parse_one(value)?,
            "solver.max_iterations" => s.max_iterations = parse_one(value)?,
            "solver.fd_step" => s.finite_difference_step = parse_one(value)?,
            "solver.hessian_reset" => s.hessian_reset_threshold = parse_one(value)?,
            "solver.elastic_penalty" => s.elastic_penalty = parse_one(value)?,
            "fuzzy.counts" => {
                let v: Vec<usize> = parse_list(value, 4)?;
                f.counts.copy_from_slice(&v);
            }
            "fuzzy.gain" => f.gain = parse_one(value)?,
            "fuzzy.g_floor" => f.g_floor = parse_one(value)?,
            "fuzzy.error" => {
                f.channels =
                    ErrorChannels::parse(value).ok_or_else(|| format!("expected pendulum or full, got {value:?}"))?
            }
            "fuzzy.bound" => f.bound = parse_one(value)?,
            "fuzzy.fit_fraction" => f.fit_fraction = parse_one(value)?,
            "fuzzy.fit_points" => f.fit_points = parse_one(value)?,
            "lyapunov.a" => self.lyapunov_a = Mat4::from_row_slice(&parse_list::<f64>(value, 16)?),
            "lyapunov.q" => self.lyapunov_q = parse_one(value)?,
            "reference.kind" => {
                reference.kind = match value {
                    "zero" => "zero",
                    "step" => "step",
                    "sinusoid" => "sinusoid",
                    _ => return Err(format!("expected zero, step or sinusoid, got {value:?}")),
                }
            }
            "reference.amplitude" => reference.amplitude = parse_one(value)?,
            "reference.frequency" => reference.frequency = parse_one(value)?,
            "reference.time" => reference.time = parse_one(value)?,
            "disturbance.kind" => {
                self.disturbance.kind = DisturbanceKind::parse(value)
                    .ok_or_else(|| format!("expected none, constant, sinusoid or noise, got {value:?}"))?
            }
            "disturbance.amplitude" => self.disturbance.amplitude = parse_one(value)?,
            "disturbance.frequency" => self.disturbance.frequency = parse_one(value)?,
            "mismatch.a1" => k.a1 = parse_one(value)?,
            "mismatch.a2" => k.a2 = parse_one(value)?,
            "mismatch.a3" => k.a3 = parse_one(value)?,
            "mismatch.a4" => k.a4 = parse_one(value)?,
            "mismatch.b1" => k.b1 = parse_one(value)?,
            "mismatch.b2" => k.b2 = parse_one(value)?,
            "sim.duration" => self.duration = parse_one(value)?,
            "sim.dt" => self.dt = parse_one(value)?,
            "sim.seed" => self.seed = parse_one(value)?,
            "output.timing" => self.record_timing = parse_bool(value)?,
            _ => {
                let Some(name) = key
                    .strip_prefix("fuzzy.range.")
                    .or_else(|| key.strip_prefix("initial."))
                else {
                    return Err("unknown key".into());
                };
                let Some(i) = STATE_NAMES.iter().position(|s| *s == name) else {
                    return Err("unknown key".into());
                };
                if key.starts_with("initial.") {
                    self.initial[i] = parse_one(value)?;
                } else {
                    let v: Vec<f64> = parse_list(value, 2)?;
                    f.ranges[i] = (v[0], v[1]);
                }
            }
        }
        Ok(())
    }

    /// Parses configuration text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut cfg = Self::default();
        let mut reference = ReferenceFields::from_spec(&cfg.reference);
        let mut errors = Vec::new();
        let mut seen = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                errors.push(format!("line {}: expected `key = value`", n + 1));
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            if let Some(first) = seen.insert(key.to_string(), n + 1) {
                errors.push(format!("line {}: `{key}` already set on line {first}", n + 1));
                continue;
            }
            if let Err(e) = cfg.assign(key, value, &mut reference) {
                errors.push(format!("line {}: `{key}`: {e}", n + 1));
            }
        }
        cfg.reference = reference.to_spec();
        if errors.is_empty() {
            errors = cfg.violations();
        }
        if errors.is_empty() {
            Ok(cfg)
        } else {
            Err(HarnessError::Config(errors))
        }
    }

    /// Reads and parses a config file. An unreadable file is a config
    /// error, not an I/O error: it is the user's input that is wrong.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
        Self::parse(&text)
    }

    /// Every violated invariant.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Err(e) = self.plant.validate() {
            out.push(e.to_string());
        }
        out.extend(self.mpc.violations());
        let s = &self.solver;
        if !(s.kkt_tolerance > 0.0 && s.finite_difference_step > 0.0 && s.elastic_penalty > 0.0) {
            out.push("solver tolerances, steps and penalties must be positive".into());
        }
        if s.max_iterations == 0 {
            out.push("solver.max_iterations must be at least 1".into());
        }
        let f = &self.fuzzy;
        if f.counts.iter().any(|&c| c == 0 || c > crate::fuzzy::MAX_MFS_PER_STATE) {
            out.push(format!(
                "fuzzy.counts must lie in 1..={}",
                crate::fuzzy::MAX_MFS_PER_STATE
            ));
        }
        for (name, (lo, hi)) in STATE_NAMES.iter().zip(f.ranges) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                out.push(format!("fuzzy.range.{name} must be a finite interval lo < hi"));
            }
        }
        if !(f.gain.is_finite() && f.gain > 0.0) {
            out.push(format!("fuzzy.gain must be positive, got {}", f.gain));
        }
        if !(f.g_floor.is_finite() && f.g_floor > 0.0) {
            out.push(format!("fuzzy.g_floor must be positive, got {}", f.g_floor));
        }
        if !(f.bound > 0.0) {
            out.push("fuzzy.bound must be positive".into());
        }
        if !(f.fit_fraction > 0.0 && f.fit_fraction <= 1.0) {
            out.push(format!("fuzzy.fit_fraction must lie in (0, 1], got {}", f.fit_fraction));
        }
        if f.fit_points < 2 {
            out.push("fuzzy.fit_points must be at least 2".into());
        }
        if !(self.lyapunov_q.is_finite() && self.lyapunov_q > 0.0) {
            out.push(format!("lyapunov.q must be positive, got {}", self.lyapunov_q));
        }
        if !self.lyapunov_a.iter().all(|v| v.is_finite()) {
            out.push("lyapunov.a must be finite".into());
        } else if self.controller == ControllerKind::Adaptive {
            let q = Mat4::identity() * self.lyapunov_q;
            if let Err(e) = crate::linalg::solve_lyapunov(&self.lyapunov_a, &q) {
                out.push(format!("lyapunov.a must be Hurwitz: {e}"));
            }
        }
        if let Err(e) = self.reference.validate() {
            out.push(e);
        }
        if let Err(e) = crate::plant::Disturbance::new(self.disturbance) {
            out.push(e.to_string());
        }
        let k = &self.mismatch;
        if ![k.a1, k.a2, k.a3, k.a4, k.b1, k.b2].iter().all(|v| v.is_finite()) {
            out.push("mismatch factors must be finite".into());
        }
        if !self.initial.iter().all(|v| v.is_finite()) {
            out.push("initial state must be finite".into());
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            out.push(format!("sim.duration must be positive, got {}", self.duration));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            out.push(format!("sim.dt must be positive, got {}", self.dt));
        } else if self.dt > self.mpc.period {
            out.push("sim.dt must not exceed mpc.period".into());
        }
        out
    }
}
