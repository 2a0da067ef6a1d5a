//! Path simulation and first-passage outcomes.
//!
//! Finite-activity triplets without a Brownian part are simulated exactly by
//! the event-driven engine: Poisson jump times, linear motion in between.
//! Anything with a diffusion or a tail goes through the grid engine, which
//! places finite-activity jumps at their exact times and corrects for
//! crossings between grid points with the Brownian-bridge probability.

mod event;
mod grid;

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{validate_triplet, Atom, Cutoff, JumpMeasure, LevyTriplet, Side, Window};
use crate::scalar::Scalar;

pub(crate) use event::EventModel;
pub(crate) use grid::GridModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub seed: u64,
    pub horizon: f64,
    pub dt: f64,
    pub bridge_correction: bool,
    pub small_jump_eps: Option<f64>,
    pub gaussian_substitution: bool,
    /// Thread count for replicate fan-out. Has no effect on results.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            horizon: 100.0,
            dt: 1e-3,
            bridge_correction: true,
            small_jump_eps: None,
            gaussian_substitution: false,
            workers: None,
        }
    }
}

impl SimConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            out.push("horizon must be finite and > 0".to_string());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            out.push("dt must be finite and > 0".to_string());
        }
        if let Some(eps) = self.small_jump_eps {
            if !(eps > 0.0 && eps.is_finite()) {
                out.push("small_jump_eps must be finite and > 0".to_string());
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.problems();
        if p.is_empty() {
            Ok(())
        } else {
            Err(invalid(p.join("; ")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Start,
    Jump,
    Grid,
}

impl RecordKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RecordKind::Start => "start",
            RecordKind::Jump => "jump",
            RecordKind::Grid => "grid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub time: f64,
    pub value: f64,
    /// Left limit `X(t-)`; differs from `value` only on jump records.
    pub left: f64,
    pub kind: RecordKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    EventDriven,
    Grid,
}

impl Engine {
    pub fn for_triplet(t: &LevyTriplet) -> Engine {
        if t.sigma2.is_zero() && t.jumps.tail.is_none() {
            Engine::EventDriven
        } else {
            Engine::Grid
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSkeleton {
    pub records: Vec<PathRecord>,
    pub engine: Engine,
    pub horizon: f64,
    /// Slope between records for event-driven skeletons.
    pub slope: f64,
}

impl PathSkeleton {
    /// Value at time `t` reconstructed from an event-driven skeleton.
    pub fn value_at(&self, t: f64) -> f64 {
        let idx = self.records.partition_point(|r| r.time <= t);
        let r = &self.records[idx.saturating_sub(1)];
        r.value + self.slope * (t - r.time)
    }

    pub fn jump_count(&self) -> usize {
        self.records.iter().filter(|r| r.kind == RecordKind::Jump).count()
    }

    /// `time,value,kind` CSV dump.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,value,kind\n");
        for r in &self.records {
            let _ = writeln!(out, "{},{},{}", r.time, r.value, r.kind.as_str());
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum PassageResult {
    Crossed { time: f64, position: f64, overshoot: f64 },
    Censored { horizon: f64, terminal_value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassageOutcome {
    pub level: f64,
    pub strict: bool,
    pub result: PassageResult,
}

impl PassageOutcome {
    pub(crate) fn crossed(level: f64, strict: bool, time: f64, position: f64) -> Self {
        Self {
            level,
            strict,
            result: PassageResult::Crossed {
                time,
                position,
                overshoot: position - level,
            },
        }
    }

    pub(crate) fn censored(level: f64, strict: bool, horizon: f64, terminal_value: f64) -> Self {
        Self {
            level,
            strict,
            result: PassageResult::Censored {
                horizon,
                terminal_value,
            },
        }
    }

    pub fn position(&self) -> Option<f64> {
        match self.result {
            PassageResult::Crossed { position, .. } => Some(position),
            PassageResult::Censored { .. } => None,
        }
    }

    pub fn is_crossed(&self) -> bool {
        self.position().is_some()
    }
}

/// Passage at time zero: `T_x = 0` for `x <= 0`, and `T^_x = 0` for `x < 0`.
pub(crate) fn immediate_passage(level: f64, strict: bool) -> Option<PassageOutcome> {
    let now = if strict { level < 0.0 } else { level <= 0.0 };
    now.then(|| PassageOutcome::crossed(level, strict, 0.0, 0.0))
}

#[inline]
pub(crate) fn reaches(value: f64, level: f64, strict: bool) -> bool {
    if strict {
        value > level
    } else {
        value >= level
    }
}

/// A triplet prepared for repeated simulation.
#[derive(Debug, Clone)]
pub enum Simulator {
    EventDriven(EventModel),
    Grid(GridModel),
}

impl Simulator {
    pub fn new(t: &LevyTriplet, cfg: &SimConfig) -> Result<Self> {
        validate_triplet(t).into_result()?;
        cfg.validate()?;
        Ok(match Engine::for_triplet(t) {
            Engine::EventDriven => Simulator::EventDriven(EventModel::new(t, cfg.horizon)?),
            Engine::Grid => Simulator::Grid(GridModel::new(t, cfg)?),
        })
    }

    pub fn engine(&self) -> Engine {
        match self {
            Simulator::EventDriven(_) => Engine::EventDriven,
            Simulator::Grid(_) => Engine::Grid,
        }
    }

    pub fn path<R: Rng + ?Sized>(&self, rng: &mut R) -> PathSkeleton {
        match self {
            Simulator::EventDriven(m) => m.path(rng),
            Simulator::Grid(m) => m.path(rng),
        }
    }

    pub fn passage<R: Rng + ?Sized>(&self, level: f64, strict: bool, rng: &mut R) -> PassageOutcome {
        if let Some(out) = immediate_passage(level, strict) {
            return out;
        }
        match self {
            Simulator::EventDriven(m) => m.passage(level, strict, rng),
            Simulator::Grid(m) => m.passage(level, strict, rng),
        }
    }

    /// Grid step for grid engines; `None` when paths are exact.
    pub fn resolution(&self) -> Option<(f64, f64)> {
        match self {
            Simulator::EventDriven(_) => None,
            Simulator::Grid(m) => Some((m.sigma(), m.dt())),
        }
    }
}

pub fn simulate_event_driven<R: Rng + ?Sized>(t: &LevyTriplet, cfg: &SimConfig, rng: &mut R) -> Result<PathSkeleton> {
    validate_triplet(t).into_result()?;
    cfg.validate()?;
    Ok(EventModel::new(t, cfg.horizon)?.path(rng))
}

pub fn simulate_grid<R: Rng + ?Sized>(t: &LevyTriplet, cfg: &SimConfig, rng: &mut R) -> Result<PathSkeleton> {
    validate_triplet(t).into_result()?;
    cfg.validate()?;
    Ok(GridModel::new(t, cfg)?.path(rng))
}

pub fn run_to_passage<R: Rng + ?Sized>(
    t: &LevyTriplet,
    level: f64,
    strict: bool,
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<PassageOutcome> {
    if let Some(out) = immediate_passage(level, strict) {
        validate_triplet(t).into_result()?;
        return Ok(out);
    }
    Ok(Simulator::new(t, cfg)?.passage(level, strict, rng))
}

/// Largest upward jump of the running supremum along the skeleton.
pub fn supremum_jump_diagnostic(p: &PathSkeleton) -> f64 {
    let mut running_max = f64::NEG_INFINITY;
    let mut biggest: f64 = 0.0;
    for r in &p.records {
        match r.kind {
            RecordKind::Jump => {
                let before = running_max.max(r.left);
                biggest = biggest.max(r.value - before);
                running_max = before.max(r.value);
            }
            RecordKind::Start | RecordKind::Grid => {
                running_max = running_max.max(r.left).max(r.value);
            }
        }
    }
    biggest
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// Everything except the positive jumps larger than the threshold.
    pub small: LevyTriplet,
    /// Positive jumps larger than the threshold.
    pub big: JumpMeasure,
    /// Total rate of `big`; its first jump time is `Exp(beta)`.
    pub beta: f64,
}

/// Splits off the positive jumps exceeding `a` as an independent compound
/// Poisson part.
pub fn decompose_jumps(t: &LevyTriplet, a: f64) -> Result<Decomposition> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid(format!("decomposition threshold must be > 0, got {a}")));
    }
    validate_triplet(t).into_result()?;

    let (big_atoms, small_atoms): (Vec<Atom>, Vec<Atom>) =
        t.jumps.atoms.iter().cloned().partition(|at| at.size.value() > a);
    let big_tail = t
        .jumps
        .tail
        .as_ref()
        .map(|tail| {
            tail.with_window(Side::Positive, tail.pos.intersect(a, f64::INFINITY))
                .with_window(Side::Negative, Window::EMPTY)
        })
        .filter(|tail| tail.total_mass() > 0.0);
    let small_tail = t
        .jumps
        .tail
        .as_ref()
        .map(|tail| tail.with_window(Side::Positive, tail.pos.intersect(0.0, a)));

    let mut beta: f64 = big_atoms.iter().map(|at| at.rate.value()).sum();
    if let Some(tail) = &big_tail {
        beta += tail.total_mass();
    }

    // Under the unit-ball cutoff the big jumps in (a, 1] were compensated by
    // the original drift; the remainder must carry that compensation itself.
    let drift = match t.cutoff {
        Cutoff::Zero => t.drift.clone(),
        Cutoff::UnitBall => {
            let mut comp = Scalar::zero();
            for at in &big_atoms {
                if at.size.value() <= 1.0 {
                    comp = comp.add(&at.size.mul(&at.rate));
                }
            }
            if let (Some(tail), true) = (&t.jumps.tail, a < 1.0) {
                comp = comp.add(&Scalar::from_f64(tail.first_moment(Side::Positive, a, 1.0)));
            }
            t.drift.sub(&comp)
        }
    };

    Ok(Decomposition {
        small: LevyTriplet {
            sigma2: t.sigma2.clone(),
            jumps: JumpMeasure {
                atoms: small_atoms,
                tail: small_tail,
            },
            drift,
            cutoff: t.cutoff,
        },
        big: JumpMeasure {
            atoms: big_atoms,
            tail: big_tail,
        },
        beta,
    })
}

pub(crate) fn wrong_engine(msg: impl Into<String>) -> Error {
    Error::WrongEngine(msg.into())
}
