use rand::Rng;
use rand::distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Exp1};

use super::{reaches, wrong_engine, Engine, PassageOutcome, PathRecord, PathSkeleton, RecordKind};
use crate::error::Result;
use crate::model::{lattice_spacing, LevyTriplet};

/// Exact simulator for finite-activity triplets without a Brownian part.
#[derive(Debug, Clone)]
pub struct EventModel {
    rate: f64,
    sizes: Vec<f64>,
    chooser: WeightedIndex<f64>,
    slope: f64,
    /// `(h, multiples)` when positions are tracked as integers.
    lattice: Option<(f64, Vec<i64>)>,
    horizon: f64,
}

/// Position, kept as an exact lattice index when possible.
#[derive(Debug, Clone, Copy)]
struct Position {
    index: i64,
    value: f64,
}

impl EventModel {
    pub fn new(t: &LevyTriplet, horizon: f64) -> Result<Self> {
        if !t.sigma2.is_zero() {
            return Err(wrong_engine("event-driven engine needs sigma2 = 0"));
        }
        if t.jumps.tail.is_some() {
            return Err(wrong_engine("event-driven engine needs a finite atom list, no tail family"));
        }
        if t.jumps.atoms.is_empty() {
            return Err(wrong_engine("event-driven engine needs jump mass in (0, inf)"));
        }
        let slope = t.path_slope().expect("atoms only").value();
        let sizes: Vec<f64> = t.jumps.atoms.iter().map(|a| a.size.value()).collect();
        let rates: Vec<f64> = t.jumps.atoms.iter().map(|a| a.rate.value()).collect();
        let chooser = WeightedIndex::new(&rates).map_err(|e| wrong_engine(format!("bad jump rates: {e}")))?;
        let lattice = if slope == 0.0 {
            lattice_spacing(&t.jumps.atoms).map(|(h, steps)| (h.value(), steps))
        } else {
            None
        };
        Ok(Self {
            rate: rates.iter().sum(),
            sizes,
            chooser,
            slope,
            lattice,
            horizon,
        })
    }

    pub fn lattice_step(&self) -> Option<f64> {
        self.lattice.as_ref().map(|(h, _)| *h)
    }

    #[inline]
    fn next_gap<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let e: f64 = Exp1.sample(rng);
        e / self.rate
    }

    #[inline]
    fn jump<R: Rng + ?Sized>(&self, pos: Position, left: f64, rng: &mut R) -> Position {
        let i = self.chooser.sample(rng);
        match &self.lattice {
            Some((h, steps)) => {
                let index = pos.index + steps[i];
                Position {
                    index,
                    value: index as f64 * h,
                }
            }
            None => Position {
                index: 0,
                value: left + self.sizes[i],
            },
        }
    }

    pub fn path<R: Rng + ?Sized>(&self, rng: &mut R) -> PathSkeleton {
        let mut records = vec![PathRecord {
            time: 0.0,
            value: 0.0,
            left: 0.0,
            kind: RecordKind::Start,
        }];
        let mut t = 0.0;
        let mut pos = Position { index: 0, value: 0.0 };
        loop {
            let tau = t + self.next_gap(rng);
            if tau > self.horizon {
                break;
            }
            let left = pos.value + self.slope * (tau - t);
            pos = self.jump(pos, left, rng);
            records.push(PathRecord {
                time: tau,
                value: pos.value,
                left,
                kind: RecordKind::Jump,
            });
            t = tau;
        }
        PathSkeleton {
            records,
            engine: Engine::EventDriven,
            horizon: self.horizon,
            slope: self.slope,
        }
    }

    pub fn passage<R: Rng + ?Sized>(&self, level: f64, strict: bool, rng: &mut R) -> PassageOutcome {
        let mut t = 0.0;
        let mut pos = Position { index: 0, value: 0.0 };
        loop {
            let tau = t + self.next_gap(rng);
            let seg_end = tau.min(self.horizon);
            if self.slope > 0.0 {
                if pos.value >= level {
                    // only reachable for strict passage after landing on the level
                    return PassageOutcome::crossed(level, strict, t, pos.value);
                }
                let hit = t + (level - pos.value) / self.slope;
                if hit <= seg_end {
                    return PassageOutcome::crossed(level, strict, hit, level);
                }
            }
            if tau > self.horizon {
                let terminal = pos.value + self.slope * (self.horizon - t);
                return PassageOutcome::censored(level, strict, self.horizon, terminal);
            }
            let left = pos.value + self.slope * (tau - t);
            pos = self.jump(pos, left, rng);
            t = tau;
            if reaches(pos.value, level, strict) {
                return PassageOutcome::crossed(level, strict, tau, pos.value);
            }
        }
    }
}
