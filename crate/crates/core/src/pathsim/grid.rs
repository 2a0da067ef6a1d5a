use std::ops::ControlFlow;

use rand::Rng;
use rand::distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::{reaches, wrong_engine, Engine, PassageOutcome, PathRecord, PathSkeleton, RecordKind, SimConfig};
use crate::error::Result;
use crate::firstpassage::{bridge_crossing_prob, BridgeQuery};
use crate::model::{Cutoff, LevyTriplet, Side, TailFamily};

#[derive(Debug, Clone)]
enum JumpSource {
    Atom(f64),
    Tail { side: Side, lo: f64 },
}

/// Euler grid with exactly placed finite-activity jumps.
#[derive(Debug, Clone)]
pub struct GridModel {
    slope: f64,
    sigma: f64,
    dt: f64,
    horizon: f64,
    bridge: bool,
    rate: f64,
    sources: Vec<JumpSource>,
    chooser: Option<WeightedIndex<f64>>,
    tail: Option<TailFamily>,
}

enum GridEvent {
    Segment { t0: f64, v0: f64, t1: f64, v1: f64 },
    Jump { t: f64, left: f64, value: f64 },
    GridPoint { t: f64, value: f64 },
}

impl GridModel {
    pub fn new(t: &LevyTriplet, cfg: &SimConfig) -> Result<Self> {
        let tail = t.jumps.tail.clone();
        if t.sigma2.is_zero() && tail.is_none() {
            return Err(wrong_engine("grid engine needs sigma2 > 0 or a tail family"));
        }
        let infinite_tail = tail.as_ref().is_some_and(|f| !f.total_mass().is_finite());
        let eps = match (cfg.small_jump_eps, infinite_tail) {
            (Some(e), _) => e,
            (None, true) => return Err(wrong_engine("small_jump_eps is required for an infinite-activity tail")),
            (None, false) => 0.0,
        };

        let mut sources = Vec::new();
        let mut weights = Vec::new();
        for a in &t.jumps.atoms {
            sources.push(JumpSource::Atom(a.size.value()));
            weights.push(a.rate.value());
        }
        let mut slope = t.drift.value();
        let mut small_var = 0.0;
        if t.cutoff == Cutoff::UnitBall {
            slope -= t
                .jumps
                .atoms
                .iter()
                .filter(|a| a.size.value().abs() <= 1.0)
                .map(|a| a.size.value() * a.rate.value())
                .sum::<f64>();
        }
        if let Some(f) = &tail {
            for side in [Side::Positive, Side::Negative] {
                let m = f.mass(side, eps, f64::INFINITY);
                if m > 0.0 {
                    sources.push(JumpSource::Tail { side, lo: eps });
                    weights.push(m);
                }
                small_var += f.second_moment(side, 0.0, eps);
                // compensation of the simulated tail jumps that lie in the unit ball
                if eps < 1.0 {
                    slope -= f.first_moment(side, eps.max(f64::MIN_POSITIVE), 1.0);
                } else if eps > 1.0 {
                    slope += f.first_moment(side, 1.0, eps);
                }
            }
        }
        let sigma2 = t.sigma2.value() + if cfg.gaussian_substitution { small_var } else { 0.0 };
        let rate: f64 = weights.iter().sum();
        let chooser = if rate > 0.0 {
            Some(WeightedIndex::new(&weights).map_err(|e| wrong_engine(format!("bad jump rates: {e}")))?)
        } else {
            None
        };
        Ok(Self {
            slope,
            sigma: sigma2.max(0.0).sqrt(),
            dt: cfg.dt,
            horizon: cfg.horizon,
            bridge: cfg.bridge_correction,
            rate,
            sources,
            chooser,
            tail,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Total rate of the jumps placed at exact times.
    pub fn jump_rate(&self) -> f64 {
        self.rate
    }

    fn next_gap<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.rate > 0.0 {
            let e: f64 = Exp1.sample(rng);
            e / self.rate
        } else {
            f64::INFINITY
        }
    }

    fn sample_jump<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let chooser = self.chooser.as_ref().expect("jump drawn with zero rate");
        match self.sources[chooser.sample(rng)] {
            JumpSource::Atom(x) => x,
            JumpSource::Tail { side, lo } => {
                let tail = self.tail.as_ref().expect("tail source without tail");
                let m = tail.sample_magnitude(side, lo, f64::INFINITY, rng.random::<f64>());
                match side {
                    Side::Positive => m,
                    Side::Negative => -m,
                }
            }
        }
    }

    fn walk<R, B, F>(&self, rng: &mut R, mut visit: F) -> ControlFlow<B, f64>
    where
        R: Rng + ?Sized,
        F: FnMut(GridEvent, &mut R) -> ControlFlow<B>,
    {
        let mut t = 0.0;
        let mut v = 0.0;
        let mut k: u64 = 0;
        let mut next_jump = self.next_gap(rng);
        while t < self.horizon {
            let grid_next = ((k + 1) as f64 * self.dt).min(self.horizon);
            let jump_first = next_jump <= grid_next;
            let t1 = if jump_first { next_jump } else { grid_next };
            let d = t1 - t;
            let mut v1 = v + self.slope * d;
            if self.sigma > 0.0 && d > 0.0 {
                let z: f64 = StandardNormal.sample(rng);
                v1 += self.sigma * d.sqrt() * z;
            }
            visit(GridEvent::Segment { t0: t, v0: v, t1, v1 }, rng)?;
            if jump_first {
                let value = v1 + self.sample_jump(rng);
                visit(GridEvent::Jump { t: t1, left: v1, value }, rng)?;
                v = value;
                next_jump = t1 + self.next_gap(rng);
                if t1 == grid_next {
                    k += 1;
                }
            } else {
                v = v1;
                visit(GridEvent::GridPoint { t: t1, value: v }, rng)?;
                k += 1;
            }
            t = t1;
        }
        ControlFlow::Continue(v)
    }

    pub fn path<R: Rng + ?Sized>(&self, rng: &mut R) -> PathSkeleton {
        let mut records = vec![PathRecord {
            time: 0.0,
            value: 0.0,
            left: 0.0,
            kind: RecordKind::Start,
        }];
        let _ = self.walk::<R, (), _>(rng, |ev, _| {
            match ev {
                GridEvent::Segment { .. } => {}
                GridEvent::Jump { t, left, value } => records.push(PathRecord {
                    time: t,
                    value,
                    left,
                    kind: RecordKind::Jump,
                }),
                GridEvent::GridPoint { t, value } => records.push(PathRecord {
                    time: t,
                    value,
                    left: value,
                    kind: RecordKind::Grid,
                }),
            }
            ControlFlow::Continue(())
        });
        PathSkeleton {
            records,
            engine: Engine::Grid,
            horizon: self.horizon,
            slope: self.slope,
        }
    }

    pub fn passage<R: Rng + ?Sized>(&self, level: f64, strict: bool, rng: &mut R) -> PassageOutcome {
        let flow = self.walk(rng, |ev, rng| match ev {
            GridEvent::Segment { t0, v0, t1, v1 } => {
                if self.sigma == 0.0 {
                    if self.slope > 0.0 && reaches(v1, level, strict) {
                        let hit = if v0 >= level { t0 } else { t0 + (level - v0) / self.slope };
                        return ControlFlow::Break(PassageOutcome::crossed(level, strict, hit.min(t1), level));
                    }
                    return ControlFlow::Continue(());
                }
                if reaches(v1, level, strict) {
                    // a continuous crossing happened inside the segment
                    let position = if self.bridge { level } else { v1 };
                    return ControlFlow::Break(PassageOutcome::crossed(level, strict, t1, position));
                }
                if self.bridge && t1 > t0 {
                    let q = BridgeQuery {
                        sigma: self.sigma,
                        dt: t1 - t0,
                        gap_start: (level - v0).max(0.0),
                        gap_end: (level - v1).max(0.0),
                    };
                    let p = bridge_crossing_prob(&q);
                    if rng.random::<f64>() < p {
                        return ControlFlow::Break(PassageOutcome::crossed(level, strict, t1, level));
                    }
                }
                ControlFlow::Continue(())
            }
            GridEvent::Jump { t, value, .. } if reaches(value, level, strict) => {
                ControlFlow::Break(PassageOutcome::crossed(level, strict, t, value))
            }
            _ => ControlFlow::Continue(()),
        });
        match flow {
            ControlFlow::Break(out) => out,
            ControlFlow::Continue(terminal) => PassageOutcome::censored(level, strict, self.horizon, terminal),
        }
    }
}
