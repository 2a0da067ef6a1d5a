//! Empirical passage laws `Q^x` and the statistics built on them.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{lattice_spacing, LevyTriplet};
use crate::pathsim::{Engine, PassageOutcome, PassageResult, SimConfig, Simulator};
use crate::rng::{run_replicates, StreamFamily};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LawAtom {
    pub position: f64,
    pub count: u64,
}

/// Subprobability law of the passage position, stored as counts so that mass
/// accounting is exact: `crossed + censored = n_replicates`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalLaw {
    pub level: f64,
    pub strict: bool,
    pub seed: u64,
    pub n_replicates: u64,
    pub crossed: u64,
    pub censored: u64,
    /// Sorted by position, positions distinct.
    pub atoms: Vec<LawAtom>,
}

#[derive(Serialize)]
struct WeightedSample {
    position: f64,
    weight: f64,
}

#[derive(Serialize)]
struct LawDump {
    level: f64,
    strict: bool,
    crossed_mass: f64,
    censored_mass: f64,
    n_replicates: u64,
    seed: u64,
    samples: Vec<WeightedSample>,
}

impl EmpiricalLaw {
    pub fn from_outcomes(level: f64, strict: bool, seed: u64, outcomes: &[PassageOutcome]) -> Self {
        let mut positions: Vec<f64> = outcomes.iter().filter_map(PassageOutcome::position).collect();
        positions.sort_by(f64::total_cmp);
        let mut atoms: Vec<LawAtom> = Vec::new();
        for p in positions {
            match atoms.last_mut() {
                Some(a) if a.position.total_cmp(&p) == Ordering::Equal => a.count += 1,
                _ => atoms.push(LawAtom { position: p, count: 1 }),
            }
        }
        let crossed: u64 = atoms.iter().map(|a| a.count).sum();
        let n = outcomes.len() as u64;
        Self {
            level,
            strict,
            seed,
            n_replicates: n,
            crossed,
            censored: n - crossed,
            atoms,
        }
    }

    pub fn weight(&self, atom: &LawAtom) -> f64 {
        atom.count as f64 / self.n_replicates as f64
    }

    pub fn crossed_mass(&self) -> f64 {
        self.crossed as f64 / self.n_replicates as f64
    }

    pub fn censored_mass(&self) -> f64 {
        self.censored as f64 / self.n_replicates as f64
    }

    pub fn mass_at(&self, position: f64) -> f64 {
        self.atoms
            .iter()
            .find(|a| a.position == position)
            .map_or(0.0, |a| self.weight(a))
    }

    /// Pools two estimates of the same law. Associative and commutative.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.level != other.level || self.strict != other.strict {
            return Err(invalid("cannot merge laws for different levels"));
        }
        let mut atoms = Vec::with_capacity(self.atoms.len() + other.atoms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.atoms.len() || j < other.atoms.len() {
            let ord = match (self.atoms.get(i), other.atoms.get(j)) {
                (Some(a), Some(b)) => a.position.total_cmp(&b.position),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            let next = match ord {
                Ordering::Less => {
                    i += 1;
                    self.atoms[i - 1]
                }
                Ordering::Greater => {
                    j += 1;
                    other.atoms[j - 1]
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                    LawAtom {
                        position: self.atoms[i - 1].position,
                        count: self.atoms[i - 1].count + other.atoms[j - 1].count,
                    }
                }
            };
            atoms.push(next);
        }
        Ok(Self {
            level: self.level,
            strict: self.strict,
            seed: self.seed.min(other.seed),
            n_replicates: self.n_replicates + other.n_replicates,
            crossed: self.crossed + other.crossed,
            censored: self.censored + other.censored,
            atoms,
        })
    }

    pub fn support_diameter(&self) -> f64 {
        match (self.atoms.first(), self.atoms.last()) {
            (Some(a), Some(b)) => b.position - a.position,
            _ => 0.0,
        }
    }

    /// Lower median of the crossed positions.
    pub fn median(&self) -> Option<f64> {
        let half = self.crossed.div_ceil(2);
        let mut acc = 0;
        for a in &self.atoms {
            acc += a.count;
            if acc >= half && acc > 0 {
                return Some(a.position);
            }
        }
        None
    }

    /// `position,weight` rows after a `#` line with the run metadata.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# level={},strict={},crossed_mass={},censored_mass={},n_replicates={},seed={}\nposition,weight\n",
            self.level,
            self.strict,
            self.crossed_mass(),
            self.censored_mass(),
            self.n_replicates,
            self.seed
        );
        for a in &self.atoms {
            let _ = writeln!(out, "{},{}", a.position, self.weight(a));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let dump = LawDump {
            level: self.level,
            strict: self.strict,
            crossed_mass: self.crossed_mass(),
            censored_mass: self.censored_mass(),
            n_replicates: self.n_replicates,
            seed: self.seed,
            samples: self
                .atoms
                .iter()
                .map(|a| WeightedSample {
                    position: a.position,
                    weight: self.weight(a),
                })
                .collect(),
        };
        serde_json::to_value(dump).expect("plain data")
    }
}

fn stream_label(purpose: &str, level: f64, strict: bool) -> String {
    format!("{purpose}/{level}/{strict}")
}

/// Raw outcomes of `n` independent replicates, in replicate order.
pub fn sample_outcomes(t: &LevyTriplet, level: f64, strict: bool, n: usize, cfg: &SimConfig) -> Result<Vec<PassageOutcome>> {
    if n == 0 {
        return Err(invalid("need n >= 1 replicates"));
    }
    let sim = Simulator::new(t, cfg)?;
    Ok(sample_with(&sim, level, strict, n, cfg, "qx"))
}

fn sample_with(sim: &Simulator, level: f64, strict: bool, n: usize, cfg: &SimConfig, purpose: &str) -> Vec<PassageOutcome> {
    let family = StreamFamily::new(cfg.seed).child(&stream_label(purpose, level, strict));
    run_replicates(n, cfg.workers, |i| sim.passage(level, strict, &mut family.stream(i)))
}

pub fn estimate_law(t: &LevyTriplet, level: f64, strict: bool, n: usize, cfg: &SimConfig) -> Result<EmpiricalLaw> {
    let outcomes = sample_outcomes(t, level, strict, n, cfg)?;
    Ok(EmpiricalLaw::from_outcomes(level, strict, cfg.seed, &outcomes))
}

/// Degeneracy tolerance matching the engine's crossing resolution.
pub fn default_delta(sim: &Simulator) -> f64 {
    match sim.resolution() {
        None => 0.0,
        Some((sigma, dt)) => 6.0 * sigma * dt.sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    /// `point: None` is the vacuous case: too little crossed mass to judge,
    /// which counts as trivial.
    Trivial { point: Option<f64> },
    NonTrivial,
    Undecided,
}

impl Verdict {
    /// Vacuous verdicts rest on too few crossings to count as evidence.
    pub fn is_decided(&self) -> bool {
        matches!(self, Verdict::Trivial { point: Some(_) } | Verdict::NonTrivial)
    }

    pub fn label(&self) -> String {
        match self {
            Verdict::Trivial { point: Some(p) } => format!("trivial({p})"),
            Verdict::Trivial { point: None } => "trivial(vacuous)".into(),
            Verdict::NonTrivial => "non_trivial".into(),
            Verdict::Undecided => "undecided".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrivialityVerdict {
    pub verdict: Verdict,
    pub support_diameter: f64,
    pub within_delta_fraction: f64,
    pub delta: f64,
    pub crossed: u64,
}

/// Is the crossed part of the law concentrated at one point?
///
/// `delta = 0` asks for exact equality, which is the right test for
/// event-driven engines.
pub fn triviality_test(law: &EmpiricalLaw, delta: f64, min_crossed: u64) -> Result<TrivialityVerdict> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(invalid(format!("delta must be finite and >= 0, got {delta}")));
    }
    let crossed = law.crossed;
    let diameter = law.support_diameter();
    if crossed < min_crossed.max(1) {
        return Ok(TrivialityVerdict {
            verdict: Verdict::Trivial { point: None },
            support_diameter: diameter,
            within_delta_fraction: 1.0,
            delta,
            crossed,
        });
    }
    let median = law.median().expect("crossed mass present");
    let within: u64 = law
        .atoms
        .iter()
        .filter(|a| (a.position - median).abs() <= delta)
        .map(|a| a.count)
        .sum();
    let fraction = within as f64 / crossed as f64;
    let threshold = 1.0 - 3.0 * (0.25 / crossed as f64).sqrt();
    let verdict = if within == crossed && diameter <= 2.0 * delta {
        Verdict::Trivial { point: Some(median) }
    } else if fraction < threshold {
        Verdict::NonTrivial
    } else {
        Verdict::Undecided
    };
    Ok(TrivialityVerdict {
        verdict,
        support_diameter: diameter,
        within_delta_fraction: fraction,
        delta,
        crossed,
    })
}

/// Partition of the real line for comparing laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "snake_case")]
pub enum BinSpec {
    /// One bin per point plus a final bin for everything else.
    Atoms(Vec<f64>),
    /// Increasing edges; underflow `(-inf, e0)`, then `[e_i, e_{i+1})`,
    /// then overflow `[e_last, inf)`.
    Intervals(Vec<f64>),
}

const ATOM_MATCH_REL: f64 = 1e-9;

impl BinSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            BinSpec::Atoms(p) if p.iter().any(|x| !x.is_finite()) => Err(invalid("bin atoms must be finite")),
            BinSpec::Intervals(e) if e.is_empty() || e.windows(2).any(|w| !(w[0] < w[1])) => {
                Err(invalid("interval edges must be non-empty and strictly increasing"))
            }
            _ => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            BinSpec::Atoms(p) => p.len() + 1,
            BinSpec::Intervals(e) => e.len() + 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Atom bins match up to a relative `1e-9`, absorbing float noise from
    /// composing two lattice positions.
    pub fn index(&self, x: f64) -> usize {
        match self {
            BinSpec::Atoms(p) => p
                .iter()
                .position(|a| (a - x).abs() <= ATOM_MATCH_REL * a.abs().max(1.0))
                .unwrap_or(p.len()),
            BinSpec::Intervals(e) => e.partition_point(|edge| *edge <= x),
        }
    }

    pub fn bounds(&self, i: usize) -> (f64, f64) {
        match self {
            BinSpec::Atoms(p) => p.get(i).map_or((f64::NEG_INFINITY, f64::INFINITY), |a| (*a, *a)),
            BinSpec::Intervals(e) => {
                let left = if i == 0 { f64::NEG_INFINITY } else { e[i - 1] };
                let right = e.get(i).copied().unwrap_or(f64::INFINITY);
                (left, right)
            }
        }
    }

    /// Uniform bins from `b` upward: width `h/4` on a lattice, else `(b-c)/20`.
    pub fn default_for(t: &LevyTriplet, b: f64, c: f64) -> Self {
        let width = match lattice_spacing(&t.jumps.atoms) {
            Some((h, _)) if t.is_compound_poisson() => h.value() / 4.0,
            _ => (b - c) / 20.0,
        };
        Self::Intervals((0..=40).map(|k| b + k as f64 * width).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityBin {
    pub left: f64,
    pub right: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub discrepancy: f64,
    pub std_error: f64,
    pub studentized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub b: f64,
    pub c: f64,
    pub n: u64,
    pub bins: Vec<IdentityBin>,
    pub lhs_censored_mass: f64,
    /// Mass lost to censoring at either stage of the composition.
    pub rhs_censored_mass: f64,
    pub max_studentized: f64,
    pub within_3se_fraction: f64,
}

impl IdentityReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# b={},c={},n={},lhs_censored_mass={},rhs_censored_mass={},max_studentized={}\nbin_left,bin_right,lhs,rhs,discrepancy,std_error,studentized\n",
            self.b, self.c, self.n, self.lhs_censored_mass, self.rhs_censored_mass, self.max_studentized
        );
        for r in &self.bins {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.left, r.right, r.lhs, r.rhs, r.discrepancy, r.std_error, r.studentized
            );
        }
        out
    }
}

/// Checks `Q^b(A) = int Q^c(dx) Q^{b-x}(A - x)` by Monte Carlo.
///
/// The right side samples `X(T_c)` and, from each crossed replicate,
/// restarts an independent path from 0 to the remaining distance.
pub fn convolution_check(t: &LevyTriplet, b: f64, c: f64, n: usize, cfg: &SimConfig, bins: &BinSpec) -> Result<IdentityReport> {
    if !(c > 0.0 && c < b && b.is_finite()) {
        return Err(invalid(format!("require 0<c<b, got c={c}, b={b}")));
    }
    if n == 0 {
        return Err(invalid("need n >= 1 replicates"));
    }
    bins.validate()?;
    let sim = Simulator::new(t, cfg)?;
    let direct = sample_with(&sim, b, false, n, cfg, "identity-lhs");
    let first = sample_with(&sim, c, false, n, cfg, "identity-first");
    let restart = StreamFamily::new(cfg.seed).child("identity-restart");
    let composed: Vec<Option<f64>> = run_replicates(n, cfg.workers, |i| {
        let xc = first[i as usize].position()?;
        let second = sim.passage(b - xc, false, &mut restart.stream(i));
        second.position().map(|p| xc + p)
    });

    let k = bins.len();
    let mut lhs = vec![0u64; k];
    let mut rhs = vec![0u64; k];
    for p in direct.iter().filter_map(PassageOutcome::position) {
        lhs[bins.index(p)] += 1;
    }
    for p in composed.iter().flatten() {
        rhs[bins.index(*p)] += 1;
    }
    let nf = n as f64;
    let rows: Vec<IdentityBin> = (0..k)
        .map(|i| {
            let (left, right) = bins.bounds(i);
            let l = lhs[i] as f64 / nf;
            let r = rhs[i] as f64 / nf;
            let se = (l * (1.0 - l) / nf + r * (1.0 - r) / nf).sqrt();
            let d = (l - r).abs();
            let studentized = if se > 0.0 {
                d / se
            } else if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            IdentityBin {
                left,
                right,
                lhs: l,
                rhs: r,
                discrepancy: d,
                std_error: se,
                studentized,
            }
        })
        .collect();
    let max_studentized = rows.iter().map(|r| r.studentized).fold(0.0, f64::max);
    let within = rows.iter().filter(|r| r.studentized <= 3.0).count();
    Ok(IdentityReport {
        b,
        c,
        n: n as u64,
        lhs_censored_mass: direct.iter().filter(|o| !o.is_crossed()).count() as f64 / nf,
        rhs_censored_mass: composed.iter().filter(|o| o.is_none()).count() as f64 / nf,
        within_3se_fraction: within as f64 / k as f64,
        max_studentized,
        bins: rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelVerdict {
    pub law: EmpiricalLaw,
    pub verdict: TrivialityVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub engine: Engine,
    pub levels: Vec<LevelVerdict>,
    /// Decided verdicts are all trivial or all non-trivial.
    pub homogeneous: bool,
}

impl ConsistencyReport {
    pub fn any_non_trivial(&self) -> bool {
        self.levels.iter().any(|l| l.verdict.verdict == Verdict::NonTrivial)
    }

    pub fn any_decided(&self) -> bool {
        self.levels.iter().any(|l| l.verdict.verdict.is_decided())
    }
}

/// Per-level triviality verdicts and their homogeneity. `delta = None`
/// uses [`default_delta`].
pub fn multi_level_consistency(
    t: &LevyTriplet,
    levels: &[f64],
    n: usize,
    cfg: &SimConfig,
    delta: Option<f64>,
    min_crossed: u64,
) -> Result<ConsistencyReport> {
    if levels.len() < 2 {
        return Err(invalid("consistency needs at least 2 levels"));
    }
    if n == 0 {
        return Err(invalid("need n >= 1 replicates"));
    }
    let sim = Simulator::new(t, cfg)?;
    let delta = delta.unwrap_or_else(|| default_delta(&sim));
    let mut out = Vec::with_capacity(levels.len());
    for &level in levels {
        let outcomes = sample_with(&sim, level, false, n, cfg, "qx");
        let law = EmpiricalLaw::from_outcomes(level, false, cfg.seed, &outcomes);
        let verdict = triviality_test(&law, delta, min_crossed)?;
        out.push(LevelVerdict { law, verdict });
    }
    let decided: Vec<bool> = out
        .iter()
        .filter(|l| l.verdict.verdict.is_decided())
        .map(|l| matches!(l.verdict.verdict, Verdict::Trivial { .. }))
        .collect();
    let homogeneous = decided.windows(2).all(|w| w[0] == w[1]);
    Ok(ConsistencyReport {
        engine: sim.engine(),
        levels: out,
        homogeneous,
    })
}

/// Positions that a censored replicate might still reach, for diagnostics.
pub fn censored_terminal_values(outcomes: &[PassageOutcome]) -> Vec<f64> {
    outcomes
        .iter()
        .filter_map(|o| match o.result {
            PassageResult::Censored { terminal_value, .. } => Some(terminal_value),
            PassageResult::Crossed { .. } => None,
        })
        .collect()
}
