//! Exact first-passage laws for compound Poisson chains on a lattice `hZ`.
//!
//! Passage positions do not depend on jump times, so the law of `X(T_x)` is
//! the absorption distribution of the embedded jump chain. States below
//! `-L h` are absorbed into a "floor"; the floor probability, together with a
//! Lundberg bound on climbing back from it, certifies how much crossing mass
//! the truncation can have lost.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::{Num, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{lattice_ceil, lattice_spacing, LevyTriplet};
use crate::scalar::Scalar;

/// Largest system solved with rational arithmetic.
pub const EXACT_STATE_LIMIT: usize = 2000;
/// Target for the automatically chosen floor.
pub const DEFAULT_LOST_TARGET: f64 = 1e-9;
const MAX_FLOOR: u32 = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeChainSpec {
    pub h: Scalar,
    /// Jump sizes as multiples of `h`, with their rates.
    pub steps: Vec<(i64, Scalar)>,
    /// Truncation floor `L`; `None` picks the smallest certified power of two.
    pub floor: Option<u32>,
}

impl LatticeChainSpec {
    pub fn new(h: impl Into<Scalar>, steps: Vec<(i64, Scalar)>) -> Result<Self> {
        let h = h.into();
        if !h.is_positive() {
            return Err(Error::NotLattice("h must be > 0".into()));
        }
        if steps.is_empty() {
            return Err(Error::NotLattice("no jumps".into()));
        }
        for (k, r) in &steps {
            if *k == 0 {
                return Err(Error::NotLattice("zero step".into()));
            }
            if !r.is_positive() {
                return Err(Error::NotLattice(format!("step {k} has non-positive rate")));
            }
        }
        Ok(Self { h, steps, floor: None })
    }

    pub fn with_floor(mut self, floor: u32) -> Self {
        self.floor = Some(floor.max(1));
        self
    }

    /// Chain of a compound Poisson triplet whose atoms share a lattice.
    pub fn from_triplet(t: &LevyTriplet) -> Result<Self> {
        crate::model::validate_triplet(t).into_result()?;
        if !t.is_compound_poisson() || t.jumps.tail.is_some() {
            return Err(Error::NotLattice("triplet is not a driftless compound Poisson process".into()));
        }
        let (h, multiples) = lattice_spacing(&t.jumps.atoms)
            .ok_or_else(|| Error::NotLattice("atom sizes do not share a lattice".into()))?;
        let steps = multiples.into_iter().zip(t.jumps.atoms.iter().map(|a| a.rate.clone())).collect();
        Self::new(h, steps)
    }

    fn exact_probabilities(&self) -> Option<Vec<BigRational>> {
        let rates: Vec<&BigRational> = self.steps.iter().map(|(_, r)| r.exact()).collect::<Option<_>>()?;
        let total: BigRational = rates.iter().copied().sum();
        Some(rates.into_iter().map(|r| r / &total).collect())
    }

    fn float_probabilities(&self) -> Vec<f64> {
        let total: f64 = self.steps.iter().map(|(_, r)| r.value()).sum();
        self.steps.iter().map(|(_, r)| r.value() / total).collect()
    }

    fn max_up(&self) -> i64 {
        self.steps.iter().map(|(k, _)| *k).max().unwrap_or(0).max(0)
    }

    fn max_down(&self) -> i64 {
        self.steps.iter().map(|(k, _)| -*k).max().unwrap_or(0).max(0)
    }

    /// Sign of the embedded walk's mean step, exactly when rates are exact.
    fn mean_sign(&self) -> i8 {
        match self.exact_probabilities() {
            Some(p) => {
                let m: BigRational = p.iter().zip(&self.steps).map(|(p, (k, _))| p * BigRational::from_integer((*k).into())).sum();
                if m.is_zero() {
                    0
                } else if m > BigRational::zero() {
                    1
                } else {
                    -1
                }
            }
            None => {
                let m: f64 = self.float_probabilities().iter().zip(&self.steps).map(|(p, (k, _))| p * *k as f64).sum();
                m.partial_cmp(&0.0).map_or(0, |o| o as i8)
            }
        }
    }

    /// Positive root of `E[exp(theta K)] = 1` for a down-drifting walk,
    /// approached from below so that `exp(-theta u)` stays a valid bound.
    fn lundberg_exponent(&self) -> f64 {
        let p = self.float_probabilities();
        let f = |th: f64| p.iter().zip(&self.steps).map(|(p, (k, _))| p * (th * *k as f64).exp()).sum::<f64>() - 1.0;
        let mut hi = 1.0;
        while f(hi) <= 0.0 && hi < 1e6 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactAtom {
    /// Position as a multiple of `h`.
    pub index: i64,
    pub position: f64,
    pub mass: Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactLaw {
    pub level: f64,
    pub h: f64,
    pub atoms: Vec<ExactAtom>,
    pub floor: u32,
    /// Probability of falling below `-floor * h` before crossing.
    pub floor_mass: Scalar,
    /// Upper bound on crossing mass lost to the floor.
    pub lost_mass_bound: f64,
    /// Solved with rational arithmetic.
    pub exact: bool,
    /// Max residual of the linear system (zero for rational solves).
    pub residual: f64,
}

impl ExactLaw {
    pub fn total_mass(&self) -> Scalar {
        self.atoms.iter().fold(Scalar::zero(), |acc, a| acc.add(&a.mass))
    }

    pub fn mass_at(&self, position: f64) -> f64 {
        self.atoms.iter().filter(|a| a.position == position).map(|a| a.mass.value()).sum()
    }

    /// `position,mass` CSV with a `# lost_mass_bound=` header line.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# lost_mass_bound={}\nposition,mass\n", self.lost_mass_bound);
        for a in &self.atoms {
            let _ = writeln!(out, "{},{}", a.position, a.mass.value());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PassageProbability {
    pub value: Scalar,
    /// One-sided: the true probability lies in `[value, value + error_bound]`.
    pub error_bound: f64,
}

pub fn exact_passage_law(spec: &LatticeChainSpec, level: f64) -> Result<ExactLaw> {
    if !(level > 0.0 && level.is_finite()) {
        return Err(Error::InvalidParameter(format!("oracle level must be > 0, got {level}")));
    }
    if let Some(floor) = spec.floor {
        return solve_with_floor(spec, level, floor);
    }
    let mut floor = 1;
    loop {
        let law = solve_with_floor(spec, level, floor)?;
        if law.lost_mass_bound < DEFAULT_LOST_TARGET {
            return Ok(law);
        }
        if floor >= MAX_FLOOR {
            return Err(Error::TruncationNotCertified {
                floor,
                bound: law.lost_mass_bound,
            });
        }
        floor *= 2;
    }
}

pub fn exact_passage_probability(spec: &LatticeChainSpec, level: f64) -> Result<PassageProbability> {
    let law = exact_passage_law(spec, level)?;
    Ok(PassageProbability {
        value: law.total_mass(),
        error_bound: law.lost_mass_bound,
    })
}

fn solve_with_floor(spec: &LatticeChainSpec, level: f64, floor: u32) -> Result<ExactLaw> {
    let h = spec.h.value();
    let top = lattice_ceil(level, h);
    let n = usize::try_from(top + i64::from(floor))
        .map_err(|_| Error::InvalidParameter("lattice system too large".into()))?;
    let exact_probs = spec.exact_probabilities().filter(|_| n <= EXACT_STATE_LIMIT);
    let exact = exact_probs.is_some();
    let (masses, floor_mass, residual): (Vec<Scalar>, Scalar, f64) = match exact_probs {
        Some(p) => {
            let sol = root_row(&solve_absorption(spec, &p, top, floor), spec.max_up() as usize + 1, floor);
            let to_scalar = |r: BigRational| Scalar::from_rational(r);
            let (floor_col, cols) = sol.split_last().expect("floor column");
            (cols.iter().cloned().map(to_scalar).collect(), to_scalar(floor_col.clone()), 0.0)
        }
        None => {
            let p = spec.float_probabilities();
            let all = solve_absorption(spec, &p, top, floor);
            let residual = absorption_residual(spec, &p, &all, top, floor);
            let sol = root_row(&all, spec.max_up() as usize + 1, floor);
            let (floor_col, cols) = sol.split_last().expect("floor column");
            (cols.iter().map(|&v| Scalar::from_f64(v)).collect(), Scalar::from_f64(*floor_col), residual)
        }
    };
    let atoms = masses
        .into_iter()
        .enumerate()
        .filter(|(_, m)| !m.is_zero())
        .map(|(j, mass)| {
            let index = top + j as i64;
            ExactAtom {
                index,
                position: index as f64 * h,
                mass,
            }
        })
        .collect();
    let climb_back = if spec.max_up() == 0 {
        0.0
    } else if spec.mean_sign() < 0 {
        (-spec.lundberg_exponent() * (top + i64::from(floor) + 1) as f64).exp()
    } else {
        1.0
    };
    Ok(ExactLaw {
        level,
        h,
        atoms,
        floor,
        lost_mass_bound: floor_mass.value().max(0.0) * climb_back,
        floor_mass,
        exact,
        residual,
    })
}

/// Absorption probabilities into each position `top + j` (`j < max_up`)
/// and, last, into the floor, for every transient state (row-major). Transient states are
/// `-floor ..= top - 1`; the system `(I - P) u = B` is banded and an
/// M-matrix, so elimination without pivoting is safe.
fn solve_absorption<T: Clone + Num>(spec: &LatticeChainSpec, probs: &[T], top: i64, floor: u32) -> Vec<T> {
    let lo = -i64::from(floor);
    let n = (top - lo) as usize;
    let bw = spec.max_up().max(spec.max_down()) as usize;
    let width = 2 * bw + 1;
    let cols = spec.max_up() as usize + 1;
    let mut band = vec![T::zero(); n * width];
    let mut rhs = vec![T::zero(); n * cols];
    let at = |r: usize, c: usize| r * width + (c + bw - r);

    for i in 0..n {
        let s = lo + i as i64;
        band[at(i, i)] = T::one();
        for ((k, _), p) in spec.steps.iter().zip(probs) {
            let target = s + k;
            if target >= top {
                let j = (target - top) as usize;
                rhs[i * cols + j] = rhs[i * cols + j].clone() + p.clone();
            } else if target < lo {
                rhs[i * cols + cols - 1] = rhs[i * cols + cols - 1].clone() + p.clone();
            } else {
                let c = (target - lo) as usize;
                band[at(i, c)] = band[at(i, c)].clone() - p.clone();
            }
        }
    }

    for i in 0..n {
        let pivot = band[at(i, i)].clone();
        for r in i + 1..n.min(i + bw + 1) {
            let factor = band[at(r, i)].clone() / pivot.clone();
            if factor.is_zero() {
                continue;
            }
            for c in i..n.min(i + bw + 1) {
                let v = band[at(i, c)].clone();
                if !v.is_zero() {
                    band[at(r, c)] = band[at(r, c)].clone() - factor.clone() * v;
                }
            }
            for j in 0..cols {
                let v = rhs[i * cols + j].clone();
                if !v.is_zero() {
                    rhs[r * cols + j] = rhs[r * cols + j].clone() - factor.clone() * v;
                }
            }
        }
    }

    let mut x = vec![T::zero(); n * cols];
    for i in (0..n).rev() {
        let pivot = band[at(i, i)].clone();
        for j in 0..cols {
            let mut acc = rhs[i * cols + j].clone();
            for c in i + 1..n.min(i + bw + 1) {
                let a = band[at(i, c)].clone();
                if !a.is_zero() {
                    acc = acc - a * x[c * cols + j].clone();
                }
            }
            x[i * cols + j] = acc / pivot.clone();
        }
    }
    x
}

fn root_row<T: Clone>(all: &[T], cols: usize, floor: u32) -> Vec<T> {
    let root = floor as usize;
    all[root * cols..(root + 1) * cols].to_vec()
}

fn absorption_residual(spec: &LatticeChainSpec, probs: &[f64], all: &[f64], top: i64, floor: u32) -> f64 {
    let lo = -i64::from(floor);
    let n = (top - lo) as usize;
    let cols = spec.max_up() as usize + 1;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let s = lo + i as i64;
        for j in 0..cols {
            let mut r = all[i * cols + j];
            for ((k, _), p) in spec.steps.iter().zip(probs) {
                let target = s + k;
                let v = if target >= top {
                    f64::from(u8::from(j + 1 < cols && (target - top) as usize == j))
                } else if target < lo {
                    f64::from(u8::from(j + 1 == cols))
                } else {
                    all[(target - lo) as usize * cols + j]
                };
                r -= p * v;
            }
            worst = worst.max(r.abs());
        }
    }
    worst
}

/// Both sides of `Q^b(A) = int Q^c(dx) Q^{b-x}(A - x)`, evaluated exactly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentitySides {
    pub h: f64,
    /// Lattice index -> mass of `Q^b`.
    pub lhs: BTreeMap<i64, Scalar>,
    /// Lattice index -> mass of the composition.
    pub rhs: BTreeMap<i64, Scalar>,
    pub lost_mass_bound: f64,
}

impl IdentitySides {
    pub fn max_abs_difference(&self) -> f64 {
        let zero = Scalar::zero();
        self.lhs
            .keys()
            .chain(self.rhs.keys())
            .map(|k| {
                let l = self.lhs.get(k).unwrap_or(&zero);
                let r = self.rhs.get(k).unwrap_or(&zero);
                l.sub(r).abs().value()
            })
            .fold(0.0, f64::max)
    }
}

pub fn exact_identity(spec: &LatticeChainSpec, b: f64, c: f64) -> Result<IdentitySides> {
    if !(c > 0.0 && c < b) {
        return Err(Error::InvalidParameter(format!("identity requires 0 < c < b, got c={c}, b={b}")));
    }
    let h = spec.h.value();
    let direct = exact_passage_law(spec, b)?;
    let first = exact_passage_law(spec, c)?;
    let mut lost = direct.lost_mass_bound + first.lost_mass_bound;
    let lhs: BTreeMap<i64, Scalar> = direct.atoms.iter().map(|a| (a.index, a.mass.clone())).collect();
    let mut rhs: BTreeMap<i64, Scalar> = BTreeMap::new();
    let mut add = |idx: i64, m: Scalar| {
        let e = rhs.entry(idx).or_insert_with(Scalar::zero);
        *e = e.add(&m);
    };
    for a in &first.atoms {
        let remaining = b - a.position;
        if remaining <= 0.0 {
            add(a.index, a.mass.clone());
            continue;
        }
        let second = exact_passage_law(spec, remaining)?;
        lost += a.mass.value() * second.lost_mass_bound;
        for s in &second.atoms {
            add(a.index + s.index, a.mass.mul(&s.mass));
        }
    }
    Ok(IdentitySides {
        h,
        lhs,
        rhs,
        lost_mass_bound: lost,
    })
}

/// Probability of ever reaching `level` from a position `start` on the lattice.
pub fn passage_probability_from(spec: &LatticeChainSpec, start: f64, level: f64) -> Result<f64> {
    let gap = level - start;
    if gap <= 0.0 {
        return Ok(1.0);
    }
    let p = exact_passage_probability(spec, gap)?;
    Ok((p.value.value() + p.error_bound).min(1.0))
}
