//! Lévy triplets, jump measures and the overshoot classifier.
//!
//! A process has almost surely constant positions at first passage exactly
//! when it has no positive jumps, or when it is a compound Poisson chain on
//! a lattice `hZ` whose only upward jump is `+h`. [`classify`] decides which
//! of the two (if either) a triplet falls into, and
//! [`predicted_passage_position`] returns the forced passage position.

use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use num_traits::ToPrimitive;

use crate::scalar::{rational_gcd, rational_is_integer, rational_to_f64, Scalar};

/// Tolerance used for lattice detection when some atom is not exact.
pub const DEFAULT_FLOAT_LATTICE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cutoff {
    /// No compensation; only for finite jump measures.
    Zero,
    /// Compensates jumps with `|x| <= 1`.
    UnitBall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub size: Scalar,
    pub rate: Scalar,
}

impl Atom {
    pub fn new(size: impl Into<Scalar>, rate: impl Into<Scalar>) -> Self {
        Self {
            size: size.into(),
            rate: rate.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Positive,
    Negative,
}

/// Magnitude window `(lo, hi]` on one side of the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub const FULL: Window = Window {
        lo: 0.0,
        hi: f64::INFINITY,
    };
    pub const EMPTY: Window = Window { lo: 0.0, hi: 0.0 };

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn intersect(&self, lo: f64, hi: f64) -> Window {
        Window {
            lo: self.lo.max(lo),
            hi: self.hi.min(hi),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailKind {
    /// Density `c |x|^{-1-alpha}` on each side.
    Stable { alpha: f64 },
}

/// Parametric infinite-activity part of a jump measure, possibly restricted
/// to magnitude windows (which is how truncation is represented).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFamily {
    #[serde(flatten)]
    pub kind: TailKind,
    pub c_pos: f64,
    pub c_neg: f64,
    #[serde(default = "full_window")]
    pub pos: Window,
    #[serde(default = "full_window")]
    pub neg: Window,
}

fn full_window() -> Window {
    Window::FULL
}

impl TailFamily {
    pub fn stable(alpha: f64, c_pos: f64, c_neg: f64) -> Self {
        Self {
            kind: TailKind::Stable { alpha },
            c_pos,
            c_neg,
            pos: Window::FULL,
            neg: Window::FULL,
        }
    }

    pub fn activity_index(&self) -> f64 {
        match self.kind {
            TailKind::Stable { alpha } => alpha,
        }
    }

    fn side(&self, side: Side) -> (f64, Window) {
        match side {
            Side::Positive => (self.c_pos, self.pos),
            Side::Negative => (self.c_neg, self.neg),
        }
    }

    pub fn with_window(&self, side: Side, window: Window) -> Self {
        let mut out = self.clone();
        match side {
            Side::Positive => out.pos = window,
            Side::Negative => out.neg = window,
        }
        out
    }

    fn effective(&self, side: Side, lo: f64, hi: f64) -> Option<(f64, f64, f64)> {
        let (c, w) = self.side(side);
        let w = w.intersect(lo, hi);
        if c == 0.0 || w.is_empty() {
            None
        } else {
            Some((c, w.lo, w.hi))
        }
    }

    /// `lambda` of the magnitudes in `(lo, hi]` on one side.
    pub fn mass(&self, side: Side, lo: f64, hi: f64) -> f64 {
        let alpha = self.activity_index();
        match self.effective(side, lo, hi) {
            None => 0.0,
            Some((_, 0.0, _)) => f64::INFINITY,
            Some((c, a, b)) => c * (a.powf(-alpha) - b.powf(-alpha)) / alpha,
        }
    }

    /// Signed first moment over magnitudes in `(lo, hi]` on one side.
    /// Only called on windows bounded away from zero and infinity.
    pub fn first_moment(&self, side: Side, lo: f64, hi: f64) -> f64 {
        let alpha = self.activity_index();
        let m = match self.effective(side, lo, hi) {
            None => 0.0,
            Some((c, a, b)) => {
                if (alpha - 1.0).abs() < 1e-12 {
                    c * (b / a).ln()
                } else {
                    c * (b.powf(1.0 - alpha) - a.powf(1.0 - alpha)) / (1.0 - alpha)
                }
            }
        };
        match side {
            Side::Positive => m,
            Side::Negative => -m,
        }
    }

    /// Second moment over magnitudes in `(lo, hi]` on one side.
    pub fn second_moment(&self, side: Side, lo: f64, hi: f64) -> f64 {
        let alpha = self.activity_index();
        match self.effective(side, lo, hi) {
            None => 0.0,
            Some((c, a, b)) => c * (b.powf(2.0 - alpha) - a.powf(2.0 - alpha)) / (2.0 - alpha),
        }
    }

    /// Inverse-CDF draw of a magnitude from the normalised restriction to
    /// `(lo, hi]`, `lo > 0`.
    pub fn sample_magnitude(&self, side: Side, lo: f64, hi: f64, u: f64) -> f64 {
        let alpha = self.activity_index();
        let (_, a, b) = self
            .effective(side, lo, hi)
            .expect("sampling from an empty tail window");
        let ta = a.powf(-alpha);
        let tb = b.powf(-alpha);
        (ta - u * (ta - tb)).powf(-1.0 / alpha)
    }

    pub fn total_mass(&self) -> f64 {
        self.mass(Side::Positive, 0.0, f64::INFINITY) + self.mass(Side::Negative, 0.0, f64::INFINITY)
    }

    pub fn has_positive_mass(&self) -> bool {
        self.mass(Side::Positive, 0.0, f64::INFINITY) > 0.0
    }

    fn violations(&self, out: &mut Vec<Violation>) {
        let alpha = self.activity_index();
        if !(alpha > 0.0 && alpha < 2.0) {
            // outside (0, 2) the density does not integrate min(1, x^2)
            out.push(Violation::new("tail_alpha", format!("stable activity index {alpha} outside (0, 2)")));
        }
        for (name, c) in [("c_pos", self.c_pos), ("c_neg", self.c_neg)] {
            if !(c.is_finite() && c >= 0.0) {
                out.push(Violation::new("tail_constant", format!("tail {name} must be finite and >= 0")));
            }
        }
        for (name, w) in [("pos", self.pos), ("neg", self.neg)] {
            if w.lo.is_nan() || w.hi.is_nan() || w.lo < 0.0 {
                out.push(Violation::new("tail_window", format!("tail {name} window is malformed")));
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct JumpMeasure {
    pub atoms: Vec<Atom>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailFamily>,
}

impl JumpMeasure {
    pub fn atoms(atoms: Vec<Atom>) -> Self {
        Self { atoms, tail: None }
    }

    pub fn total_finite_rate(&self) -> f64 {
        self.atoms.iter().map(|a| a.rate.value()).sum()
    }

    /// Total mass including the tail; infinite for infinite activity.
    pub fn total_mass(&self) -> f64 {
        self.total_finite_rate() + self.tail.as_ref().map_or(0.0, TailFamily::total_mass)
    }

    pub fn is_finite_activity(&self) -> bool {
        self.total_mass().is_finite()
    }

    pub fn positive_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter().filter(|a| a.size.is_positive())
    }

    pub fn has_positive_mass(&self) -> bool {
        self.positive_atoms().next().is_some() || self.tail.as_ref().is_some_and(TailFamily::has_positive_mass)
    }
}

/// Missing fields default to zero, no jumps and the zero cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LevyTriplet {
    pub sigma2: Scalar,
    pub jumps: JumpMeasure,
    pub drift: Scalar,
    pub cutoff: Cutoff,
}

impl Default for LevyTriplet {
    fn default() -> Self {
        Self::compound_poisson(Vec::new())
    }
}

impl LevyTriplet {
    /// Pure compound Poisson process (zero cutoff, zero drift).
    pub fn compound_poisson(atoms: Vec<Atom>) -> Self {
        Self {
            sigma2: Scalar::zero(),
            jumps: JumpMeasure::atoms(atoms),
            drift: Scalar::zero(),
            cutoff: Cutoff::Zero,
        }
    }

    pub fn brownian(sigma2: impl Into<Scalar>, drift: impl Into<Scalar>) -> Self {
        Self {
            sigma2: sigma2.into(),
            jumps: JumpMeasure::default(),
            drift: drift.into(),
            cutoff: Cutoff::UnitBall,
        }
    }

    pub fn with_drift(mut self, drift: impl Into<Scalar>) -> Self {
        self.drift = drift.into();
        self
    }

    pub fn with_sigma2(mut self, sigma2: impl Into<Scalar>) -> Self {
        self.sigma2 = sigma2.into();
        self
    }

    pub fn with_cutoff(mut self, cutoff: Cutoff) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn with_tail(mut self, tail: TailFamily) -> Self {
        self.jumps.tail = Some(tail);
        self
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.value().max(0.0).sqrt()
    }

    /// Slope of the path between jumps for a finite-activity triplet, i.e.
    /// the drift under the zero cutoff. The stored drift is not modified.
    pub fn path_slope(&self) -> Option<Scalar> {
        if !self.jumps.is_finite_activity() {
            return None;
        }
        match self.cutoff {
            Cutoff::Zero => Some(self.drift.clone()),
            Cutoff::UnitBall => {
                let mut compensator = Scalar::zero();
                for a in &self.jumps.atoms {
                    if a.size.abs().value() <= 1.0 {
                        compensator = compensator.add(&a.size.mul(&a.rate));
                    }
                }
                if let Some(tail) = &self.jumps.tail {
                    let m = tail.first_moment(Side::Positive, 0.0, 1.0) + tail.first_moment(Side::Negative, 0.0, 1.0);
                    compensator = compensator.add(&Scalar::from_f64(m));
                }
                Some(self.drift.sub(&compensator))
            }
        }
    }

    /// `sigma^2 = 0`, finite non-zero jump mass, and no drift between jumps.
    pub fn is_compound_poisson(&self) -> bool {
        self.sigma2.is_zero()
            && self.jumps.total_mass() > 0.0
            && self.path_slope().is_some_and(|s| s.is_zero())
    }

    /// Multiplies space by `s > 0`.
    pub fn scaled(&self, s: &Scalar) -> Self {
        let jumps = JumpMeasure {
            atoms: self
                .jumps
                .atoms
                .iter()
                .map(|a| Atom {
                    size: a.size.mul(s),
                    rate: a.rate.clone(),
                })
                .collect(),
            tail: self.jumps.tail.as_ref().map(|t| {
                let f = s.value();
                let alpha = t.activity_index();
                let scale = |w: Window| Window {
                    lo: w.lo * f,
                    hi: w.hi * f,
                };
                TailFamily {
                    kind: t.kind,
                    c_pos: t.c_pos * f.powf(alpha),
                    c_neg: t.c_neg * f.powf(alpha),
                    pos: scale(t.pos),
                    neg: scale(t.neg),
                }
            }),
        };
        Self {
            sigma2: self.sigma2.mul(s).mul(s),
            jumps,
            drift: self.drift.mul(s),
            cutoff: self.cutoff,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: &'static str,
    pub message: String,
}

impl Violation {
    fn new(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, code: &str) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidTriplet(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msgs: Vec<&str> = self.violations.iter().map(|v| v.message.as_str()).collect();
        f.write_str(&msgs.join("; "))
    }
}

pub fn validate_triplet(t: &LevyTriplet) -> ValidationReport {
    let mut v = Vec::new();
    if !t.sigma2.value().is_finite() {
        v.push(Violation::new("sigma2_not_finite", "sigma2 not finite"));
    } else if t.sigma2.is_negative() {
        v.push(Violation::new("sigma2_negative", "sigma2 negative"));
    }
    if !t.drift.value().is_finite() {
        v.push(Violation::new("drift_not_finite", "drift not finite"));
    }
    for (i, a) in t.jumps.atoms.iter().enumerate() {
        if !a.size.value().is_finite() {
            v.push(Violation::new("atom_size_not_finite", format!("atom {i}: size not finite")));
        } else if a.size.is_zero() {
            v.push(Violation::new("atom_size_zero", format!("atom {i}: size is zero")));
        }
        if !(a.rate.is_positive() && a.rate.value().is_finite()) {
            v.push(Violation::new("atom_rate_not_positive", format!("atom {i}: rate must be positive and finite")));
        }
        if t.jumps.atoms[..i].iter().any(|b| b.size == a.size) {
            v.push(Violation::new("atom_size_duplicate", format!("atom {i}: duplicate size {}", a.size)));
        }
    }
    if let Some(tail) = &t.jumps.tail {
        tail.violations(&mut v);
        if t.cutoff == Cutoff::Zero {
            v.push(Violation::new("zero_cutoff_infinite_activity", "Zero cutoff with infinite activity"));
        }
    }
    ValidationReport { violations: v }
}

/// Fits `h > 0` with every atom size in `hZ` and the positive atoms equal to
/// `{h}`. With `tol == 0` the check is exact: rational inputs use their exact
/// value, floats their binary expansion.
pub fn lattice_fit(atoms: &[Atom], tol: f64) -> Option<Scalar> {
    if atoms.is_empty() {
        return None;
    }
    if tol == 0.0 {
        lattice_fit_exact(atoms)
    } else {
        lattice_fit_tol(atoms, tol)
    }
}

fn lattice_fit_exact(atoms: &[Atom]) -> Option<Scalar> {
    let sizes: Vec<BigRational> = atoms.iter().map(|a| a.size.to_rational_lossless()).collect::<Option<_>>()?;
    let mut positive = sizes.iter().filter(|s| num_traits::Signed::is_positive(*s));
    let h = positive.next()?.clone();
    if positive.any(|p| *p != h) {
        return None;
    }
    if !sizes.iter().all(|s| rational_is_integer(&(s / &h))) {
        return None;
    }
    let exact_input = atoms.iter().all(|a| a.size.is_exact());
    Some(if exact_input {
        Scalar::from_rational(h)
    } else {
        Scalar::from_f64(rational_to_f64(&h))
    })
}

fn lattice_fit_tol(atoms: &[Atom], tol: f64) -> Option<Scalar> {
    let h_atom = atoms
        .iter()
        .filter(|a| a.size.value() > 0.0)
        .min_by(|a, b| a.size.value().total_cmp(&b.size.value()))?;
    let h = h_atom.size.value();
    for a in atoms {
        let s = a.size.value();
        if s > 0.0 && (s - h).abs() > tol {
            return None;
        }
        let k = (s / h).round();
        if (s - k * h).abs() > tol {
            return None;
        }
    }
    Some(h_atom.size.clone())
}

/// Largest multiple allowed when expressing atoms on their common lattice.
pub const MAX_LATTICE_MULTIPLE: i64 = 1 << 24;

/// Common spacing of the atoms: the largest `h` with every size in `hZ`,
/// together with each size as an integer multiple of `h`. Floats enter by
/// their exact binary value; `None` when the multiples would be unreasonably
/// large (in practice: an irrational-looking atom).
pub fn lattice_spacing(atoms: &[Atom]) -> Option<(Scalar, Vec<i64>)> {
    let sizes: Vec<BigRational> = atoms.iter().map(|a| a.size.to_rational_lossless()).collect::<Option<_>>()?;
    let h = rational_gcd(sizes.iter())?;
    let mut steps = Vec::with_capacity(sizes.len());
    for s in &sizes {
        let k = (s / &h).to_integer().to_i64()?;
        if k.abs() > MAX_LATTICE_MULTIPLE {
            return None;
        }
        steps.push(k);
    }
    let exact_input = atoms.iter().all(|a| a.size.is_exact());
    let h = if exact_input {
        Scalar::from_rational(h)
    } else {
        Scalar::from_f64(rational_to_f64(&h))
    };
    Some((h, steps))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum ClassVariant {
    SpectrallyNegative,
    UpwardsSkipFree { h: f64 },
    NonDeterministicOvershoots,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rationale {
    NoPositiveJumps,
    SkipFreeLattice,
    DiffusionPresent,
    InfiniteActivity,
    DriftBetweenJumps,
    ContinuousPositiveSupport,
    SeveralPositiveAtoms,
    OffLattice,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessClass {
    pub variant: ClassVariant,
    pub rationale: Rationale,
}

impl ProcessClass {
    pub fn name(&self) -> &'static str {
        match self.variant {
            ClassVariant::SpectrallyNegative => "SpectrallyNegative",
            ClassVariant::UpwardsSkipFree { .. } => "UpwardsSkipFree",
            ClassVariant::NonDeterministicOvershoots => "NonDeterministicOvershoots",
        }
    }

    /// Whether passage positions are almost surely constant.
    pub fn has_deterministic_overshoots(&self) -> bool {
        !matches!(self.variant, ClassVariant::NonDeterministicOvershoots)
    }
}

impl fmt::Display for ProcessClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.variant {
            ClassVariant::UpwardsSkipFree { h } => write!(f, "UpwardsSkipFree(h={h})"),
            _ => f.write_str(self.name()),
        }
    }
}

/// Classifies with the default tolerance: exact when every atom size is
/// exact, [`DEFAULT_FLOAT_LATTICE_TOL`] otherwise.
pub fn classify(t: &LevyTriplet) -> Result<ProcessClass> {
    let tol = if t.jumps.atoms.iter().all(|a| a.size.is_exact()) {
        0.0
    } else {
        DEFAULT_FLOAT_LATTICE_TOL
    };
    classify_with_tol(t, tol)
}

pub fn classify_with_tol(t: &LevyTriplet, tol: f64) -> Result<ProcessClass> {
    validate_triplet(t).into_result()?;
    let class = |variant, rationale| ProcessClass { variant, rationale };
    use ClassVariant::*;
    if !t.jumps.has_positive_mass() {
        return Ok(class(SpectrallyNegative, Rationale::NoPositiveJumps));
    }
    if !t.sigma2.is_zero() {
        return Ok(class(NonDeterministicOvershoots, Rationale::DiffusionPresent));
    }
    if !t.jumps.is_finite_activity() {
        return Ok(class(NonDeterministicOvershoots, Rationale::InfiniteActivity));
    }
    if !t.path_slope().is_some_and(|s| s.is_zero()) {
        return Ok(class(NonDeterministicOvershoots, Rationale::DriftBetweenJumps));
    }
    if t.jumps.tail.as_ref().is_some_and(TailFamily::has_positive_mass) {
        return Ok(class(NonDeterministicOvershoots, Rationale::ContinuousPositiveSupport));
    }
    if t.jumps.positive_atoms().count() > 1 && lattice_fit(&t.jumps.atoms, tol).is_none() {
        return Ok(class(NonDeterministicOvershoots, Rationale::SeveralPositiveAtoms));
    }
    match lattice_fit(&t.jumps.atoms, tol) {
        Some(h) if t.jumps.tail.is_none() => Ok(class(UpwardsSkipFree { h: h.value() }, Rationale::SkipFreeLattice)),
        _ => Ok(class(NonDeterministicOvershoots, Rationale::OffLattice)),
    }
}

/// Smallest `k` with `k * h >= x`, evaluated in the same floating-point
/// expression (`k as f64 * h`) the lattice simulator uses for positions.
pub fn lattice_ceil(x: f64, h: f64) -> i64 {
    let mut k = (x / h).ceil() as i64;
    while ((k - 1) as f64) * h >= x {
        k -= 1;
    }
    while (k as f64) * h < x {
        k += 1;
    }
    k
}

/// Position at first entrance into `[x, inf)`, when it is forced.
pub fn predicted_passage_position(class: &ProcessClass, x: f64) -> Option<f64> {
    if x <= 0.0 {
        return Some(0.0);
    }
    match class.variant {
        ClassVariant::SpectrallyNegative => Some(x),
        ClassVariant::UpwardsSkipFree { h } => Some(lattice_ceil(x, h) as f64 * h),
        ClassVariant::NonDeterministicOvershoots => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cp(atoms: &[(i64, i64, i64)]) -> LevyTriplet {
        // (size, rate numerator, rate denominator)
        LevyTriplet::compound_poisson(atoms.iter().map(|&(s, n, d)| Atom::new(s, Scalar::ratio(n, d))).collect())
    }

    fn sizes(xs: &[Scalar]) -> Vec<Atom> {
        xs.iter().map(|s| Atom::new(s.clone(), 1i64)).collect()
    }

    #[test]
    fn validate_examples() {
        assert!(validate_triplet(&cp(&[(1, 1, 1)])).is_valid());

        let t = cp(&[(1, 1, 1)]).with_sigma2(-1i64);
        assert!(validate_triplet(&t).has("sigma2_negative"));

        let t = cp(&[(1, 1, 1)]).with_tail(TailFamily::stable(0.5, 1.0, 0.0));
        let report = validate_triplet(&t);
        assert!(report.has("zero_cutoff_infinite_activity"));
        assert!(report.to_string().contains("Zero cutoff with infinite activity"));
    }

    #[test]
    fn validate_reports_every_problem() {
        let mut t = cp(&[(1, 1, 1), (1, 1, 2), (0, 1, 1)]).with_sigma2(-1i64);
        t.jumps.atoms.push(Atom::new(2i64, Scalar::integer(-1)));
        let r = validate_triplet(&t);
        assert!(r.has("sigma2_negative"));
        assert!(r.has("atom_size_duplicate"));
        assert!(r.has("atom_size_zero"));
        assert!(r.has("atom_rate_not_positive"));
        assert_eq!(r.violations.len(), 4);
    }

    #[test]
    fn tail_alpha_out_of_range() {
        let t = LevyTriplet::brownian(0i64, 0i64).with_tail(TailFamily::stable(2.5, 1.0, 0.0));
        assert!(validate_triplet(&t).has("tail_alpha"));
    }

    #[test]
    fn lattice_fit_examples() {
        let h = lattice_fit(&sizes(&[1i64.into(), (-2i64).into(), (-7i64).into()]), 0.0).unwrap();
        assert_eq!(h, Scalar::integer(1));

        let h = lattice_fit(&sizes(&[Scalar::parse("0.5").unwrap(), Scalar::parse("-1.5").unwrap()]), 0.0).unwrap();
        assert_eq!(h, Scalar::ratio(1, 2));

        let irr = sizes(&[1i64.into(), Scalar::from_f64(-std::f64::consts::SQRT_2)]);
        assert!(lattice_fit(&irr, 1e-12).is_none());
        assert!(lattice_fit(&irr, 0.0).is_none());
    }

    #[test]
    fn lattice_fit_rejects_two_positive_atoms_and_no_positive_atom() {
        assert!(lattice_fit(&sizes(&[1i64.into(), 2i64.into()]), 0.0).is_none());
        assert!(lattice_fit(&sizes(&[(-1i64).into(), (-2i64).into()]), 0.0).is_none());
        assert!(lattice_fit(&sizes(&[2i64.into(), (-3i64).into()]), 0.0).is_none());
    }

    #[test]
    fn lattice_fit_tolerates_float_noise() {
        let atoms = sizes(&[Scalar::from_f64(0.1), Scalar::from_f64(-0.3)]);
        assert!(lattice_fit(&atoms, 0.0).is_none());
        assert_eq!(lattice_fit(&atoms, 1e-12).unwrap().value(), 0.1);
    }

    #[test]
    fn classify_examples() {
        let bm = LevyTriplet::brownian(1i64, Scalar::ratio(-1, 2));
        assert_eq!(classify(&bm).unwrap().variant, ClassVariant::SpectrallyNegative);

        let chain = cp(&[(1, 1, 2), (-2, 1, 2), (-7, 1, 10)]);
        assert_eq!(classify(&chain).unwrap().variant, ClassVariant::UpwardsSkipFree { h: 1.0 });

        let two_up = cp(&[(1, 1, 2), (2, 1, 2)]);
        let c = classify(&two_up).unwrap();
        assert_eq!(c.variant, ClassVariant::NonDeterministicOvershoots);
        assert_eq!(c.rationale, Rationale::SeveralPositiveAtoms);

        let diff = cp(&[(1, 1, 1)]).with_sigma2(Scalar::ratio(1, 10)).with_cutoff(Cutoff::UnitBall);
        let c = classify(&diff).unwrap();
        assert_eq!(c.variant, ClassVariant::NonDeterministicOvershoots);
        assert_eq!(c.rationale, Rationale::DiffusionPresent);
    }

    #[test]
    fn classify_unit_ball_chain_uses_compensated_slope() {
        // drift 1 under the unit-ball cutoff exactly compensates the +1 atom
        let t = cp(&[(1, 1, 1), (-3, 1, 1)]).with_cutoff(Cutoff::UnitBall).with_drift(1i64);
        assert_eq!(classify(&t).unwrap().variant, ClassVariant::UpwardsSkipFree { h: 1.0 });
        let t = cp(&[(1, 1, 1), (-3, 1, 1)]).with_cutoff(Cutoff::UnitBall);
        assert_eq!(classify(&t).unwrap().rationale, Rationale::DriftBetweenJumps);
    }

    #[test]
    fn classify_drifting_chain_and_tails() {
        let t = cp(&[(1, 1, 1)]).with_drift(Scalar::ratio(1, 10));
        assert_eq!(classify(&t).unwrap().rationale, Rationale::DriftBetweenJumps);

        let sn = cp(&[(-1, 1, 1)]).with_drift(2i64);
        assert_eq!(classify(&sn).unwrap().variant, ClassVariant::SpectrallyNegative);

        let stable_up = LevyTriplet::brownian(0i64, 0i64).with_tail(TailFamily::stable(1.5, 1.0, 0.0));
        assert_eq!(classify(&stable_up).unwrap().rationale, Rationale::InfiniteActivity);

        let stable_down = LevyTriplet::brownian(0i64, 0i64).with_tail(TailFamily::stable(1.5, 0.0, 1.0));
        assert_eq!(classify(&stable_down).unwrap().variant, ClassVariant::SpectrallyNegative);

        assert!(classify(&cp(&[(1, 1, 1)]).with_sigma2(-1i64)).is_err());
    }

    #[test]
    fn predictor_examples() {
        let usf = ProcessClass {
            variant: ClassVariant::UpwardsSkipFree { h: 1.0 },
            rationale: Rationale::SkipFreeLattice,
        };
        let sn = ProcessClass {
            variant: ClassVariant::SpectrallyNegative,
            rationale: Rationale::NoPositiveJumps,
        };
        let nd = ProcessClass {
            variant: ClassVariant::NonDeterministicOvershoots,
            rationale: Rationale::OffLattice,
        };
        assert_eq!(predicted_passage_position(&usf, 2.5), Some(3.0));
        assert_eq!(predicted_passage_position(&sn, 4.2), Some(4.2));
        for c in [&usf, &sn, &nd] {
            assert_eq!(predicted_passage_position(c, -1.0), Some(0.0));
        }
        assert_eq!(predicted_passage_position(&nd, 1.0), None);
    }

    #[test]
    fn lattice_ceil_matches_float_products() {
        assert_eq!(lattice_ceil(0.3, 0.1), 3);
        assert!(3.0 * 0.1 >= 0.3);
        assert_eq!(lattice_ceil(2.0, 1.0), 2);
        assert_eq!(lattice_ceil(2.0000001, 1.0), 3);
        assert_eq!(lattice_ceil(-1.5, 0.5), -3);
    }

    fn arb_class_triplet() -> impl Strategy<Value = LevyTriplet> {
        let atom = (prop_oneof![-6i64..=-1, 1i64..=3], 1i64..=9);
        (proptest::collection::vec(atom, 1..5), 0i64..=2, -2i64..=2, 1i64..=4).prop_map(|(raw, sig, drift, den)| {
            let mut atoms: Vec<Atom> = Vec::new();
            for (s, r) in raw {
                let size = Scalar::ratio(s, den);
                if !atoms.iter().any(|a| a.size == size) {
                    atoms.push(Atom::new(size, Scalar::ratio(r, 10)));
                }
            }
            LevyTriplet::compound_poisson(atoms)
                .with_sigma2(if sig == 2 { Scalar::ratio(1, 2) } else { Scalar::zero() })
                .with_drift(if drift.abs() == 2 { Scalar::ratio(drift, 3) } else { Scalar::zero() })
        })
    }

    proptest! {
        #[test]
        fn classify_scales_with_space(t in arb_class_triplet(), num in 1i64..7, den in 1i64..5) {
            let s = Scalar::ratio(num, den);
            let before = classify(&t).unwrap().variant;
            let after = classify(&t.scaled(&s)).unwrap().variant;
            match before {
                ClassVariant::UpwardsSkipFree { h } => {
                    let ClassVariant::UpwardsSkipFree { h: h2 } = after else {
                        panic!("skip-free class not preserved: {after:?}");
                    };
                    prop_assert!((h2 - h * s.value()).abs() <= 1e-12 * h2.abs());
                }
                other => prop_assert_eq!(other, after),
            }
        }

        #[test]
        fn lattice_fit_ignores_order(t in arb_class_triplet(), rot in 0usize..5) {
            let mut atoms = t.jumps.atoms.clone();
            let a = lattice_fit(&atoms, 0.0);
            let n = atoms.len();
            atoms.rotate_left(rot % n);
            atoms.reverse();
            prop_assert_eq!(a, lattice_fit(&atoms, 0.0));
        }

        #[test]
        fn skip_free_overshoot_below_h(hn in 1i64..6, hd in 1i64..6, x in 0.0001f64..50.0) {
            let h = Scalar::ratio(hn, hd).value();
            let class = ProcessClass { variant: ClassVariant::UpwardsSkipFree { h }, rationale: Rationale::SkipFreeLattice };
            let p = predicted_passage_position(&class, x).unwrap();
            let over = p - x;
            prop_assert!(over >= 0.0);
            prop_assert!(over < h + 1e-9);
            let k = (x / h).round() as i64;
            if (k as f64) * h == x {
                prop_assert_eq!(over, 0.0);
            }
        }
    }

    #[test]
    fn lattice_spacing_of_mixed_atoms() {
        let (h, steps) = lattice_spacing(&sizes(&[1i64.into(), 3i64.into()])).unwrap();
        assert_eq!(h, Scalar::integer(1));
        assert_eq!(steps, vec![1, 3]);
        let (h, steps) = lattice_spacing(&sizes(&[Scalar::ratio(2, 3), Scalar::ratio(-1, 2)])).unwrap();
        assert_eq!(h, Scalar::ratio(1, 6));
        assert_eq!(steps, vec![4, -3]);
        assert!(lattice_spacing(&sizes(&[1i64.into(), Scalar::from_f64(-std::f64::consts::SQRT_2)])).is_none());
    }

    #[test]
    fn variants_are_exclusive_over_examples() {
        let zoo = [
            LevyTriplet::brownian(1i64, 0i64),
            cp(&[(1, 3, 10), (-1, 7, 10)]),
            cp(&[(1, 1, 2), (2, 1, 2)]),
            cp(&[(-1, 1, 1)]).with_drift(2i64),
        ];
        for t in &zoo {
            let c = classify(t).unwrap();
            let n = [
                matches!(c.variant, ClassVariant::SpectrallyNegative),
                matches!(c.variant, ClassVariant::UpwardsSkipFree { .. }),
                matches!(c.variant, ClassVariant::NonDeterministicOvershoots),
            ]
            .iter()
            .filter(|b| **b)
            .count();
            assert_eq!(n, 1);
        }
    }
}
