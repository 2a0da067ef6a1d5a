//! Experiment runners and the built-in catalog of processes.

use std::time::Instant;

use serde_json::json;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};
use crate::measures::{
    convolution_check, default_delta, estimate_law, multi_level_consistency, triviality_test, BinSpec,
    ConsistencyReport, EmpiricalLaw, Verdict,
};
use crate::model::{classify, predicted_passage_position, Atom, ClassVariant, JumpMeasure, LevyTriplet, ProcessClass};
use crate::oracle::{exact_identity, exact_passage_law, ExactLaw, LatticeChainSpec};
use crate::pathsim::{supremum_jump_diagnostic, Engine, SimConfig, Simulator};
use crate::report::{default_histogram_bins, histogram_table, law_table, Cell, ReportBundle, Table};
use crate::rng::{run_replicates, StreamFamily};
use crate::scalar::Scalar;

pub const DEFAULT_ZOO_LEVELS: [f64; 3] = [0.5, 1.5, 2.5];

#[derive(Debug, Clone, PartialEq)]
pub struct ZooEntry {
    pub name: &'static str,
    pub triplet: LevyTriplet,
    /// Grid step override for grid-engine entries.
    pub dt: Option<f64>,
}

fn cp(atoms: &[(i64, i64, i64)]) -> LevyTriplet {
    LevyTriplet::compound_poisson(atoms.iter().map(|&(s, n, d)| Atom::new(s, Scalar::ratio(n, d))).collect())
}

pub fn zoo_catalog() -> Vec<ZooEntry> {
    let entry = |name, triplet| ZooEntry { name, triplet, dt: None };
    vec![
        entry("spectrally_negative_cp", cp(&[(-1, 1, 1)]).with_drift(2i64)),
        ZooEntry {
            dt: Some(1e-3),
            ..entry("brownian_drift", LevyTriplet::brownian(1i64, Scalar::ratio(1, 2)))
        },
        entry("skip_free_up", cp(&[(1, 7, 10), (-1, 3, 10)])),
        entry("skip_free_down", cp(&[(1, 3, 10), (-1, 7, 10)])),
        entry("two_positive_atoms", cp(&[(1, 1, 2), (2, 1, 2)])),
        entry(
            "irrational_atoms",
            LevyTriplet::compound_poisson(vec![
                Atom::new(1i64, Scalar::ratio(7, 10)),
                Atom::new(-std::f64::consts::SQRT_2, Scalar::ratio(3, 10)),
            ]),
        ),
        entry("monotone_chain", cp(&[(1, 1, 2), (3, 1, 2)])),
        ZooEntry {
            dt: Some(1e-3),
            ..entry(
                "brownian_plus_jump",
                LevyTriplet {
                    jumps: JumpMeasure::atoms(vec![Atom::new(Scalar::ratio(3, 2), 1i64)]),
                    ..LevyTriplet::brownian(1i64, 0i64)
                },
            )
        },
    ]
}

#[derive(Debug, Clone)]
pub struct ZooOptions {
    pub levels: Vec<f64>,
    pub n: usize,
    pub sim: SimConfig,
    pub delta: Option<f64>,
    pub min_crossed: u64,
    pub diag_paths: usize,
    pub diag_horizon: f64,
}

impl Default for ZooOptions {
    fn default() -> Self {
        Self {
            levels: DEFAULT_ZOO_LEVELS.to_vec(),
            n: 10_000,
            sim: SimConfig::default(),
            delta: None,
            min_crossed: 30,
            diag_paths: 1000,
            diag_horizon: 5.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ZooRow {
    pub name: String,
    pub class: ProcessClass,
    pub consistency: ConsistencyReport,
    pub predicted: Vec<Option<f64>>,
    pub theorem_consistent: bool,
    /// `None` when the entry has no exact oracle.
    pub oracle_agreement: Option<bool>,
    /// Fraction of diagnostic paths whose running supremum jumps.
    pub sup_jump_fraction: f64,
}

impl ZooRow {
    pub fn delta(&self) -> f64 {
        self.consistency.levels.first().map_or(0.0, |l| l.verdict.delta)
    }
}

/// Do the per-level verdicts agree with the classifier?
///
/// Deterministic classes must never look non-trivial and their trivial
/// points must sit at the predicted position; the remaining class must show
/// a decided non-trivial level.
pub fn theorem_consistent(class: &ProcessClass, report: &ConsistencyReport, predicted: &[Option<f64>]) -> bool {
    if !report.homogeneous {
        return false;
    }
    if class.has_deterministic_overshoots() {
        report.levels.iter().zip(predicted).all(|(l, p)| match (l.verdict.verdict, p) {
            (Verdict::NonTrivial, _) => false,
            (Verdict::Trivial { point: Some(x) }, Some(p)) => (x - p).abs() <= l.verdict.delta,
            _ => true,
        })
    } else {
        report.any_non_trivial()
    }
}

/// Empirical masses against the exact law, atom by atom: within four
/// standard errors plus censored mass plus the certified lost mass.
pub fn oracle_agrees(law: &EmpiricalLaw, exact: &ExactLaw) -> bool {
    let n = law.n_replicates as f64;
    let slack = law.censored_mass() + exact.lost_mass_bound;
    let exact_ok = exact.atoms.iter().all(|a| {
        let p = a.mass.value();
        (law.mass_at(a.position) - p).abs() <= 4.0 * (p * (1.0 - p) / n).sqrt() + slack
    });
    let no_strays = law.atoms.iter().all(|a| exact.atoms.iter().any(|e| e.position == a.position));
    exact_ok && no_strays
}

fn oracle_for(t: &LevyTriplet) -> Option<LatticeChainSpec> {
    LatticeChainSpec::from_triplet(t).ok()
}

pub fn run_zoo_entry(entry: &ZooEntry, opts: &ZooOptions) -> Result<ZooRow> {
    let mut sim = opts.sim.clone();
    if let Some(dt) = entry.dt {
        sim.dt = dt;
    }
    let class = classify(&entry.triplet)?;
    let consistency = multi_level_consistency(&entry.triplet, &opts.levels, opts.n, &sim, opts.delta, opts.min_crossed)?;
    let predicted: Vec<Option<f64>> = opts.levels.iter().map(|&x| predicted_passage_position(&class, x)).collect();
    let oracle_agreement = match oracle_for(&entry.triplet) {
        Some(spec) => {
            let mut ok = true;
            for l in &consistency.levels {
                match exact_passage_law(&spec, l.law.level) {
                    Ok(exact) => ok &= oracle_agrees(&l.law, &exact),
                    Err(Error::TruncationNotCertified { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
            Some(ok)
        }
        None => None,
    };
    let diag_cfg = SimConfig {
        horizon: opts.diag_horizon,
        ..sim
    };
    let diag_sim = Simulator::new(&entry.triplet, &diag_cfg)?;
    let family = StreamFamily::new(diag_cfg.seed).child(&format!("zoo-diag/{}", entry.name));
    let jumped = run_replicates(opts.diag_paths, diag_cfg.workers, |i| {
        supremum_jump_diagnostic(&diag_sim.path(&mut family.stream(i))) > 0.0
    });
    let sup_jump_fraction = jumped.iter().filter(|j| **j).count() as f64 / opts.diag_paths.max(1) as f64;
    Ok(ZooRow {
        name: entry.name.to_string(),
        theorem_consistent: theorem_consistent(&class, &consistency, &predicted),
        class,
        consistency,
        predicted,
        oracle_agreement,
        sup_jump_fraction,
    })
}

pub fn run_zoo(opts: &ZooOptions) -> Result<Vec<ZooRow>> {
    zoo_catalog().iter().map(|e| run_zoo_entry(e, opts)).collect()
}

pub fn zoo_table(rows: &[ZooRow], levels: &[f64]) -> Table {
    let mut t = Table::new(
        "zoo",
        &[
            "process",
            "class",
            "rationale",
            "engine",
            "delta",
            "verdicts",
            "support_points",
            "support_diameter",
            "homogeneous",
            "theorem_consistent",
            "oracle_agreement",
            "sup_jump_fraction",
        ],
    )
    .meta("levels", levels.iter().map(f64::to_string).collect::<Vec<_>>().join(";"));
    for r in rows {
        let verdicts: Vec<String> = r.consistency.levels.iter().map(|l| l.verdict.verdict.label()).collect();
        let support_points = r.consistency.levels.iter().map(|l| l.law.atoms.len()).max().unwrap_or(0);
        let diameter = r.consistency.levels.iter().map(|l| l.verdict.support_diameter).fold(0.0, f64::max);
        t.push(vec![
            r.name.as_str().into(),
            r.class.to_string().into(),
            rationale_name(&r.class).into(),
            engine_name(r.consistency.engine).into(),
            r.delta().into(),
            verdicts.join(";").into(),
            support_points.into(),
            diameter.into(),
            r.consistency.homogeneous.into(),
            r.theorem_consistent.into(),
            r.oracle_agreement.into(),
            r.sup_jump_fraction.into(),
        ]);
    }
    t
}

fn engine_name(e: Engine) -> &'static str {
    match e {
        Engine::EventDriven => "event_driven",
        Engine::Grid => "grid",
    }
}

fn rationale_name(c: &ProcessClass) -> String {
    serde_json::to_value(c.rationale)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

fn verdict_point(v: &Verdict) -> Cell {
    match v {
        Verdict::Trivial { point: Some(p) } => Cell::Num(*p),
        _ => Cell::Empty,
    }
}

/// Runs the configured experiment and assembles its report files.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ReportBundle> {
    cfg.validate()?;
    let start = Instant::now();
    let mut bundle = ReportBundle::new(cfg.experiment, cfg.format);
    bundle.line(format!("experiment: {}", cfg.experiment.as_str()));
    bundle.line(format!("seed: {}", cfg.sim.seed));
    match cfg.experiment {
        ExperimentKind::Classify => run_classify(cfg, &mut bundle)?,
        ExperimentKind::Qx => run_qx(cfg, &mut bundle)?,
        ExperimentKind::Identity => run_identity(cfg, &mut bundle)?,
        ExperimentKind::Consistency => run_consistency(cfg, &mut bundle)?,
        ExperimentKind::Zoo => run_zoo_experiment(cfg, &mut bundle)?,
    }
    if bundle.violations.is_empty() {
        bundle.line("status: ok");
    } else {
        for v in bundle.violations.clone() {
            bundle.line(format!("violation: {v}"));
        }
        bundle.line("status: theorem violation");
    }
    let summary = bundle.summary.clone();
    bundle.add_file("summary.txt", summary);
    let mut echoed = cfg.clone();
    echoed.sim.workers = None;
    echoed.output = None;
    let mut files: Vec<String> = bundle.files.keys().cloned().collect();
    files.push("manifest.json".into());
    let manifest = json!({
        "experiment": cfg.experiment.as_str(),
        "seed": cfg.sim.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "format": cfg.format.extension(),
        "config": echoed,
        "files": files,
        "violations": bundle.violations,
    });
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    bundle.add_file("manifest.json", text);
    bundle.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(bundle)
}

fn triplet(cfg: &ExperimentConfig) -> &LevyTriplet {
    cfg.triplet.as_ref().expect("validated config has a triplet")
}

fn run_classify(cfg: &ExperimentConfig, bundle: &mut ReportBundle) -> Result<()> {
    let t = triplet(cfg);
    let class = classify(t)?;
    let h = match class.variant {
        ClassVariant::UpwardsSkipFree { h } => Some(h),
        _ => None,
    };
    let mut table = Table::new("classification", &["class", "rationale", "h", "engine"]);
    table.push(vec![
        class.name().into(),
        rationale_name(&class).into(),
        h.into(),
        engine_name(Engine::for_triplet(t)).into(),
    ]);
    bundle.add_table(&table);
    if !cfg.levels.is_empty() {
        let mut pred = Table::new("predictions", &["level", "predicted_position"]);
        for &x in &cfg.levels {
            pred.push(vec![x.into(), predicted_passage_position(&class, x).into()]);
        }
        bundle.add_table(&pred);
    }
    bundle.line(format!("class: {class} ({})", rationale_name(&class)));
    Ok(())
}

fn run_qx(cfg: &ExperimentConfig, bundle: &mut ReportBundle) -> Result<()> {
    let t = triplet(cfg);
    let class = classify(t)?;
    let sim = Simulator::new(t, &cfg.sim)?;
    let delta = cfg.delta.unwrap_or_else(|| default_delta(&sim));
    let oracle = oracle_for(t);
    let lattice = oracle.as_ref().map(|s| s.h.value());
    bundle.line(format!("class: {class}"));
    let mut summary = Table::new(
        "qx_summary",
        &[
            "level",
            "crossed_mass",
            "censored_mass",
            "verdict",
            "point",
            "predicted",
            "within_delta_fraction",
            "support_diameter",
            "oracle_crossed_mass",
            "oracle_agreement",
        ],
    )
    .meta("class", class.to_string())
    .meta("delta", delta)
    .meta("n", cfg.n);
    for (i, &level) in cfg.levels.iter().enumerate() {
        let law = estimate_law(t, level, cfg.strict, cfg.n, &cfg.sim)?;
        let v = triviality_test(&law, delta, cfg.min_crossed)?;
        let predicted = predicted_passage_position(&class, level);
        bundle.add_table(&law_table(format!("law_{i}"), &law));
        let bins = default_histogram_bins(&law, lattice);
        bundle.add_table(&histogram_table(format!("histogram_{i}"), &law, &bins));
        let (oracle_mass, agreement) = match oracle.as_ref().filter(|_| level > 0.0) {
            Some(spec) => match exact_passage_law(spec, level) {
                Ok(exact) => {
                    let mut ot = Table::new(format!("oracle_{i}"), &["position", "mass", "mass_exact"])
                        .meta("lost_mass_bound", exact.lost_mass_bound)
                        .meta("floor", u64::from(exact.floor))
                        .meta("exact", exact.exact);
                    for a in &exact.atoms {
                        ot.push(vec![a.position.into(), a.mass.value().into(), a.mass.to_string().into()]);
                    }
                    bundle.add_table(&ot);
                    (Some(exact.total_mass().value()), Some(oracle_agrees(&law, &exact)))
                }
                Err(e @ Error::TruncationNotCertified { .. }) => {
                    bundle.line(format!("level {level}: oracle skipped: {e}"));
                    (None, None)
                }
                Err(e) => return Err(e),
            },
            None => (None, None),
        };
        if class.has_deterministic_overshoots() {
            match (v.verdict, predicted) {
                (Verdict::NonTrivial, _) => bundle
                    .violations
                    .push(format!("level {level}: {class} but passage position is non-trivial")),
                (Verdict::Trivial { point: Some(x) }, Some(p)) if (x - p).abs() > delta => bundle
                    .violations
                    .push(format!("level {level}: passage point {x} differs from predicted {p}")),
                _ => {}
            }
        }
        bundle.line(format!("level {level}: {} (crossed mass {})", v.verdict.label(), law.crossed_mass()));
        summary.push(vec![
            level.into(),
            law.crossed_mass().into(),
            law.censored_mass().into(),
            v.verdict.label().into(),
            verdict_point(&v.verdict),
            predicted.into(),
            v.within_delta_fraction.into(),
            v.support_diameter.into(),
            oracle_mass.into(),
            agreement.into(),
        ]);
    }
    bundle.add_table(&summary);
    Ok(())
}

fn run_identity(cfg: &ExperimentConfig, bundle: &mut ReportBundle) -> Result<()> {
    let t = triplet(cfg);
    let (b, c) = (cfg.b.expect("validated"), cfg.c.expect("validated"));
    let exact = match oracle_for(t) {
        Some(spec) => match exact_identity(&spec, b, c) {
            Ok(sides) => Some(sides),
            Err(Error::TruncationNotCertified { .. }) => None,
            Err(e) => return Err(e),
        },
        None => None,
    };
    let bins = match (&cfg.bins, &exact) {
        (Some(bins), _) => bins.clone(),
        (None, Some(sides)) => BinSpec::Atoms(sides.lhs.keys().map(|k| *k as f64 * sides.h).collect()),
        (None, None) => BinSpec::default_for(t, b, c),
    };
    let report = convolution_check(t, b, c, cfg.n, &cfg.sim, &bins)?;
    let mut columns = vec!["bin_left", "bin_right", "lhs", "rhs", "discrepancy", "std_error", "studentized"];
    if exact.is_some() {
        columns.extend(["exact_lhs", "exact_rhs"]);
    }
    let mut table = Table::new("identity", &columns)
        .meta("b", b)
        .meta("c", c)
        .meta("n", report.n)
        .meta("lhs_censored_mass", report.lhs_censored_mass)
        .meta("rhs_censored_mass", report.rhs_censored_mass)
        .meta("max_studentized", report.max_studentized)
        .meta("within_3se_fraction", report.within_3se_fraction);
    if let Some(sides) = &exact {
        table = table
            .meta("exact_max_abs_difference", sides.max_abs_difference())
            .meta("exact_lost_mass_bound", sides.lost_mass_bound);
    }
    for (i, r) in report.bins.iter().enumerate() {
        let mut row: Vec<Cell> = vec![
            r.left.into(),
            r.right.into(),
            r.lhs.into(),
            r.rhs.into(),
            r.discrepancy.into(),
            r.std_error.into(),
            r.studentized.into(),
        ];
        if let Some(sides) = &exact {
            let mass = |m: &std::collections::BTreeMap<i64, Scalar>| -> f64 {
                m.iter()
                    .filter(|(k, _)| bins.index(**k as f64 * sides.h) == i)
                    .map(|(_, v)| v.value())
                    .sum()
            };
            row.push(mass(&sides.lhs).into());
            row.push(mass(&sides.rhs).into());
        }
        table.push(row);
    }
    bundle.add_table(&table);
    bundle.line(format!(
        "max studentized discrepancy: {} ({} of bins within 3 SE)",
        report.max_studentized, report.within_3se_fraction
    ));
    if let Some(sides) = &exact {
        bundle.line(format!("exact sides differ by at most {}", sides.max_abs_difference()));
    }
    Ok(())
}

fn run_consistency(cfg: &ExperimentConfig, bundle: &mut ReportBundle) -> Result<()> {
    let t = triplet(cfg);
    let class = classify(t)?;
    let report = multi_level_consistency(t, &cfg.levels, cfg.n, &cfg.sim, cfg.delta, cfg.min_crossed)?;
    let mut table = Table::new(
        "consistency",
        &[
            "level",
            "crossed_mass",
            "censored_mass",
            "verdict",
            "point",
            "predicted",
            "within_delta_fraction",
            "support_diameter",
        ],
    )
    .meta("class", class.to_string())
    .meta("homogeneous", report.homogeneous);
    for l in &report.levels {
        table.push(vec![
            l.law.level.into(),
            l.law.crossed_mass().into(),
            l.law.censored_mass().into(),
            l.verdict.verdict.label().into(),
            verdict_point(&l.verdict.verdict),
            predicted_passage_position(&class, l.law.level).into(),
            l.verdict.within_delta_fraction.into(),
            l.verdict.support_diameter.into(),
        ]);
    }
    bundle.add_table(&table);
    bundle.line(format!("class: {class}"));
    bundle.line(format!("homogeneous: {}", report.homogeneous));
    if !report.homogeneous {
        bundle.violations.push("mixed decided verdicts across levels".into());
    }
    Ok(())
}

fn run_zoo_experiment(cfg: &ExperimentConfig, bundle: &mut ReportBundle) -> Result<()> {
    let opts = ZooOptions {
        levels: if cfg.levels.is_empty() {
            DEFAULT_ZOO_LEVELS.to_vec()
        } else {
            cfg.levels.clone()
        },
        n: cfg.n,
        sim: cfg.sim.clone(),
        delta: cfg.delta,
        min_crossed: cfg.min_crossed,
        ..ZooOptions::default()
    };
    let rows = run_zoo(&opts)?;
    bundle.add_table(&zoo_table(&rows, &opts.levels));
    for r in &rows {
        bundle.line(format!(
            "{}: {} homogeneous={} theorem_consistent={}",
            r.name, r.class, r.consistency.homogeneous, r.theorem_consistent
        ));
        if !r.theorem_consistent {
            bundle
                .violations
                .push(format!("{}: verdicts disagree with class {}", r.name, r.class));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_covers_every_class() {
        let classes: Vec<ClassVariant> = zoo_catalog().iter().map(|e| classify(&e.triplet).unwrap().variant).collect();
        assert!(classes.len() >= 6);
        assert!(classes.contains(&ClassVariant::SpectrallyNegative));
        assert!(classes.contains(&ClassVariant::UpwardsSkipFree { h: 1.0 }));
        assert!(classes.contains(&ClassVariant::NonDeterministicOvershoots));
        let names: Vec<&str> = zoo_catalog().iter().map(|e| e.name).collect();
        let mut dedup = names.clone();
        dedup.dedup();
        assert_eq!(names, dedup);
    }

    #[test]
    fn small_zoo_is_consistent() {
        let opts = ZooOptions {
            n: 2000,
            diag_paths: 100,
            sim: SimConfig::default().with_seed(12),
            ..ZooOptions::default()
        };
        for e in zoo_catalog().iter().filter(|e| e.dt.is_none()) {
            let row = run_zoo_entry(e, &opts).unwrap();
            assert!(row.theorem_consistent, "{}: {:?}", row.name, row.consistency.levels.iter().map(|l| l.verdict).collect::<Vec<_>>());
            if let Some(ok) = row.oracle_agreement {
                assert!(ok, "{} disagrees with oracle", row.name);
            }
        }
    }

    fn cfg(text: &str) -> ExperimentConfig {
        crate::config::parse_config(text).unwrap()
    }

    #[test]
    fn qx_on_skip_free_chain() {
        let c = cfg(r#"{"experiment": "qx", "levels": [0.5, 2.5], "n": 2000,
            "triplet": {"jumps": {"atoms": [{"size": 1, "rate": "3/10"}, {"size": -1, "rate": "7/10"}]}}}"#);
        let b = run_experiment(&c).unwrap();
        assert_eq!(b.exit_code(), 0);
        assert!(b.files["law_1.csv"].contains("\n3,"));
        assert!(b.files["oracle_0.csv"].contains("\n1,0.428571428"));
        assert!(b.files["qx_summary.csv"].contains("trivial(3)"));
        assert!(b.files.contains_key("histogram_0.csv"));
        assert!(b.files.contains_key("manifest.json"));
    }

    #[test]
    fn identity_uses_exact_support_bins() {
        let c = cfg(r#"{"experiment": "identity", "b": 1.5, "c": 0.5, "n": 4000, "format": "json",
            "triplet": {"jumps": {"atoms": [{"size": 1, "rate": "1/2"}, {"size": 3, "rate": "1/2"}]}}}"#);
        let b = run_experiment(&c).unwrap();
        let v: serde_json::Value = serde_json::from_str(&b.files["identity.json"]).unwrap();
        assert_eq!(v["rows"].as_array().unwrap().len(), 4);
        assert_eq!(v["rows"][0]["exact_lhs"], 0.25);
        assert_eq!(v["exact_max_abs_difference"], 0.0);
    }

    #[test]
    fn classify_and_consistency_reports() {
        let c = cfg(r#"{"experiment": "classify", "levels": [2.5],
            "triplet": {"jumps": {"atoms": [{"size": "1/2", "rate": 1}, {"size": -1, "rate": 1}]}}}"#);
        let b = run_experiment(&c).unwrap();
        assert!(b.files["classification.csv"].contains("UpwardsSkipFree,skip_free_lattice,0.5"));
        assert!(b.files["predictions.csv"].contains("2.5,2.5"));

        let c = cfg(r#"{"experiment": "consistency", "levels": [0.5, 1.5], "n": 2000,
            "triplet": {"jumps": {"atoms": [{"size": 1, "rate": 1}, {"size": 2, "rate": 1}]}}}"#);
        let b = run_experiment(&c).unwrap();
        assert_eq!(b.exit_code(), 0);
        assert!(b.files["consistency.csv"].contains("non_trivial"));
    }

    #[test]
    fn manifest_ignores_workers() {
        let text = r#"{"experiment": "qx", "levels": [1.5], "n": 500,
            "triplet": {"jumps": {"atoms": [{"size": 1, "rate": 1}, {"size": 3, "rate": 1}]}}}"#;
        let mut a = cfg(text);
        a.sim.workers = Some(1);
        let mut b = cfg(text);
        b.sim.workers = Some(3);
        assert_eq!(run_experiment(&a).unwrap().files, run_experiment(&b).unwrap().files);
    }

    #[test]
    fn theorem_check_flags_mixed_verdicts() {
        let opts = ZooOptions {
            n: 500,
            ..ZooOptions::default()
        };
        let e = &zoo_catalog()[4];
        let mut row = run_zoo_entry(e, &opts).unwrap();
        assert!(row.theorem_consistent);
        row.consistency.levels[0].verdict.verdict = Verdict::Trivial { point: Some(1.0) };
        row.consistency.homogeneous = false;
        assert!(!theorem_consistent(&row.class, &row.consistency, &row.predicted));
    }
}
