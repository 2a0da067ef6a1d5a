//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::collections::{BTreeMap, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use overshoot_core::config::{ExperimentConfig, ExperimentKind};
use overshoot_core::experiment::{run_experiment, run_zoo, zoo_catalog, ZooOptions};
use overshoot_core::measures::{
    convolution_check, estimate_law, sample_outcomes, BinSpec, EmpiricalLaw, Verdict,
};
use overshoot_core::oracle::{exact_identity, exact_passage_law, exact_passage_probability, LatticeChainSpec};
use overshoot_core::pathsim::{decompose_jumps, supremum_jump_diagnostic, PassageResult};
use overshoot_core::report::TIMING_FILE;
use overshoot_core::rng::{run_replicates, StreamFamily};
use overshoot_core::{classify, predicted_passage_position, Atom, ClassVariant, LevyTriplet, Scalar, SimConfig, Simulator};
use statrs::distribution::{ContinuousCDF, Normal};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn chain(atoms: &[(i64, i64, i64)]) -> LevyTriplet {
    LevyTriplet::compound_poisson(atoms.iter().map(|&(s, n, d)| Atom::new(s, Scalar::ratio(n, d))).collect())
}

fn skip_free() -> LevyTriplet {
    chain(&[(1, 3, 10), (-1, 7, 10)])
}

fn monotone() -> LevyTriplet {
    chain(&[(1, 1, 2), (3, 1, 2)])
}

fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn skip_free_exactness() -> Outcome {
    let t = skip_free();
    let class = classify(&t).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let mut crossed = Vec::new();
    for (k, x) in [0.5, 1.5, 2.5].into_iter().enumerate() {
        let cfg = SimConfig::default().with_seed(100 + k as u64);
        let law = estimate_law(&t, x, false, 10_000, &cfg).map_err(|e| e.to_string())?;
        let expect = x.ceil();
        check(predicted_passage_position(&class, x) == Some(expect), format!("predicted position at {x}"))?;
        for a in &law.atoms {
            check(a.position.to_bits() == expect.to_bits(), format!("level {x}: crossed at {} not {expect}", a.position))?;
        }
        check(law.crossed > 0, format!("level {x}: nothing crossed"))?;
        crossed.push(law.crossed);
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 10.0, format!("runtime {secs:.2}s >= 10s"))?;
    Ok(format!("all crossings at ceil(x) bit-exactly (crossed {crossed:?}), {secs:.2}s"))
}

fn passage_probability() -> Outcome {
    let t = skip_free();
    let n = 100_000;
    let p = 3.0 / 7.0;
    let spec = LatticeChainSpec::from_triplet(&t).map_err(|e| e.to_string())?;
    let exact = exact_passage_probability(&spec, 0.5).map_err(|e| e.to_string())?;
    check((exact.value.value() - p).abs() <= exact.error_bound + 1e-15, "oracle disagrees with 3/7")?;

    let cfg = SimConfig::default().with_seed(7).with_horizon(100.0);
    let outcomes = sample_outcomes(&t, 0.5, false, n, &cfg).map_err(|e| e.to_string())?;
    let law = EmpiricalLaw::from_outcomes(0.5, false, cfg.seed, &outcomes);

    // Each censored path still reaches the level later with the oracle's
    // probability from its terminal position; float rates keep solves cheap.
    let float_spec = LatticeChainSpec::new(1i64, vec![(1, Scalar::from_f64(0.3)), (-1, Scalar::from_f64(0.7))])
        .map_err(|e| e.to_string())?;
    let mut cache: HashMap<i64, f64> = HashMap::new();
    let mut would_cross = 0.0;
    for o in &outcomes {
        if let PassageResult::Censored { terminal_value, .. } = o.result {
            let v = terminal_value as i64;
            let q = match cache.get(&v) {
                Some(q) => *q,
                None => {
                    let r = exact_passage_probability(&float_spec, 0.5 - terminal_value).map_err(|e| e.to_string())?;
                    let q = (r.value.value() + r.error_bound).min(1.0);
                    cache.insert(v, q);
                    q
                }
            };
            would_cross += q;
        }
    }
    let would_cross = would_cross / n as f64;
    check(would_cross < 1e-3, format!("censored-but-would-cross mass {would_cross:e} >= 1e-3"))?;
    let tol = 4.0 * binomial_se(p, n);
    let diff = (law.crossed_mass() - p).abs();
    check(diff <= tol, format!("crossed mass {} vs 3/7: |diff| {diff:.5} > {tol:.5}", law.crossed_mass()))?;
    Ok(format!(
        "crossed mass {:.5} vs 3/7 (tol {tol:.5}); censored-but-would-cross {would_cross:.1e}",
        law.crossed_mass()
    ))
}

fn enumeration_agreement() -> Outcome {
    let t = monotone();
    let spec = LatticeChainSpec::from_triplet(&t).map_err(|e| e.to_string())?;
    let exact = exact_passage_law(&spec, 1.5).map_err(|e| e.to_string())?;
    let expected = [(2.0, Scalar::ratio(1, 4)), (3.0, Scalar::ratio(1, 2)), (4.0, Scalar::ratio(1, 4))];
    check(exact.exact, "oracle did not use rational arithmetic")?;
    let got: Vec<(f64, Scalar)> = exact.atoms.iter().map(|a| (a.position, a.mass.clone())).collect();
    check(got == expected.to_vec(), format!("exact law {got:?}"))?;
    check(exact.lost_mass_bound == 0.0, "monotone chain lost mass")?;

    let n = 100_000;
    let law = estimate_law(&t, 1.5, false, n, &SimConfig::default().with_seed(3)).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (pos, p) in &expected {
        let p = p.value();
        let z = (law.mass_at(*pos) - p).abs() / binomial_se(p, n);
        worst = worst.max(z);
    }
    check(law.atoms.len() == 3, "empirical support is not {2,3,4}")?;
    check(worst <= 4.0, format!("max |z| {worst:.2} > 4"))?;
    Ok(format!("exact law {{2:1/4, 3:1/2, 4:1/4}}; empirical max |z| {worst:.2}"))
}

fn convolution_identity() -> Outcome {
    let t = monotone();
    let spec = LatticeChainSpec::from_triplet(&t).map_err(|e| e.to_string())?;
    let sides = exact_identity(&spec, 1.5, 0.5).map_err(|e| e.to_string())?;
    let exact_diff = sides.max_abs_difference();
    check(exact_diff <= 1e-9, format!("exact sides differ by {exact_diff:e}"))?;
    let support: Vec<f64> = sides.lhs.keys().map(|k| *k as f64 * sides.h).collect();
    check(support == vec![2.0, 3.0, 4.0], format!("exact support {support:?}"))?;
    let report = convolution_check(&t, 1.5, 0.5, 100_000, &SimConfig::default().with_seed(11), &BinSpec::Atoms(support))
        .map_err(|e| e.to_string())?;
    check(
        report.max_studentized <= 3.0,
        format!("max studentized discrepancy {:.3} > 3", report.max_studentized),
    )?;
    Ok(format!(
        "max studentized {:.3}; exact sides differ by {exact_diff:e}",
        report.max_studentized
    ))
}

fn zoo_cross_validation() -> Outcome {
    let opts = ZooOptions {
        n: 10_000,
        sim: SimConfig::default().with_seed(2024),
        ..ZooOptions::default()
    };
    let rows = run_zoo(&opts).map_err(|e| e.to_string())?;
    check(rows.len() >= 6, "catalog has fewer than 6 entries")?;
    let mut seen = BTreeMap::new();
    for r in &rows {
        check(r.consistency.homogeneous, format!("{}: mixed verdicts", r.name))?;
        check(r.theorem_consistent, format!("{}: verdicts disagree with {}", r.name, r.class))?;
        check(r.consistency.any_decided(), format!("{}: no decided verdict", r.name))?;
        *seen.entry(r.class.name()).or_insert(0) += 1;
        if matches!(r.name.as_str(), "two_positive_atoms" | "irrational_atoms") {
            for l in &r.consistency.levels {
                check(l.verdict.verdict == Verdict::NonTrivial, format!("{} at {}: {:?}", r.name, l.law.level, l.verdict))?;
                check(
                    l.law.atoms.len() >= 2 && l.verdict.support_diameter > 0.1,
                    format!("{} at {}: support too narrow", r.name, l.law.level),
                )?;
            }
        }
    }
    check(seen.len() == 3, format!("classes seen: {seen:?}"))?;
    Ok(format!("{} entries consistent; classes {seen:?}", rows.len()))
}

fn supremum_continuity() -> Outcome {
    let horizon = 2.0;
    let n = 10_000;
    let mut notes = Vec::new();
    for entry in zoo_catalog() {
        let t = &entry.triplet;
        let class = classify(t).map_err(|e| e.to_string())?;
        let cfg = SimConfig {
            dt: entry.dt.unwrap_or(1e-3),
            ..SimConfig::default().with_horizon(horizon).with_seed(5)
        };
        let sim = Simulator::new(t, &cfg).map_err(|e| e.to_string())?;
        let fam = StreamFamily::new(cfg.seed).child(entry.name);
        let diags = run_replicates(n, None, |i| supremum_jump_diagnostic(&sim.path(&mut fam.stream(i))));
        let frac = diags.iter().filter(|d| **d > 0.0).count() as f64 / n as f64;
        if class.variant == ClassVariant::SpectrallyNegative {
            check(diags.iter().all(|d| *d == 0.0), format!("{}: supremum jumped", entry.name))?;
            continue;
        }
        // beta: rate of positive jumps; any supremum jump needs one
        let beta = decompose_jumps(t, 1e-12).map_err(|e| e.to_string())?.beta;
        let upper = 1.0 - (-beta * horizon).exp();
        let se = binomial_se(upper, n).max(binomial_se(frac, n));
        check(frac > 0.0, format!("{}: no supremum jumps", entry.name))?;
        check(frac <= upper + 4.0 * se, format!("{}: fraction {frac} above {upper}", entry.name))?;
        // event-driven chains without drift: a first jump that is positive
        // always sets a new supremum
        if t.sigma2.is_zero() && t.path_slope().is_some_and(|s| s.is_zero()) {
            let lambda = t.jumps.total_finite_rate();
            let lower = beta / lambda * (1.0 - (-lambda * horizon).exp());
            check(frac >= lower - 4.0 * se, format!("{}: fraction {frac} below {lower}", entry.name))?;
        }
        notes.push(format!("{} {frac:.3}<={upper:.3}", entry.name));
    }
    Ok(format!("SN entries 0 on every path; {}", notes.join(", ")))
}

fn brownian_calibration() -> Outcome {
    let t = LevyTriplet::brownian(1i64, 0i64);
    let cfg = SimConfig::default().with_dt(1e-3).with_horizon(1.0).with_seed(77);
    let n = 100_000;
    let outcomes = sample_outcomes(&t, 1.0, false, n, &cfg).map_err(|e| e.to_string())?;
    let mut crossed = 0usize;
    for o in &outcomes {
        if let PassageResult::Crossed { overshoot, .. } = o.result {
            check(overshoot == 0.0, format!("bridge crossing with overshoot {overshoot}"))?;
            crossed += 1;
        }
    }
    let target = 2.0 * Normal::standard().cdf(-1.0);
    let freq = crossed as f64 / n as f64;
    let se = binomial_se(target, n);
    check((freq - target).abs() <= 3.0 * se, format!("frequency {freq:.5} vs {target:.5} (3 SE = {:.5})", 3.0 * se))?;
    Ok(format!("frequency {freq:.5} vs 2*Phi(-1) = {target:.5} (3 SE = {:.5}); overshoots all 0", 3.0 * se))
}

fn bundle_bytes(cfg: &ExperimentConfig) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let bundle = run_experiment(cfg).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    bundle.write_to(dir.path()).map_err(|e| e.to_string())?;
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir.path()).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if name != TIMING_FILE {
            out.insert(name, std::fs::read(&path).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

fn reproducibility() -> Outcome {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Zoo);
    cfg.sim.seed = 99;
    let first = bundle_bytes(&cfg)?;
    let second = bundle_bytes(&cfg)?;
    check(first == second, "same seed produced different bundles")?;
    cfg.sim.workers = Some(1);
    let one = bundle_bytes(&cfg)?;
    cfg.sim.workers = Some(4);
    let four = bundle_bytes(&cfg)?;
    check(one == first && four == first, "worker count changed the bundle")?;
    Ok(format!("{} files byte-identical across reruns and 1/4/default workers", first.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("skip-free exactness", skip_free_exactness),
        ("passage probability vs oracle", passage_probability),
        ("enumeration oracle agreement", enumeration_agreement),
        ("convolution identity", convolution_identity),
        ("theorem cross-validation over the zoo", zoo_cross_validation),
        ("supremum continuity", supremum_continuity),
        ("Brownian crossing calibration", brownian_calibration),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
