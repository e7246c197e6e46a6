//! Acceptance runner: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! Runs without the libtest harness so the lines always show up in
//! `cargo test` output.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use abelian_census::analysis::{fit_exponents, ratio_r, scaling_check, Trend, TrendThresholds};
use abelian_census::config::parse_config;
use abelian_census::group::{GroupData, OmegaSet, ParamVector};
use abelian_census::profile::{decade_checkpoints, enumerate_census, CensusQuery, Mode};
use abelian_census::run::{run_census, RunOptions, CSV_FILE, MANIFEST_FILE, PLOT_FILE, SUMMARY_FILE};
use abelian_census::series::{mu_series, pi_series, psi_series, tau_series};
use abelian_census::structure::{conjecture_classifier, delta_x, gamma_x};
use common::checks::*;
use common::*;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SMALL_GROUPS: [&[u64]; 5] = [&[2], &[3], &[4], &[2, 2], &[6]];

fn threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get()).min(8)
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Check {
    if elapsed > limit {
        return Err(format!("{what} took {elapsed:.1?}, limit {limit:?}"));
    }
    Ok(())
}

fn c6() -> (GroupData, ParamVector, OmegaSet) {
    let gd = GroupData::new(&[6]).unwrap();
    let x = params(&gd, &[(5, 1), (4, 1), (3, 1)]);
    let om = omega_of(&gd, &[&[3]]);
    (gd, x, om)
}

fn c6_classes() -> Check {
    let start = Instant::now();
    let gd = GroupData::new(&[6]).unwrap();
    let g = |k: u64| el(&gd, &[k]);
    let expected = [vec![g(1), g(5)], vec![g(2), g(4)], vec![g(3)]];
    let got: Vec<Vec<u8>> = gd.classes.iter().map(|c| c.members.clone()).collect();
    if got != expected {
        return Err(format!("classes {got:?}, expected {expected:?}"));
    }
    // A tame prime with inertia of order e has discriminant exponent 6 - 6/e in a sextic field.
    let (gd, x, _) = c6();
    for k in [1u64, 2, 3] {
        let h = cyc(&gd, &[k]);
        let e = gd.lattice.get(h).order() as u64;
        let got = gd.x_of_subgroup(h, &x);
        if got != Ratio::from_integer(6 - 6 / e) {
            return Err(format!("x(<g^{k}>) = {got}, expected {}", 6 - 6 / e));
        }
    }
    within(start.elapsed(), Duration::from_secs(1), "class computation")
}

fn oracle_equivalence() -> Check {
    let start = Instant::now();
    for f in SMALL_GROUPS {
        let gd = GroupData::new(f).unwrap();
        let x = ParamVector::ones(gd.class_count());
        two_paths(&gd, &x, &OmegaSet::empty(), 10_000, 0)?;
        // With Omega = the last class (elements of least order) the slices are non-trivial.
        let om = gd.omega_from_indices(&[gd.class_count()]).unwrap();
        two_paths(&gd, &x, &om, 10_000, 4)?;
        for bound in [1, 2, 10, 31, 50] {
            oracle_agreement(&gd, &x, &OmegaSet::empty(), bound)?;
            oracle_agreement(&gd, &x, &om, bound)?;
        }
    }
    within(start.elapsed(), Duration::from_secs(300), "oracle suite")
}

fn klein_sandwich() -> Check {
    let (gd, x, om) = klein((1, 1));
    for gamma in [1, 2] {
        let e = |e: abelian_census::CensusError| e.to_string();
        let mu = mu_series(&gd, &x, &om, gamma, 1000).map_err(e)?;
        let pi = pi_series(&gd, &x, &om, gamma, 1000).map_err(e)?;
        let psi = psi_series(&gd, &x, &om, gamma, 1000).map_err(e)?;
        let tau = tau_series(&gd, &x, &om, gamma, 1000).map_err(e)?;
        for (name, upper, lower) in [("mu >= pi", &mu, &pi), ("psi >= pi", &psi, &pi), ("pi >= tau", &pi, &tau)] {
            let v = upper.violations_below(lower);
            if !v.is_empty() {
                return Err(format!("gamma={gamma} {name}: {} violations, first {}", v.len(), v[0]));
            }
        }
        if pi.is_empty() || tau.is_empty() {
            return Err(format!("gamma={gamma}: empty series"));
        }
    }
    Ok(())
}

fn scaling_invariance() -> Check {
    let c2 = GroupData::new(&[2]).unwrap();
    let (x2, om2) = (ParamVector::ones(1), OmegaSet::empty());
    let (gd6, x6, om6) = c6();
    // (a, X^a) with X = 1000.
    for (a, scaled_bound) in [(Ratio::from_integer(2), 1_000_000u64), (Ratio::new(1, 3), 10)] {
        for (gd, x, om) in [(&c2, &x2, &om2), (&gd6, &x6, &om6)] {
            let name = format!("{:?} a={a}", gd.group.invariant_factors());
            let base = enumerate_census(CensusQuery::new(gd, x, om, 1000).with_gamma_max(3), 1).map_err(|e| e.to_string())?;
            let ax = x.scaled(a).map_err(|e| e.to_string())?;
            let direct = enumerate_census(CensusQuery::new(gd, &ax, om, scaled_bound).with_gamma_max(3), 1)
                .map_err(|e| e.to_string())?;
            let (b, d) = (base.last(), direct.last());
            if (&b.sur, &b.hom, b.unsliced_sur, b.unsliced_hom) != (&d.sur, &d.hom, d.unsliced_sur, d.unsliced_hom) {
                return Err(format!("{name}: {b:?} vs {d:?}"));
            }
            if !scaling_check(gd, x, om, a, 1000, 3).map_err(|e| e.to_string())? {
                return Err(format!("{name}: scaling_check reports a mismatch"));
            }
        }
    }
    Ok(())
}

fn structure_constants() -> Check {
    let start = Instant::now();
    for n in [5usize, 6] {
        let (gd, x, om) = elementary_example(n, (2, 1));
        let d = delta_x(&gd, &x, &om).map_err(|e| e.to_string())?.0;
        let g = gamma_x(&gd, &x, &om).map_err(|e| e.to_string())?.0;
        if d != n as u32 - 4 || g > n as u32 - 3 {
            return Err(format!("C2^{n}: delta {d}, gamma {g}"));
        }
    }
    for t in [(1u64, 3u64), (1, 2), (9, 10), (1, 1), (11, 10), (3, 2), (2, 1), (5, 1)] {
        let (gd, x, om) = klein(t);
        let holds = conjecture_classifier(&gd, &x, &om).map_err(|e| e.to_string())?;
        if holds != (t.0 <= t.1) {
            return Err(format!("classifier at t={}/{} says {holds}", t.0, t.1));
        }
    }
    within(start.elapsed(), Duration::from_secs(120), "structure constants")
}

fn growth_exponents() -> Check {
    let start = Instant::now();
    let gd = GroupData::new(&[2]).unwrap();
    let x = ParamVector::ones(1);
    let om = OmegaSet::empty();
    let q = CensusQuery::new(&gd, &x, &om, 100_000_000).with_checkpoints(decade_checkpoints(3, 8, 4));
    let t = enumerate_census(q, threads()).map_err(|e| e.to_string())?;
    let fit = fit_exponents(&t, Mode::Sur, None).map_err(|e| e.to_string())?;
    if (fit.sigma_hat - 1.0).abs() > 0.05 || fit.logpow_hat.abs() > 0.1 {
        return Err(format!("C2: sigma {:.4}, log power {:.4}", fit.sigma_hat, fit.logpow_hat));
    }
    within(start.elapsed(), Duration::from_secs(600), "C2 census")?;
    let c2_fit = fit.sigma_hat;

    let start = Instant::now();
    let (gd, x, om) = klein((2, 1));
    // From 10^4 on: below that the gamma = 1 slice is still dominated by small-prime effects.
    let q = CensusQuery::new(&gd, &x, &om, 10_000_000)
        .with_checkpoints(decade_checkpoints(4, 7, 4))
        .with_gamma_max(1);
    let t = enumerate_census(q, threads()).map_err(|e| e.to_string())?;
    let fit = fit_exponents(&t, Mode::Sur, Some(1)).map_err(|e| e.to_string())?;
    if (fit.sigma_hat - 1.0).abs() > 0.05 {
        return Err(format!("Klein gamma=1: sigma {:.4}", fit.sigma_hat));
    }
    within(start.elapsed(), Duration::from_secs(600), "Klein census")?;
    println!("    C2 sigma {c2_fit:.4}; Klein (1,2,2) gamma=1 sigma {:.4}", fit.sigma_hat);
    Ok(())
}

fn ratio_trends() -> Check {
    for (t, expected) in [((2u64, 1u64), Trend::BoundedPositive), ((1, 1), Trend::ToZero)] {
        let (gd, x, om) = klein(t);
        let q = CensusQuery::new(&gd, &x, &om, 10_000_000)
            .with_checkpoints(decade_checkpoints(3, 7, 4))
            .with_gamma_max(2);
        let table = enumerate_census(q, threads()).map_err(|e| e.to_string())?;
        let r = ratio_r(1, 2, &table, &TrendThresholds::default()).map_err(|e| e.to_string())?;
        let shown: Vec<String> = r.window_values.iter().map(|v| format!("{v:.3}")).collect();
        println!("    t={}/{}: {:?} [{}]", t.0, t.1, r.trend, shown.join(", "));
        if r.trend != expected {
            return Err(format!("t={}/{}: {:?}, expected {expected:?}", t.0, t.1, r.trend));
        }
    }
    Ok(())
}

fn property_suites() -> Check {
    let groups = all_groups(36);
    mobius_consistency(&groups)?;
    tame_periodicity(&groups, 2000)?;
    residue_sums(&groups)?;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..100 {
        let f = &groups[rng.gen_range(0..groups.len())];
        let gd = GroupData::new(f).unwrap();
        let (lambda, classes) = class_union(&gd, rng.gen());
        let beta = gd.beta_of_class_set(lambda).map_err(|e| format!("G={f:?}: {e}"))?;
        if beta != classes as u64 {
            return Err(format!("G={f:?}: beta {beta} for {classes} classes"));
        }
    }

    let small = all_groups(16);
    for _ in 0..20 {
        let f = &small[rng.gen_range(0..small.len())];
        let gd = GroupData::new(f).unwrap();
        let om = omega_from_bits(&gd, rng.gen());
        let support = support_bits(&gd, rng.gen());
        let mut draw = || -> (Ratio<u64>, Vec<u64>) {
            (Ratio::new(rng.gen_range(1..5), 2), (0..4).map(|_| rng.gen_range(1..9)).collect())
        };
        let (ma, ba) = draw();
        let (mb, bb) = draw();
        let xa = params_with_support(&gd, support, ma, &ba);
        let xb = params_with_support(&gd, support, mb, &bb);
        let da = delta_x(&gd, &xa, &om).map_err(|e| e.to_string())?.0;
        let db = delta_x(&gd, &xb, &om).map_err(|e| e.to_string())?.0;
        let reference = delta_reference(&gd, &xa, &om);
        if da != db || da != reference {
            return Err(format!("G={f:?} support {support:b}: delta {da} / {db}, brute force {reference}"));
        }
    }
    Ok(())
}

fn determinism() -> Check {
    let files = [CSV_FILE, SUMMARY_FILE, PLOT_FILE, MANIFEST_FILE];
    for f in SMALL_GROUPS {
        let gd = GroupData::new(f).unwrap();
        let group: Vec<String> = f.iter().map(|d| d.to_string()).collect();
        let ones = vec!["1"; gd.class_count()].join(",");
        let mut reference: Option<Vec<Vec<u8>>> = None;
        for workers in [1, 2, 8] {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            let text = format!(
                "group={}\nparams={ones}\nomega={}\ngamma=0..2\nbound=1e4\nthreads={workers}\nout={}",
                group.join(","),
                gd.class_count(),
                dir.path().display()
            );
            let cfg = parse_config(&text).map_err(|e| e.to_string())?;
            run_census(&cfg, &RunOptions::default()).map_err(|e| e.to_string())?;
            let bytes: Vec<Vec<u8>> = files.iter().map(|n| std::fs::read(dir.path().join(n)).unwrap()).collect();
            match &reference {
                None => reference = Some(bytes),
                Some(r) if *r != bytes => return Err(format!("G={f:?}: output differs with {workers} workers")),
                Some(_) => {}
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("C6 power classes and discriminant exponents", c6_classes),
        ("convolution, enumeration and brute-force oracle agree", oracle_equivalence),
        ("coefficient sandwich on C2xC2", klein_sandwich),
        ("scaling invariance", scaling_invariance),
        ("structure constants and classifier", structure_constants),
        ("growth exponent fits", growth_exponents),
        ("ratio trends", ratio_trends),
        ("property suites", property_suites),
        ("determinism across worker counts", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(()) => println!("criterion {}: PASS  {name} ({secs:.1}s)", i + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({secs:.1}s): {e}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
