//! Acceptance criteria, one line each. Runs without the libtest harness so the
//! report is always printed; exits nonzero when any criterion fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use krr_sphere::cli::presets::{scan_preset, sim_preset, SCAN_PRESETS, SIM_PRESETS};
use krr_sphere::cli::{run_scan, run_simulate, run_simulations, Format, OutputSpec, SimEntry};
use krr_sphere::eigenframework::{predicted_risk, solve_kappa, Spectrum, SyntheticSpectrum, TargetSpec};
use krr_sphere::regimes::{
    loglog_slope, multiplicity_scaling_report, scan, DimensionSchedule, RegimeReport,
};
use krr_sphere::spectrum::bessel::{log_bessel_i, log_bessel_i_series};
use krr_sphere::spectrum::{build_spectrum, check_ratio_bounds, EigenSystem, SpectrumSpec, DEFAULT_TAIL_TOL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

mod common;
use common::per_mode_total;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

const DS: [u32; 6] = [2, 3, 4, 6, 8, 16];
const TAUS: [f64; 4] = [0.25, 0.5, 1.0, 2.0];
const GRID_M: u64 = 512;

fn gaussian_grid() -> Vec<EigenSystem> {
    let mut out = Vec::new();
    for d in DS {
        for tau in TAUS {
            let spec = SpectrumSpec::new(d, tau).unwrap();
            out.push(build_spectrum(&spec, GRID_M, DEFAULT_TAIL_TOL).unwrap());
        }
    }
    out
}

fn report(name: &str) -> RegimeReport {
    scan(&scan_preset(name, 2).unwrap()).unwrap()
}

fn totals(r: &RegimeReport) -> Vec<f64> {
    r.points.iter().map(|p| p.total.unwrap_or(f64::NAN)).collect()
}

fn ms(r: &RegimeReport) -> Vec<f64> {
    r.points.iter().map(|p| p.m as f64).collect()
}

fn trace_identity() -> Outcome {
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut fails = Vec::new();
    for sys in gaussian_grid() {
        let err = (sys.trace_partial - 1.0).abs();
        let allowed = sys.tail_bound + 1e-8;
        worst = worst.max(err - allowed);
        if err > allowed {
            fails.push(format!("(d={}, tau={}) err={err:e}", sys.d, sys.tau));
        }
    }
    outcome(
        fails.is_empty(),
        format!("24 spectra, max(err - allowed) = {worst:e}; misses: {fails:?}"),
    )
}

fn ratio_brackets() -> Outcome {
    let (mut checks, mut violations) = (0, 0);
    for sys in gaussian_grid() {
        let r = check_ratio_bounds(&sys);
        checks += r.checks.len();
        violations += r.violations;
    }
    outcome(violations == 0, format!("{checks} ratios, {violations} violations"))
}

fn bessel_oracle() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut at = (0.0, 0.0);
    for _ in 0..1000 {
        let v: f64 = rng.gen_range(0.0..=300.0);
        // x = 0 is outside the domain of the log
        let x: f64 = 200.0 * (1.0 - rng.gen::<f64>());
        let rel = (log_bessel_i(v, x).unwrap() - log_bessel_i_series(v, x).unwrap())
            .exp_m1()
            .abs();
        if rel > worst {
            worst = rel;
            at = (v, x);
        }
    }
    outcome(
        worst <= 1e-11,
        format!("max rel err {worst:e} at v={:.3}, x={:.3} (tol 1e-11)", at.0, at.1),
    )
}

fn random_spectrum(rng: &mut ChaCha20Rng) -> SyntheticSpectrum {
    let levels = rng.gen_range(5..40);
    let mut log_l = 0.0;
    let pairs: Vec<(f64, f64)> = (0..levels)
        .map(|_| {
            log_l -= rng.gen_range(0.05..3.0);
            (f64::exp(log_l), rng.gen_range(1..30) as f64)
        })
        .collect();
    SyntheticSpectrum::new(&pairs).unwrap()
}

fn kappa_decreasing<S: Spectrum>(s: &S, sample_sizes: &[u64]) -> (bool, f64) {
    let mut worst = 0.0f64;
    let mut ok = true;
    let mut prev = f64::INFINITY;
    for &m in sample_sizes {
        let sol = solve_kappa(s, m, 0.0).unwrap();
        worst = worst.max(sol.residual / m as f64);
        ok &= sol.residual <= 1e-10 * m as f64 && sol.kappa < prev;
        prev = sol.kappa;
    }
    (ok, worst)
}

fn kappa_fixed_point() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut bad = 0;
    for _ in 0..100 {
        let s = random_spectrum(&mut rng);
        let total = s.flattened_total();
        let mut grid: Vec<u64> = [0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 0.95]
            .iter()
            .map(|f| ((total * f) as u64).max(1))
            .collect();
        grid.dedup();
        let (ok, w) = kappa_decreasing(&s, &grid);
        worst = worst.max(w);
        bad += usize::from(!ok);
    }
    let grid: Vec<u64> = (3..=9).map(|i| 1u64 << i).collect();
    for sys in gaussian_grid() {
        let (ok, w) = kappa_decreasing(&sys, &grid);
        worst = worst.max(w);
        bad += usize::from(!ok);
    }
    outcome(
        bad == 0,
        format!("124 spectra, {bad} failing, max residual/m {worst:e} (tol 1e-10)"),
    )
}

fn bound_containment() -> Outcome {
    let names = [
        "theorem1-case1",
        "theorem1-case2",
        "theorem1-case3",
        "corollary1",
        "corollary1-alpha1",
        "corollary2",
        "corollary3",
    ];
    let (mut points, mut sides, mut violations) = (0, 0, Vec::new());
    for name in names {
        for p in report(name).points {
            points += 1;
            sides += [p.upper_sq, p.upper_lin, p.lower].iter().filter(|b| b.is_some()).count();
            for f in p.flags.iter().filter(|f| f.starts_with("outside_") || f.starts_with("error")) {
                violations.push(format!("{name} (d={}, m={}): {f}", p.d, p.m));
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!("{points} points, {sides} verified bound sides, violations: {violations:?}"),
    )
}

/// Aggregated vs per-mode evaluation with the target mass spread evenly over each level.
fn compare_flattened<S: Spectrum>(s: &S, target: &TargetSpec, sigma_sq: f64, m: u64, delta: f64) -> f64 {
    let agg = predicted_risk(s, target, sigma_sq, m, delta).unwrap();
    let mut modes = Vec::new();
    for l in s.levels() {
        let mass = target
            .coefficients
            .iter()
            .filter(|c| c.k == l.k)
            .map(|c| c.beta_sq)
            .sum::<f64>();
        let per = mass / l.count;
        modes.extend(std::iter::repeat((l.lambda(), per)).take(l.count as usize));
    }
    let (_, total) = per_mode_total(&modes, 0.0, sigma_sq, m as f64, delta);
    (agg.total / total - 1.0).abs()
}

fn flattened_vs_aggregated() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for (d, tau, m) in [(3, 0.5, 10), (3, 1.0, 50), (3, 2.0, 20), (4, 1.0, 20), (2, 1.0, 40), (5, 1.5, 12)] {
        let sys = build_spectrum(&SpectrumSpec::new(d, tau).unwrap(), m, DEFAULT_TAIL_TOL).unwrap();
        if sys.flattened_total() > 1e4 {
            continue;
        }
        for delta in [0.0, 1e-3] {
            worst = worst.max(compare_flattened(&sys, &TargetSpec::constant(1.0), 1.0, m, delta));
            cases += 1;
        }
    }
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    for _ in 0..50 {
        let s = random_spectrum(&mut rng);
        let m = ((s.flattened_total() * rng.gen_range(0.05..0.9)) as u64).max(1);
        let target = TargetSpec::new(
            (0..4)
                .map(|k| krr_sphere::eigenframework::TargetCoefficient {
                    k,
                    beta_sq: rng.gen_range(0.0..2.0),
                    max_abs: None,
                })
                .collect(),
            None,
        )
        .unwrap();
        worst = worst.max(compare_flattened(&s, &target, 0.7, m, 0.0));
        cases += 1;
    }
    outcome(worst <= 1e-12, format!("{cases} cases, max rel diff {worst:e} (tol 1e-12)"))
}

fn theorem1() -> Outcome {
    let c1 = report("theorem1-case1");
    let t1 = totals(&c1);
    let gaps: Vec<f64> = t1.iter().map(|t| (2.0 - t).abs()).collect();
    let floor_ok = t1.iter().all(|&t| t >= 1.5);
    let shrink_ok = gaps.windows(2).all(|w| w[1] < w[0]);

    let c2 = report("theorem1-case2");
    let t2 = totals(&c2);
    let inc_ok = t2.windows(2).all(|w| w[1] > w[0]);
    let half = t2.len() / 2;
    let ln_m: Vec<f64> = ms(&c2)[half..].iter().map(|m| m.ln()).collect();
    let ln_t: Vec<f64> = t2[half..].iter().map(|t| t.ln()).collect();
    let slope = loglog_slope(&ln_m, &ln_t).unwrap_or(f64::NAN);
    let slope_ok = slope >= 0.2;

    let c3 = report("theorem1-case3");
    let e0: Vec<f64> = c3.points.iter().map(|p| p.e0.unwrap_or(f64::NAN)).collect();
    let (lo, hi) = e0.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &e| (a.min(e), b.max(e)));
    let bracket_ok = lo >= 1.25 && hi <= 4.0;

    outcome(
        floor_ok && shrink_ok && inc_ok && slope_ok && bracket_ok,
        format!(
            "case1 min total {:.6} (>= 1.5: {floor_ok}), gap shrinking: {shrink_ok}; \
             case2 increasing: {inc_ok}, upper-half slope {slope:.4} (>= 0.2); \
             case3 E0 in [{lo:.4}, {hi:.4}] within [1.25, 4]: {bracket_ok}",
            t1.iter().cloned().fold(f64::INFINITY, f64::min)
        ),
    )
}

fn corollary1() -> Outcome {
    let r = report("corollary1");
    let excess: Vec<f64> = totals(&r).iter().map(|t| t - 1.0).collect();
    let last = *excess.last().unwrap();
    let ln_m: Vec<f64> = ms(&r).iter().map(|m| m.ln()).collect();
    let ln_e: Vec<f64> = excess.iter().map(|e| e.ln()).collect();
    let slope = loglog_slope(&ln_m, &ln_e).unwrap_or(f64::NAN);
    let r1 = report("corollary1-alpha1");
    let min1 = totals(&r1).iter().map(|t| t - 1.0).fold(f64::INFINITY, f64::min);
    outcome(
        last < 0.05 && slope < 0.0 && min1 >= 0.05,
        format!(
            "alpha=1.5 last excess {last:.5} (< 0.05), slope {slope:.4} (< 0); \
             alpha=1 min excess {min1:.5} (>= 0.05)"
        ),
    )
}

fn corollary2() -> Outcome {
    let r = report("corollary2");
    let lowers: Vec<Option<f64>> = r.points.iter().map(|p| p.lower).collect();
    let eta = lowers
        .iter()
        .map(|l| l.map_or(f64::NAN, |v| v / r.sigma_sq - 1.0))
        .fold(f64::INFINITY, f64::min);
    let t = totals(&r);
    let totals_ok = eta > 0.0 && t.iter().all(|&x| x >= (1.0 + eta) * r.sigma_sq);
    let min_excess = t.iter().map(|x| x / r.sigma_sq - 1.0).fold(f64::INFINITY, f64::min);
    let mult = multiplicity_scaling_report(&DimensionSchedule::Logarithmic {
        ds: (10..=20).collect(),
    })
    .unwrap();
    let misses: Vec<String> = mult
        .iter()
        .flat_map(|p| {
            p.checks
                .iter()
                .filter(|c| !c.pass)
                .map(move |c| format!("d={} {} = {:.4} vs {:.4}", p.d, c.name, c.value, c.bound))
        })
        .collect();
    outcome(
        totals_ok && misses.is_empty(),
        format!(
            "eta = {eta:.3e} from the lower bound, totals >= (1+eta) sigma^2: {totals_ok} \
             (min excess {min_excess:.5}); multiplicity misses: {misses:?}"
        ),
    )
}

fn corollary3() -> Outcome {
    let mult = multiplicity_scaling_report(&DimensionSchedule::Subpolynomial { ls: vec![1, 2] }).unwrap();
    let r = report("corollary3");
    let mut pass = true;
    let mut parts = Vec::new();
    for (p, sp) in mult.iter().zip(&r.points) {
        let km = p.checks.iter().find(|c| c.name.starts_with("k_m")).unwrap();
        let lm = p.checks.iter().find(|c| c.name.starts_with("L_m/m")).unwrap();
        let ln_m = (p.m as f64).ln();
        let b = 1.0;
        let bound = r.sigma_sq / ((1.0 - 1.0 / ln_m) * (1.0 - (-0.89 * ln_m.sqrt()).exp()))
            + 2.0 * b * b / p.m as f64;
        let total = sp.total.unwrap_or(f64::NAN);
        let total_ok = total <= bound;
        pass &= km.pass && lm.pass && total_ok;
        parts.push(format!(
            "(d={}, m={}): k_m={} (want {}), L_m/m={:.4} <= {:.4}: {}, total {:.4} <= {:.4}: {}",
            p.d, p.m, p.k_m, km.bound, lm.value, lm.bound, lm.pass, total, bound, total_ok
        ));
    }
    outcome(pass, parts.join("; "))
}

fn appendix_a() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut agree_misses = Vec::new();
    for (name, label) in [("appendixA-a", "a"), ("appendixA-b", "b"), ("appendixA-c", "c")] {
        let entries = run_simulations(&sim_preset(name).unwrap()).unwrap();
        let mut means = Vec::new();
        let mut ok = true;
        for e in &entries {
            match e {
                SimEntry::Done(r) => {
                    let se = r.empirical_stderr;
                    means.push(r.empirical_mean);
                    ok &= match label {
                        "a" => r.empirical_mean >= r.null_risk - 2.0 * se,
                        "c" => r.empirical_mean >= 1.05 * r.null_risk,
                        _ => true,
                    };
                    let tol = (0.15 * r.predicted_total).max(3.0 * se);
                    if (r.empirical_mean - r.predicted_total).abs() > tol {
                        agree_misses.push(format!(
                            "{label} m={}: {:.3} vs {:.3}",
                            r.m, r.empirical_mean, r.predicted_total
                        ));
                    }
                }
                SimEntry::Failed { m, error, .. } => {
                    ok = false;
                    means.push(f64::NAN);
                    agree_misses.push(format!("{label} m={m}: failed ({error})"));
                }
            }
        }
        if label == "b" {
            ok &= means.windows(2).all(|w| w[1] > w[0]);
        }
        pass &= ok;
        let shown: Vec<String> = entries
            .iter()
            .map(|e| match e {
                SimEntry::Done(r) => format!(
                    "{:.3}±{:.3} (null {}, pred {:.3})",
                    r.empirical_mean, r.empirical_stderr, r.null_risk, r.predicted_total
                ),
                SimEntry::Failed { .. } => "failed".into(),
            })
            .collect();
        parts.push(format!("({label}) {}: [{}]", if ok { "ok" } else { "miss" }, shown.join(", ")));
    }
    pass &= agree_misses.is_empty();
    parts.push(format!("agreement misses: {agree_misses:?}"));
    outcome(pass, parts.join("; "))
}

fn scratch_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("krr-sphere-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn determinism() -> Outcome {
    let dir = scratch_dir();
    let mut differing = Vec::new();
    let mut files = 0;
    let run = |name: &str, tag: &str| -> PathBuf {
        let path = dir.join(format!("{name}-{tag}"));
        let out = OutputSpec {
            path: Some(path.clone()),
            format: Format::Both,
        };
        if SCAN_PRESETS.contains(&name) {
            run_scan(&scan_preset(name, 2).unwrap(), &out).unwrap();
        } else {
            // a failed experiment still writes its annotated rows
            let _ = run_simulate(&sim_preset(name).unwrap(), &out);
        }
        path
    };
    for name in SCAN_PRESETS.iter().chain(SIM_PRESETS) {
        let a = run(name, "1");
        let b = run(name, "2");
        for ext in ["csv", "json"] {
            files += 1;
            let x = std::fs::read(a.with_extension(ext));
            let y = std::fs::read(b.with_extension(ext));
            match (x, y) {
                (Ok(x), Ok(y)) if x == y && !x.is_empty() => {}
                _ => differing.push(format!("{name}.{ext}")),
            }
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    outcome(
        differing.is_empty(),
        format!("{files} file pairs, differing or missing: {differing:?}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Option<u64>); 12] = [
        ("trace identity", trace_identity, Some(5)),
        ("ratio-bracket certification", ratio_brackets, Some(5)),
        ("Bessel oracle equivalence", bessel_oracle, Some(30)),
        ("kappa fixed point", kappa_fixed_point, None),
        ("bound containment", bound_containment, None),
        ("flattened vs aggregated", flattened_vs_aggregated, None),
        ("fixed-dimension bandwidth cases", theorem1, Some(120)),
        ("polynomial-dimension dichotomy", corollary1, Some(120)),
        ("logarithmic-dimension inconsistency", corollary2, Some(60)),
        ("sub-polynomial benign rate", corollary3, Some(60)),
        ("Monte Carlo reproduction", appendix_a, Some(600)),
        ("determinism", determinism, None),
    ];
    let mut failed = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(f);
        let elapsed = start.elapsed();
        let (mut pass, detail) = match result {
            Ok(o) => (o.pass, o.detail),
            Err(_) => (false, "panicked".to_string()),
        };
        let time = match limit {
            Some(s) => {
                let within = elapsed <= Duration::from_secs(*s);
                pass &= within;
                format!("{:.2}s, limit {s}s", elapsed.as_secs_f64())
            }
            None => format!("{:.2}s", elapsed.as_secs_f64()),
        };
        failed += usize::from(!pass);
        println!(
            "criterion {:>2} {} {name}: {detail} [{time}]",
            i + 1,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
