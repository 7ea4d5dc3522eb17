//! Property suites shared by `properties.rs` and the acceptance run.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use sepbound::montecarlo::{
    count_inseparable_pairs, count_inseparable_pairs_fast, count_with_each_kernel, estimate_two_point, is_inseparable_ordered,
    DistributionSpec,
};
use std::f64::consts::LN_2;

use sepbound::specfun::{ln_one_minus_exp, reg_inc_beta};
use sepbound::twopoint::{
    ball_exact, ball_upper, exponential_exact, normal_asymptotic_upper, normal_exact, rotgeneral_f, slc_f, SlcParams,
};

pub const CASES: u32 = 1000;

/// Slack for comparisons between two quadratures, in log units.
const LN_SLACK: f64 = 1e-8;

pub const PROPERTIES: [&str; 7] = [
    "twopoint_monotone",
    "twopoint_dominance",
    "ibound_identity",
    "inc_beta_symmetry",
    "pair_check_invariance",
    "half_cube_inseparable",
    "duplicate_pair_count",
];

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() })
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, TestCaseError> {
    r.map_err(|e| TestCaseError::fail(e.to_string()))
}

pub fn run(name: &str, cases: u32) -> Result<(), String> {
    let mut r = runner(cases);
    let msg = |e: &dyn std::fmt::Display| e.to_string();
    match name {
        "twopoint_monotone" => {
            r.run(&(2usize..400, 0.3f64..1.0, 1e-3f64..0.05), |(n, a, da)| twopoint_monotone(n, a, da)).map_err(|e| msg(&e))
        }
        "twopoint_dominance" => r.run(&(2usize..400, 0.3f64..=1.0), |(n, a)| twopoint_dominance(n, a)).map_err(|e| msg(&e)),
        "ibound_identity" => r.run(&(1usize..400, 0.01f64..5.0), |(n, t)| ibound_identity(n, t)).map_err(|e| msg(&e)),
        "inc_beta_symmetry" => {
            r.run(&(0.001f64..0.999, 0.1f64..300.0, 0.1f64..300.0), |(z, a, b)| inc_beta_symmetry(z, a, b)).map_err(|e| msg(&e))
        }
        "pair_check_invariance" => r
            .run(
                &(1usize..16).prop_flat_map(|n| {
                    (
                        prop::collection::vec(-10.0f64..10.0, n),
                        prop::collection::vec(-10.0f64..10.0, n),
                        prop::collection::vec(-10.0f64..10.0, n),
                        0.05f64..=1.0,
                        -20i32..20,
                    )
                }),
                |(x, y, c, a, k)| pair_check_invariance(&x, &y, &c, a, k),
            )
            .map_err(|e| msg(&e)),
        "half_cube_inseparable" => {
            r.run(&(1usize..40, 0.05f64..=1.0, any::<u64>()), |(n, a, seed)| half_cube(n, a, seed)).map_err(|e| msg(&e))
        }
        "duplicate_pair_count" => r
            .run(
                &(1usize..8, 2usize..90).prop_flat_map(|(n, m)| {
                    (Just(n), prop::collection::vec(-3i8..=3, n * m), 0..m, 0.3f64..=1.0, prop::bool::ANY)
                }),
                |(n, grid, k, a, coarse)| duplicate_pair_count(n, &grid, k, a, coarse),
            )
            .map_err(|e| msg(&e)),
        other => Err(format!("unknown property {other}")),
    }
}

fn twopoint_monotone(n: usize, a: f64, da: f64) -> Result<(), TestCaseError> {
    let a2 = (a + da).min(1.0);
    type F = fn(usize, f64) -> sepbound::Result<sepbound::twopoint::TwoPointResult>;
    for (name, f) in [("ball", ball_exact as F), ("normal", normal_exact as F), ("exponential", exponential_exact as F)] {
        let base = ok(f(n, a))?.raw_ln;
        let more_n = ok(f(n + 1, a))?.raw_ln;
        let more_a = ok(f(n, a2))?.raw_ln;
        prop_assert!(more_n <= base + LN_SLACK, "{name}: f(n+1) > f(n) at n={n}, alpha={a}");
        prop_assert!(more_a <= base + LN_SLACK, "{name}: f increases in alpha at n={n}, alpha={a}");
    }
    Ok(())
}

fn twopoint_dominance(n: usize, a: f64) -> Result<(), TestCaseError> {
    let ball = ok(ball_exact(n, a))?.raw_ln;
    prop_assert!(ok(ball_upper(n, a))?.raw_ln >= ball - LN_SLACK);
    let normal = ok(normal_exact(n, a))?.raw_ln;
    prop_assert!(ok(normal_asymptotic_upper(n, a))?.raw_ln >= normal - LN_SLACK);
    let slc = SlcParams::isotropic(1.0, n).expect("n ≥ 2 exceeds 1/γ");
    prop_assert!(ok(slc_f(n, a, &slc, false))?.raw_ln >= normal - LN_SLACK);
    if a > 0.5 {
        let rot = ok(rotgeneral_f(n, a))?.raw_ln;
        prop_assert!(rot >= ball - LN_SLACK, "rot < ball at n={n}, alpha={a}");
        prop_assert!(rot >= ok(exponential_exact(n, a))?.raw_ln - LN_SLACK, "rot < exponential at n={n}, alpha={a}");
    }
    Ok(())
}

fn ibound_identity(n: usize, t: f64) -> Result<(), TestCaseError> {
    let nf = n as f64;
    let lhs = ok(reg_inc_beta(t / (1.0 + t), nf, nf))?;
    // 1 − 4t/(1+t)² is formed exactly as w; rounding it near t = 1 would
    // cost half the digits. The complement is used only when it cannot cancel.
    // Everything stays in logs: the values reach e^{-700}.
    let w = ((t - 1.0) / (t + 1.0)).powi(2);
    let ln_upper = ok(reg_inc_beta(w, 0.5, nf))?.ln();
    let ln_iz = if ln_upper < -LN_2 {
        ln_one_minus_exp(ln_upper)
    } else {
        ok(reg_inc_beta(4.0 * t / ((1.0 + t) * (1.0 + t)), nf, 0.5))?.ln()
    };
    let ln_half = ln_iz - LN_2;
    if t <= 1.0 {
        prop_assert!((lhs.ln() - ln_half).abs() <= 1e-10 * ln_half.abs().max(1.0), "n={n} t={t}: {} vs {ln_half}", lhs.ln());
        if t < 1.0 {
            let bound = -(2.0 * (std::f64::consts::PI * nf).sqrt()).ln()
                + ((1.0 + t) / (1.0 - t)).ln()
                + nf * (4.0 * t / ((1.0 + t) * (1.0 + t))).ln();
            prop_assert!(lhs.ln() <= bound + 1e-12, "bound fails at n={n} t={t}");
        }
    } else {
        prop_assert!((lhs.prob() - (1.0 - ln_half.exp())).abs() <= 1e-12, "n={n} t={t}");
    }
    Ok(())
}

fn inc_beta_symmetry(z: f64, a: f64, b: f64) -> Result<(), TestCaseError> {
    let s = ok(reg_inc_beta(z, a, b))?.prob() + ok(reg_inc_beta(1.0 - z, b, a))?.prob();
    prop_assert!((s - 1.0).abs() <= 1e-12, "z={z} a={a} b={b}: sum {s}");
    Ok(())
}

fn pair_check_invariance(x: &[f64], y: &[f64], c: &[f64], a: f64, k: i32) -> Result<(), TestCaseError> {
    let base = ok(is_inseparable_ordered(x, y, a, c))?;
    let s = 2f64.powi(k);
    let scale = |v: &[f64]| v.iter().map(|t| t * s).collect::<Vec<_>>();
    prop_assert_eq!(ok(is_inseparable_ordered(&scale(x), &scale(y), a, &scale(c)))?, base);
    let shift = |v: &[f64]| v.iter().zip(c).map(|(t, ci)| t - ci).collect::<Vec<_>>();
    prop_assert_eq!(ok(is_inseparable_ordered(&shift(x), &shift(y), a, &vec![0.0; c.len()]))?, base);
    Ok(())
}

fn half_cube(n: usize, a: f64, seed: u64) -> Result<(), TestCaseError> {
    let e = ok(estimate_two_point(&DistributionSpec::DependentHalfCube, n, a, None, 10_000, seed))?;
    prop_assert_eq!(e.hits, e.trials);
    Ok(())
}

/// Copying point k adds its two mutual pairs plus one copy of every pair it
/// was already in.
fn duplicate_pair_count(n: usize, grid: &[i8], k: usize, a: f64, coarse: bool) -> Result<(), TestCaseError> {
    let step = if coarse { 1.0 } else { 0.37 };
    let pts: Vec<Vec<f64>> = grid.chunks(n).map(|p| p.iter().map(|&v| v as f64 * step).collect()).collect();
    let c = vec![0.25 * step; n];
    let before = ok(count_inseparable_pairs(&pts, a, &c))?;
    let mut involved = 0u64;
    for (_, p) in pts.iter().enumerate().filter(|&(j, _)| j != k) {
        involved += ok(is_inseparable_ordered(&pts[k], p, a, &c))? as u64 + ok(is_inseparable_ordered(p, &pts[k], a, &c))? as u64;
    }
    let mut dup = pts.clone();
    dup.push(pts[k].clone());
    let after = ok(count_inseparable_pairs(&dup, a, &c))?;
    prop_assert_eq!(after, before + involved + 2);
    let flat: Vec<f64> = dup.concat();
    prop_assert_eq!(ok(count_inseparable_pairs_fast(&flat, n, a, &c))?, after);
    for (kernel, v) in ok(count_with_each_kernel(&flat, n, a, &c))? {
        prop_assert_eq!(v, after, "{} kernel", kernel);
    }
    Ok(())
}
