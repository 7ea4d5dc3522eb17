//! Bounds valid for every spherically invariant distribution with a
//! log-concave radial profile, scale-normalized to E‖x‖ = 1.

use std::f64::consts::LN_2;

use super::{check_alpha, check_n, spherical_generic, Kind, RadialModel, TwoPointResult};
use crate::error::{hypothesis, Error, Result};
use crate::numerics::{integrate_log_domain, PROB_TOL};
use crate::specfun::{ln_one_minus_exp, log_sum_exp};

fn log_integral(f_log: impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    match integrate_log_domain(f_log, a, b, PROB_TOL) {
        Ok(r) => r.value,
        Err(Error::Quadrature { value, .. }) => value,
        Err(e) => panic!("inner rot integral on [{a}, {b}]: {e}"),
    }
}

/// ln φ(t,n): an upper bound on P[‖x‖/‖y‖ ≤ t] built from the tail bound
/// ψ on ‖y‖ and the lower-tail bound g on ‖x‖, φ = ∫ g·(−ψ′).
pub fn rot_ratio_bound(n: usize, t: f64) -> f64 {
    if t <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let nf = n as f64;
    let ln_g = |x: f64| -nf * (1.0 - x) * (1.0 - x) / 4.0;
    let ln_psi_mid = |x: f64| -nf * (x - t) * (x - t) / (4.0 * t * t);
    let mut parts = Vec::with_capacity(4);

    // Middle piece, x in [t, 2t]: −ψ′ = n(x−t)/(2t²)·ψ.
    let mid_hi = (2.0 * t).min(1.0);
    parts.push(log_integral(
        |x| {
            let d = x - t;
            if d <= 0.0 {
                f64::NEG_INFINITY
            } else {
                ln_g(x) + (nf * d / (2.0 * t * t)).ln() + ln_psi_mid(x)
            }
        },
        t,
        mid_hi,
    ));
    if 2.0 * t > 1.0 {
        // g = 1 on [1, 2t]: the piece integrates to ψ(1) − ψ(2t).
        let a = ln_psi_mid(1.0);
        parts.push(a + ln_one_minus_exp(ln_psi_mid(2.0 * t) - a));
    } else if 2.0 * t < 1.0 {
        // Outer piece below 1: −ψ′ = n/(8t)·e^{−nx/(8t)}.
        let c = (nf / (8.0 * t)).ln();
        parts.push(log_integral(|x| ln_g(x) + c - nf * x / (8.0 * t), 2.0 * t, 1.0));
    }
    // Outer piece where g = 1 integrates to ψ at its left end.
    parts.push(-nf * (2.0 * t).max(1.0) / (8.0 * t));
    log_sum_exp(&parts).min(0.0)
}

/// The ratio bound φ packaged as a radial model.
#[derive(Debug, Clone, Copy, Default)]
pub struct RotBoundRadial;

impl RadialModel for RotBoundRadial {
    fn ln_ratio_cdf(&self, n: usize, t: f64) -> f64 {
        rot_ratio_bound(n, t)
    }

    fn kinks(&self) -> Vec<f64> {
        vec![0.5, 1.0]
    }

    fn description(&self) -> String {
        "log-concave radial bound".into()
    }
}

/// Upper bound on the pair probability for any log-concave spherically
/// invariant distribution.
pub fn rotgeneral_f(n: usize, alpha: f64) -> Result<TwoPointResult> {
    check_n(n, 1)?;
    let r = spherical_generic(n, alpha, &RotBoundRadial)?;
    Ok(TwoPointResult { kind: Kind::UpperBound, ..r })
}

/// f = 2·exp(−n(2α−1)²/(4(2α+1)²)), valid for α > ½.
pub fn rotsimple_f(n: usize, alpha: f64) -> Result<TwoPointResult> {
    check_alpha(alpha)?;
    check_n(n, 1)?;
    if alpha <= 0.5 {
        return hypothesis(format!("rot_simple needs alpha > 1/2, got {alpha}"));
    }
    let v = LN_2 - n as f64 * (2.0 * alpha - 1.0).powi(2) / (4.0 * (2.0 * alpha + 1.0).powi(2));
    Ok(TwoPointResult::closed(v, Kind::UpperBound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twopoint::{ball_exact, exponential_exact};
    use approx::assert_relative_eq;

    #[test]
    fn ratio_bound_shape() {
        assert_eq!(rot_ratio_bound(10, 1.0), 0.0);
        assert_eq!(rot_ratio_bound(10, 0.0), f64::NEG_INFINITY);
        let mut prev = f64::NEG_INFINITY;
        for i in 1..40 {
            let v = rot_ratio_bound(50, i as f64 / 40.0);
            assert!(v >= prev - 1e-12 && v <= 0.0);
            prev = v;
        }
    }

    #[test]
    fn ratio_bound_frozen() {
        // scipy.integrate.quad of g·(−ψ′) on the same pieces
        assert_relative_eq!(rot_ratio_bound(10, 0.7).exp(), 0.984_950_457_063_967_7, max_relative = 1e-8);
        assert_relative_eq!(rot_ratio_bound(100, 0.3).exp(), 4.409_112_700_708_784_6e-5, max_relative = 1e-7);
    }

    #[test]
    fn decay_rate_fact() {
        for n in [1usize, 10, 100, 1000] {
            let v = -rotgeneral_f(n, 1.0).unwrap().f.ln() / n as f64;
            assert!(v >= 0.14, "n={n}: {v}");
        }
    }

    #[test]
    fn dominates_exact_members() {
        let r = rotgeneral_f(100, 1.0).unwrap().f.ln();
        assert!(r >= ball_exact(100, 1.0).unwrap().f.ln());
        assert!(r >= exponential_exact(100, 1.0).unwrap().f.ln());
    }

    #[test]
    fn rotsimple_closed_form() {
        assert!(rotsimple_f(10, 0.5).is_err());
        // M = √(δ/f) = √(δ/2)e^{n/72} at α = 1
        let f = rotsimple_f(720, 1.0).unwrap().f.ln();
        assert_relative_eq!(0.5 * (0.01f64.ln() - f), 0.5 * (0.005f64).ln() + 10.0, max_relative = 1e-14);
        let m10 = (0.5 * (0.01f64.ln() - rotsimple_f(4001, 1.0).unwrap().f.ln())).exp();
        assert_relative_eq!(m10, 96_158_590_065_160_622_896_817.0, max_relative = 1e-9);
    }
}
