//! Spherically invariant families: uniform ball, spherical layer, standard
//! normal, spherical exponential, and a generic radial model.
//!
//! For a density depending only on ‖x‖, the pair probability reduces to one
//! integral against the CDF h(n,t) of the norm ratio ‖x‖/‖y‖:
//!
//! p = α/B((n−1)/2, ½) ∫₀^{1/α} (1−α²t²)^{(n−3)/2} h(n,t) dt.
//!
//! With t = sin(u)/α this becomes (1/B) ∫₀^{π/2} cos^{n−2}(u) h(n, sin(u)/α) du,
//! which has no endpoint singularity for any n ≥ 2.

use std::f64::consts::{FRAC_PI_2, LN_2, PI, SQRT_2};

use super::{check_alpha, check_n, Kind, TwoPointResult};
use crate::error::{domain, Result};
use crate::numerics::{integrate_log_split, integrate_split, PROB_TOL};
use crate::specfun::{ln_beta, ln_one_minus_exp, log_add_exp, reg_inc_beta};

/// Distribution of the norm ratio of two i.i.d. points.
///
/// Implementations are called from parallel code and must be thread-safe.
pub trait RadialModel: Send + Sync {
    /// ln P[‖x‖/‖y‖ ≤ t].
    fn ln_ratio_cdf(&self, n: usize, t: f64) -> f64;

    fn ratio_cdf(&self, n: usize, t: f64) -> f64 {
        self.ln_ratio_cdf(n, t).exp()
    }

    /// Points in t where h has a derivative jump.
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }

    fn description(&self) -> String;
}

/// Uniform distribution in the unit ball: ‖x‖ has CDF rⁿ.
#[derive(Debug, Clone, Copy, Default)]
pub struct BallRadial;

impl RadialModel for BallRadial {
    fn ln_ratio_cdf(&self, n: usize, t: f64) -> f64 {
        let n = n as f64;
        if t <= 0.0 {
            f64::NEG_INFINITY
        } else if t <= 1.0 {
            n * t.ln() - LN_2
        } else {
            (-0.5 * (-n * t.ln()).exp()).ln_1p()
        }
    }

    fn kinks(&self) -> Vec<f64> {
        vec![1.0]
    }

    fn description(&self) -> String {
        "uniform ball".into()
    }
}

/// Uniform distribution in the layer R ≤ ‖x‖ ≤ 1.
#[derive(Debug, Clone, Copy)]
pub struct LayerRadial {
    pub inner: f64,
}

impl LayerRadial {
    pub fn new(inner: f64) -> Result<LayerRadial> {
        if !(inner > 0.0 && inner < 1.0) {
            return domain(format!("layer inner radius must be in (0,1), got {inner}"));
        }
        Ok(LayerRadial { inner })
    }
}

impl RadialModel for LayerRadial {
    fn ln_ratio_cdf(&self, n: usize, t: f64) -> f64 {
        let r = self.inner;
        let nf = n as f64;
        let ln_norm = 2.0 * (-(nf * r.ln()).exp()).ln_1p() + LN_2;
        if t <= r {
            f64::NEG_INFINITY
        } else if t <= 1.0 {
            // t⁻ⁿ(tⁿ−Rⁿ)² = tⁿ(1−(R/t)ⁿ)²
            nf * t.ln() + 2.0 * (-(nf * (r / t).ln()).exp()).ln_1p() - ln_norm
        } else if t * r < 1.0 {
            // 1 − t⁻ⁿ(1−(Rt)ⁿ)² / (2(1−Rⁿ)²)
            let tail = -nf * t.ln() + 2.0 * (-(nf * (r * t).ln()).exp()).ln_1p() - ln_norm;
            ln_one_minus_exp(tail.min(0.0))
        } else {
            0.0
        }
    }

    fn kinks(&self) -> Vec<f64> {
        vec![self.inner, 1.0, 1.0 / self.inner]
    }

    fn description(&self) -> String {
        format!("spherical layer, inner radius {}", self.inner)
    }
}

/// Norm ratio CDF of the uniform layer, in the linear domain.
pub fn layer_ratio_cdf(n: usize, t: f64, inner: f64) -> Result<f64> {
    check_n(n, 1)?;
    if !(t > 0.0) {
        return domain(format!("ratio t must be positive, got {t}"));
    }
    Ok(LayerRadial::new(inner)?.ratio_cdf(n, t))
}

/// Spherical exponential: ‖x‖ ~ Gamma(n, 1), so ‖x‖/(‖x‖+‖y‖) ~ Beta(n, n).
///
/// h(n,t) = I_{t/(1+t)}(n,n), evaluated as ½I_{4t/(1+t)²}(n,½) for t ≤ 1 and
/// its complement above, which avoids cancellation at large n.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExponentialRadial;

impl RadialModel for ExponentialRadial {
    fn ln_ratio_cdf(&self, n: usize, t: f64) -> f64 {
        if t <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let nf = n as f64;
        // ½I_z(n, ½) below t = 1 and 1 − ½I_z(n, ½) above, z = 4t/(1+t)².
        // The complement I_w(½, n) = 1 − I_z(n, ½) takes w = ((t−1)/(t+1))²
        // formed directly, since near t = 1 the rounding of 1 − z swamps
        // the result.
        let w = ((t - 1.0) / (t + 1.0)).powi(2).min(1.0);
        let ln_upper = reg_inc_beta(w, 0.5, nf).expect("w in [0,1]").ln();
        if t > 1.0 {
            log_add_exp(0.0, ln_upper) - LN_2
        } else if ln_upper < -LN_2 {
            ln_one_minus_exp(ln_upper) - LN_2
        } else {
            let z = 4.0 * t / ((1.0 + t) * (1.0 + t));
            reg_inc_beta(z, nf, 0.5).expect("z in [0,1]").ln() - LN_2
        }
    }

    fn kinks(&self) -> Vec<f64> {
        vec![1.0]
    }

    fn description(&self) -> String {
        "spherical exponential".into()
    }
}

type RatioFn = dyn Fn(usize, f64) -> f64 + Send + Sync;

/// Caller-supplied ratio CDF given in the linear domain.
pub struct FnRadial {
    h: Box<RatioFn>,
    kinks: Vec<f64>,
    description: String,
}

impl FnRadial {
    pub fn new(
        h: impl Fn(usize, f64) -> f64 + Send + Sync + 'static,
        kinks: Vec<f64>,
        description: impl Into<String>,
    ) -> FnRadial {
        FnRadial { h: Box::new(h), kinks, description: description.into() }
    }
}

impl RadialModel for FnRadial {
    fn ln_ratio_cdf(&self, n: usize, t: f64) -> f64 {
        (self.h)(n, t).clamp(0.0, 1.0).ln()
    }

    fn ratio_cdf(&self, n: usize, t: f64) -> f64 {
        (self.h)(n, t).clamp(0.0, 1.0)
    }

    fn kinks(&self) -> Vec<f64> {
        self.kinks.clone()
    }

    fn description(&self) -> String {
        self.description.clone()
    }
}

/// Dimension above which the integrand is handled in the log domain.
const LOG_DOMAIN_N: usize = 60;

/// Pair probability for any spherically invariant family with ratio CDF `radial`.
/// n = 1 uses the direct limit ½·h(1/α): same sign and |x|/|y| ≤ 1/α.
pub fn spherical_generic(n: usize, alpha: f64, radial: &dyn RadialModel) -> Result<TwoPointResult> {
    check_alpha(alpha)?;
    check_n(n, 1)?;
    if n == 1 {
        let v = radial.ln_ratio_cdf(1, 1.0 / alpha) - LN_2;
        return Ok(TwoPointResult::closed(v, Kind::Exact));
    }
    let nf = n as f64;
    let ln_b = ln_beta((nf - 1.0) / 2.0, 0.5)?;
    let mut splits: Vec<f64> =
        radial.kinks().into_iter().filter(|&t| t > 0.0 && alpha * t < 1.0).map(|t| (alpha * t).asin()).collect();
    splits.sort_by(f64::total_cmp);
    let log_integrand = |u: f64| {
        let c = u.cos();
        let lh = radial.ln_ratio_cdf(n, u.sin() / alpha);
        if n == 2 {
            lh
        } else {
            (nf - 2.0) * c.ln() + lh
        }
    };
    let (ln_int, rel_err) = if n > LOG_DOMAIN_N {
        let r = integrate_log_split(log_integrand, 0.0, FRAC_PI_2, &splits, PROB_TOL)?;
        (r.value, r.abs_error_estimate)
    } else {
        let r = integrate_split(|u| log_integrand(u).exp(), 0.0, FRAC_PI_2, &splits, PROB_TOL)?;
        (r.value.ln(), r.abs_error_estimate / r.value)
    };
    let ln_f = ln_int - ln_b;
    Ok(TwoPointResult {
        f: crate::specfun::LogProb::from_ln_bound(ln_f),
        raw_ln: ln_f,
        kind: Kind::Exact,
        numeric_error: rel_err,
    })
}

/// ½(2α)⁻ⁿ; an upper bound for the uniform ball, equality at α = 1.
pub fn ball_upper(n: usize, alpha: f64) -> Result<TwoPointResult> {
    check_alpha(alpha)?;
    check_n(n, 1)?;
    Ok(TwoPointResult::closed(-LN_2 - n as f64 * (2.0 * alpha).ln(), Kind::UpperBound))
}

pub fn ball_exact(n: usize, alpha: f64) -> Result<TwoPointResult> {
    check_n(n, 2)?;
    spherical_generic(n, alpha, &BallRadial)
}

/// Large-n bound for the ball: q(n,α) below α = √2/2, ½(2α)⁻ⁿ above.
pub fn ball_asymptotic(n: usize, alpha: f64) -> Result<TwoPointResult> {
    check_alpha(alpha)?;
    check_n(n, 4)?;
    let switch = SQRT_2 / 2.0;
    if (alpha - switch).abs() < 1e-12 {
        return Err(crate::Error::Unsupported("ball asymptotic form is not defined at alpha = √2/2".into()));
    }
    if alpha > switch {
        return ball_upper(n, alpha);
    }
    let nf = n as f64;
    let a2 = alpha * alpha;
    let v = -0.5 * (2.0 * PI).ln() - (alpha * (1.0 - 2.0 * a2)).ln() + 1.5 * nf.ln() - 2.0 * (nf - 3.0).ln()
        + (nf + 3.0) / 2.0 * (-a2).ln_1p();
    Ok(TwoPointResult::closed(v, Kind::UpperBound))
}

/// Standard normal: p = ½ I_{1/(1+α²)}(n/2, ½).
pub fn normal_exact(n: usize, alpha: f64) -> Result<TwoPointResult> {
    check_alpha(alpha)?;
    check_n(n, 1)?;
    let z = 1.0 / (1.0 + alpha * alpha);
    let v = reg_inc_beta(z, n as f64 / 2.0, 0.5)?.ln() - LN_2;
    Ok(TwoPointResult::closed(v, Kind::Exact))
}

/// √((1+α²)/(2πnα²))·(1+α²)^{−n/2}, an upper bound on the normal pair probability.
pub fn normal_asymptotic_upper(n: usize, alpha: f64) -> Result<TwoPointResult> {
    check_alpha(alpha)?;
    check_n(n, 1)?;
    let nf = n as f64;
    let s = 1.0 + alpha * alpha;
    let v = 0.5 * (s / (2.0 * PI * nf * alpha * alpha)).ln() - nf / 2.0 * s.ln();
    Ok(TwoPointResult::closed(v, Kind::UpperBound))
}

pub fn exponential_exact(n: usize, alpha: f64) -> Result<TwoPointResult> {
    check_n(n, 2)?;
    spherical_generic(n, alpha, &ExponentialRadial)
}

/// Per-dimension decay rate of the exponential pair probability.
pub fn exponential_base(alpha: f64) -> f64 {
    let s = (1.0 + 8.0 * alpha * alpha).sqrt();
    4.0 * SQRT_2 * alpha * (s - 1.0) / (s + 4.0 * alpha * alpha - 1.0).powf(1.5)
}

/// Leading-order asymptote of the exponential pair probability.
pub fn exponential_asymptotic(n: usize, alpha: f64) -> Result<TwoPointResult> {
    check_alpha(alpha)?;
    check_n(n, 1)?;
    let nf = n as f64;
    let a2 = alpha * alpha;
    let s2 = 1.0 + 8.0 * a2;
    let s = s2.sqrt();
    let pre = (1.0 + 5.0 * a2 + (1.0 + a2) * s).sqrt() / (2.0 * alpha * (PI * nf).sqrt() * s2.powf(0.25));
    let v = pre.ln() + nf * exponential_base(alpha).ln();
    Ok(TwoPointResult::closed(v, Kind::Asymptotic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ball_at_alpha_one_is_exact_power_of_two() {
        let up = ball_upper(10, 1.0).unwrap();
        assert_relative_eq!(up.f.prob(), 4.8828125e-4, max_relative = 1e-15);
        let ex = ball_exact(10, 1.0).unwrap();
        assert_relative_eq!(ex.f.ln(), up.f.ln(), max_relative = 1e-10);
        assert_relative_eq!(ball_upper(100, 0.8).unwrap().f.ln(), -LN_2 - 100.0 * 1.6f64.ln(), max_relative = 1e-15);
        for n in [2, 3, 5, 61, 200, 1000] {
            let ex = ball_exact(n, 1.0).unwrap().f.ln();
            let up = ball_upper(n, 1.0).unwrap().f.ln();
            assert!((ex - up).abs() < 1e-9 * up.abs(), "n={n}: {ex} vs {up}");
        }
    }

    #[test]
    fn ball_exact_rejects_n1() {
        assert!(ball_exact(1, 0.5).is_err());
    }

    #[test]
    fn ball_exact_frozen() {
        // mpmath quad of the t-form integral at 30 digits.
        let cases = [(12, 0.6, 0.017_776_915_183_854_197), (200, 0.5, 2.308_612_796_041_593_7e-14)];
        for (n, a, want) in cases {
            let got = ball_exact(n, a).unwrap().f.prob();
            assert_relative_eq!(got, want, max_relative = 1e-8);
        }
    }

    #[test]
    fn ball_asymptotic_branches() {
        assert!(ball_asymptotic(100, SQRT_2 / 2.0).is_err());
        assert_relative_eq!(ball_asymptotic(100, 1.0).unwrap().f.ln(), -101.0 * LN_2, max_relative = 1e-15);
        let q = ball_asymptotic(200, 0.5).unwrap().f.ln();
        let p = ball_exact(200, 0.5).unwrap().f.ln();
        let r = (q - p).exp();
        assert!((1.0..=1.2).contains(&r), "ratio {r}");
    }

    #[test]
    fn layer_pieces() {
        assert_eq!(layer_ratio_cdf(8, 0.4, 0.5).unwrap(), 0.0);
        assert_eq!(layer_ratio_cdf(8, 2.5, 0.5).unwrap(), 1.0);
        assert_relative_eq!(layer_ratio_cdf(8, 1.0, 0.5).unwrap(), 0.5, max_relative = 1e-14);
        // continuity at the kinks
        for t in [0.5, 1.0, 2.0] {
            let lo = layer_ratio_cdf(8, t * (1.0 - 1e-9), 0.5).unwrap();
            let hi = layer_ratio_cdf(8, t * (1.0 + 1e-9), 0.5).unwrap();
            assert!((lo - hi).abs() < 1e-7, "t={t}");
        }
        assert!(layer_ratio_cdf(8, 1.0, 1.0).is_err());
    }

    #[test]
    fn layer_degenerates_to_ball() {
        let ball = ball_exact(20, 0.7).unwrap().f.ln();
        let layer = spherical_generic(20, 0.7, &LayerRadial::new(1e-4).unwrap()).unwrap().f.ln();
        assert_relative_eq!(layer, ball, max_relative = 1e-9);
    }

    #[test]
    fn generic_with_fn_radial_matches_ball() {
        let h = FnRadial::new(
            |n, t| if t <= 1.0 { t.powi(n as i32) / 2.0 } else { 1.0 - t.powi(-(n as i32)) / 2.0 },
            vec![1.0],
            "ball",
        );
        let a = spherical_generic(15, 0.8, &h).unwrap().f.prob();
        let b = ball_exact(15, 0.8).unwrap().f.prob();
        assert_relative_eq!(a, b, max_relative = 1e-9);
    }

    #[test]
    fn normal_values() {
        assert_relative_eq!(normal_exact(1, 1.0).unwrap().f.prob(), 0.25, max_relative = 1e-13);
        // Example value: ½+√(¼+δ/p) = 1,141,060 at δ = 0.01
        let p = normal_exact(100, 0.9).unwrap().f.prob();
        let m = 0.5 + (0.25 + 0.01 / p).sqrt();
        assert_eq!(m.floor(), 1_141_060.0);
        assert!(normal_asymptotic_upper(100, 1.0).unwrap().f.ln() >= normal_exact(100, 1.0).unwrap().f.ln());
    }

    #[test]
    fn exponential_identity() {
        // I_{t/(1+t)}(n,n) against the half-argument form at t = 0.37, n = 40
        let (t, n) = (0.37f64, 40usize);
        let direct = reg_inc_beta(t / (1.0 + t), n as f64, n as f64).unwrap().prob();
        let alt = ExponentialRadial.ratio_cdf(n, t);
        assert!((direct - alt).abs() < 1e-11 * direct.max(1e-300) + 1e-300, "{direct} vs {alt}");
        let t = 1.9;
        let direct = reg_inc_beta(t / (1.0 + t), n as f64, n as f64).unwrap().prob();
        assert!((direct - ExponentialRadial.ratio_cdf(n, t)).abs() < 1e-13);
    }

    #[test]
    fn exponential_frozen_and_asymptote() {
        // scipy dense log-domain quadrature
        let p = exponential_exact(10, 1.0).unwrap().f.prob();
        assert_relative_eq!(0.5 + (0.25 + 0.01 / p).sqrt(), 1.561_6, max_relative = 1e-4);
        let b = exponential_base(1.0);
        assert_relative_eq!(-0.5 * b.ln(), (27f64.powf(0.25) / 2.0).ln(), max_relative = 1e-14);
        assert_relative_eq!(-0.5 * b.ln(), 0.130_8, max_relative = 1e-3);
        let ex = exponential_exact(500, 1.0).unwrap().f.ln();
        let asy = exponential_asymptotic(500, 1.0).unwrap().f.ln();
        assert!((asy - ex).abs() < 0.05_f64.ln_1p(), "{}", (asy - ex).exp());
        assert!(exponential_asymptotic(4, 1.0).unwrap().f.ln().is_finite());
    }
}
