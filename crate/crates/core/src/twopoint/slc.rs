//! Strongly log-concave families.

use std::f64::consts::PI;

use super::{check_alpha, check_n, Kind, TwoPointResult};
use crate::error::{domain, hypothesis, Result};
use crate::specfun::log_add_exp;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SlcParams {
    /// Strong log-concavity constant.
    pub gamma: f64,
    /// E‖x‖; filled from √(n − 1/γ) when absent.
    pub mu: Option<f64>,
    /// Norm of the mean.
    pub x0_norm: f64,
}

impl SlcParams {
    pub fn new(gamma: f64) -> SlcParams {
        SlcParams { gamma, mu: None, x0_norm: 0.0 }
    }

    /// Isotropic parameters for dimension n with μ from the variance bound.
    pub fn isotropic(gamma: f64, n: usize) -> Result<SlcParams> {
        let p = SlcParams::new(gamma);
        Ok(SlcParams { mu: Some(p.mu_for(n)?), ..p })
    }

    pub fn mu_for(&self, n: usize) -> Result<f64> {
        if !(self.gamma > 0.0) {
            return domain(format!("gamma must be positive, got {}", self.gamma));
        }
        if let Some(mu) = self.mu {
            if !(mu >= 0.0) {
                return domain(format!("mu must be nonnegative, got {mu}"));
            }
            return Ok(mu);
        }
        let m2 = n as f64 - 1.0 / self.gamma;
        if m2 <= 0.0 {
            return hypothesis(format!("n = {n} must exceed 1/gamma = {}", 1.0 / self.gamma));
        }
        Ok(m2.sqrt())
    }
}

/// Pair probability bound for an isotropic γ-SLC distribution.
///
/// Simple: 2·exp(−γα²μ²/(2(1+α)²)).
/// Improved: α²/(1+α²)^{3/2}·√(2πγ)·μ·exp(−γα²μ²/(2(1+α²))) + exp(−γα²μ²/2),
/// which needs n > (1+2α²)/(γα²).
pub fn slc_f(n: usize, alpha: f64, slc: &SlcParams, improved: bool) -> Result<TwoPointResult> {
    check_alpha(alpha)?;
    check_n(n, 1)?;
    let mu = slc.mu_for(n)?;
    let g = slc.gamma;
    let a2 = alpha * alpha;
    let gm2 = g * mu * mu;
    let v = if improved {
        let need = (1.0 + 2.0 * a2) / (g * a2);
        if !(n as f64 > need) {
            return hypothesis(format!("improved SLC bound needs n > (1+2α²)/(γα²) = {need:.4}"));
        }
        let first = (a2 / (1.0 + a2).powf(1.5) * (2.0 * PI * g).sqrt() * mu).ln() - a2 * gm2 / (2.0 * (1.0 + a2));
        log_add_exp(first, -a2 * gm2 / 2.0)
    } else {
        std::f64::consts::LN_2 - a2 * gm2 / (2.0 * (1.0 + alpha).powi(2))
    };
    Ok(TwoPointResult::closed(v, Kind::UpperBound))
}

/// min over ordered pairs (i,j) of γᵢγⱼ(μᵢα − ‖xⱼ⁰‖)² / (2(√γⱼ·α + √γᵢ)²).
///
/// Each pair's inseparability probability is at most 2·e^{−E*}, so the set
/// bound is M < √(δ/2)·e^{E*/2}. Every μᵢ must be set.
pub fn indbound_exponent(points: &[SlcParams], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if points.is_empty() {
        return domain("need at least one component");
    }
    let mut best = f64::INFINITY;
    for (i, pi) in points.iter().enumerate() {
        let mu = pi.mu.ok_or_else(|| crate::Error::Domain(format!("component {i} has no mu")))?;
        if !(pi.gamma > 0.0) {
            return domain(format!("component {i} has nonpositive gamma"));
        }
        for (j, pj) in points.iter().enumerate() {
            if !(pj.x0_norm < alpha * mu) {
                return hypothesis(format!("pair (i={i}, j={j}): ‖x_j⁰‖ = {} is not below α·μ_i = {}", pj.x0_norm, alpha * mu));
            }
            let num = pi.gamma * pj.gamma * (mu * alpha - pj.x0_norm).powi(2);
            let den = 2.0 * (pj.gamma.sqrt() * alpha + pi.gamma.sqrt()).powi(2);
            best = best.min(num / den);
        }
    }
    Ok(best)
}
