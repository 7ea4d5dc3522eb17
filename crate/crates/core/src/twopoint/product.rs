//! Product distributions on the unit cube: Hoeffding and Bernstein bounds,
//! and the conditionally-product dependent model.
//!
//! With a centre c, zᵢ = (xᵢ−cᵢ)(yᵢ−cᵢ) − α(xᵢ−cᵢ)² are independent and
//! bounded; an ordered pair is inseparable when Σzᵢ ≥ 0.

use super::{check_alpha, check_n, Kind, TwoPointResult};
use crate::error::{domain, hypothesis, Result};

/// How the Fisher centre relates to the cube and to the mean.
#[derive(Debug, Clone, PartialEq)]
pub enum CenterChoice {
    /// Any centre in the cube, worst case over the mean.
    AnyPoint,
    /// The cube centre, with the mean also at the centre.
    CubeCenter,
    /// The centre is the (coordinatewise) mean.
    Mean,
    /// Explicit centre; the mean is used if known, else the worst case.
    Explicit { c: Vec<f64>, mu: Option<Vec<f64>> },
}

/// Width of the range of zᵢ for a centre coordinate c ∈ [0,1].
fn z_range(c: f64, alpha: f64) -> f64 {
    let cp = c.max(1.0 - c);
    if alpha >= 0.5 {
        cp - cp * cp * (1.0 - alpha) + cp * cp / (4.0 * alpha)
    } else {
        let low = |c: f64| -c + c * c * (1.0 - alpha);
        (1.0 - alpha) * cp * cp - low(c).min(low(1.0 - c))
    }
}

/// Width of the range of zᵢ when the centre is the mean, worst case over the mean.
fn z_range_mean(alpha: f64) -> f64 {
    if alpha >= 0.5 {
        alpha + 1.0 / (4.0 * alpha)
    } else {
        (1.0 - alpha) + 1.0 / (4.0 * (1.0 - alpha))
    }
}

/// Returns (t, Σ range²/n), with t the per-coordinate mean drift of −zᵢ.
fn hoeffding_terms(n: usize, alpha: f64, sigma0: f64, center: &CenterChoice) -> Result<(f64, f64)> {
    let var = sigma0 * sigma0;
    Ok(match center {
        CenterChoice::AnyPoint => (alpha * var - (1.0 - alpha), z_range(1.0, alpha).powi(2)),
        CenterChoice::CubeCenter => (alpha * var, z_range(0.5, alpha).powi(2)),
        CenterChoice::Mean => (alpha * var, z_range_mean(alpha).powi(2)),
        CenterChoice::Explicit { c, mu } => {
            if c.len() != n {
                return domain(format!("centre has length {}, expected {n}", c.len()));
            }
            if c.iter().any(|&ci| !(0.0..=1.0).contains(&ci)) {
                return domain("centre coordinates must lie in [0,1]");
            }
            let drift: f64 = match mu {
                Some(mu) => {
                    if mu.len() != n {
                        return domain(format!("mean has length {}, expected {n}", mu.len()));
                    }
                    c.iter().zip(mu).map(|(ci, mi)| (mi - ci).powi(2)).sum::<f64>()
                }
                None => c.iter().map(|&ci| ci.max(1.0 - ci).powi(2)).sum::<f64>(),
            } / n as f64;
            let r2 = c.iter().map(|&ci| z_range(ci, alpha).powi(2)).sum::<f64>() / n as f64;
            (alpha * var - (1.0 - alpha) * drift, r2)
        }
    })
}

fn check_sigma0(sigma0: f64) -> Result<()> {
    if !(sigma0 > 0.0 && sigma0 <= 0.5) {
        return domain(format!("sigma0 must be in (0, 0.5], got {sigma0}"));
    }
    Ok(())
}

/// Hoeffding bound exp(−2n t²/mean(range²)).
pub fn product_hoeffding_f(n: usize, alpha: f64, sigma0: f64, center: &CenterChoice) -> Result<TwoPointResult> {
    check_alpha(alpha)?;
    check_n(n, 1)?;
    check_sigma0(sigma0)?;
    let (t, r2) = hoeffding_terms(n, alpha, sigma0, center)?;
    if t <= 0.0 {
        return hypothesis(format!("Hoeffding drift t = {t:.6} is not positive for this centre"));
    }
    Ok(TwoPointResult::closed(-2.0 * n as f64 * t * t / r2, Kind::UpperBound))
}

/// Bernstein bound for a product distribution with mean at the cube centre.
pub fn product_bernstein_f(n: usize, alpha: f64, sigma0: f64) -> Result<TwoPointResult> {
    check_alpha(alpha)?;
    check_n(n, 1)?;
    check_sigma0(sigma0)?;
    let a2 = alpha * alpha;
    let rate = if alpha >= 0.5 { 24.0 * a2 / (12.0 * a2 + 13.0) } else { 6.0 * a2 / (2.0 * a2 + alpha + 3.0) };
    Ok(TwoPointResult::closed(-rate * n as f64 * sigma0 * sigma0, Kind::UpperBound))
}

/// Dependent data that is a product distribution conditionally on a hidden
/// variable, centred at the cube centre:
/// exp(−2(4α/(2α+1))⁴(σ₀² − 1/(16α²))²·n), needing σ₀² > 1/(16α²).
pub fn dependent_f(n: usize, alpha: f64, sigma0: f64) -> Result<TwoPointResult> {
    check_alpha(alpha)?;
    check_n(n, 1)?;
    if alpha <= 0.5 {
        return hypothesis(format!("dependent bound needs alpha > 1/2, got {alpha}"));
    }
    let gap = sigma0 * sigma0 - 1.0 / (16.0 * alpha * alpha);
    if !(gap > 0.0) {
        return hypothesis(format!("dependent bound needs sigma0² > 1/(16α²) = {}", 1.0 / (16.0 * alpha * alpha)));
    }
    let k = (4.0 * alpha / (2.0 * alpha + 1.0)).powi(4);
    Ok(TwoPointResult::closed(-2.0 * k * gap * gap * n as f64, Kind::UpperBound))
}
