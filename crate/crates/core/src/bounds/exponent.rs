//! The exponent b(α) = −½·lim log f(n,α)/n, in closed form where one is
//! known and by extrapolation otherwise.

use std::f64::consts::FRAC_1_SQRT_2;

use super::{hoeffding_center, two_point, Center, SeparabilityQuery, Theorem};
use crate::error::{Error, Result};
use crate::twopoint::{self, exponential_base};

fn ball_rate(alpha: f64) -> f64 {
    if alpha > FRAC_1_SQRT_2 {
        0.5 * (2.0 * alpha).ln()
    } else {
        -0.25 * (-alpha * alpha).ln_1p()
    }
}

/// Closed-form b(α). Entries without one return [`Error::Unsupported`];
/// use [`exponent_b_numeric`] for those that have a two-point function.
pub fn exponent_b(theorem: &Theorem, alpha: f64, center: &Center) -> Result<f64> {
    let a2 = alpha * alpha;
    // For bounds of the form e^{−cn}, b = −ln f(n₀)/(2n₀) at any n₀.
    let linear = |f: Result<twopoint::TwoPointResult>, n0: usize| -> Result<f64> { Ok(-f?.raw_ln / (2.0 * n0 as f64)) };
    match theorem {
        Theorem::Prototype { r, .. } | Theorem::PrototypeSet { r, .. } => Ok(0.5 * (2.0 * r * alpha).ln()),
        Theorem::BallKnown => Ok(0.5 * (2.0 * alpha).ln()),
        Theorem::BallOptimal | Theorem::BallSimple => Ok(ball_rate(alpha)),
        Theorem::Slc(p) => Ok(a2 * p.gamma / (4.0 * (1.0 + alpha).powi(2))),
        Theorem::SlcImproved(p) => Ok(a2 * p.gamma / (4.0 * (1.0 + a2))),
        Theorem::NormalKnown | Theorem::NormalOptimal | Theorem::NormalSimple => Ok(0.25 * a2.ln_1p()),
        Theorem::ExponentialOptimal | Theorem::ExponentialSimple => Ok(-0.5 * exponential_base(alpha).ln()),
        Theorem::RotSimple => Ok((2.0 * alpha - 1.0).powi(2) / (8.0 * (2.0 * alpha + 1.0).powi(2))),
        Theorem::RotAlpha1 => Ok(0.07),
        Theorem::ProductHoeffding { sigma0 } => {
            let n0 = if let Center::Explicit(c) = center { c.len() } else { 1 };
            linear(twopoint::product_hoeffding_f(n0, alpha, *sigma0, &hoeffding_center(center, n0)), n0)
        }
        Theorem::ProductBernstein { sigma0 } => linear(twopoint::product_bernstein_f(1, alpha, *sigma0), 1),
        Theorem::Dependent { sigma0 } => linear(twopoint::dependent_f(1, alpha, *sigma0), 1),
        Theorem::ProductChernoff(components) => {
            let n0 = components.len();
            Ok(twopoint::chernoff_gamma_n(components, alpha)? / n0 as f64)
        }
        Theorem::ProductLegacy { sigma0 } => Ok(0.25 * sigma0.powi(4)),
        Theorem::LayerOptimal { .. } | Theorem::SphericalCustom(_) | Theorem::RotGeneral => {
            Err(Error::Unsupported(format!("{} has no closed-form exponent; extract it numerically", theorem.id())))
        }
        Theorem::IndependentSlc(_) | Theorem::MixtureSlc(_) | Theorem::Perturbed { .. } => {
            Err(Error::Unsupported(format!("{} does not define an exponent b(α)", theorem.id())))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericExponent {
    /// Richardson combination over n ∈ {500, 1000, 2000}.
    pub extrapolated: f64,
    /// −log f(4000)/8000, the raw estimate at n = 2000.
    pub at_2000: f64,
}

/// b(α) from the two-point function: e(n) = −log f(2n)/(4n), combined as
/// (8e(2000) − 6e(1000) + e(500))/3 to cancel the 1/n and 1/n² terms.
pub fn exponent_b_numeric(theorem: &Theorem, alpha: f64, center: &Center) -> Result<NumericExponent> {
    let e = |n: usize| -> Result<f64> {
        let q = SeparabilityQuery { n: 2 * n, alpha, delta: 0.5, center: center.clone() };
        Ok(-two_point(&q, theorem)?.raw_ln / (4.0 * n as f64))
    };
    let (e500, e1000, e2000) = (e(500)?, e(1000)?, e(2000)?);
    Ok(NumericExponent { extrapolated: (8.0 * e2000 - 6.0 * e1000 + e500) / 3.0, at_2000: e2000 })
}
