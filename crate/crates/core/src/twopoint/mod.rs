//! Two-point inseparability probability f(n, α) = P[α(x,x) ≤ (x,y)] for
//! i.i.d. x, y, per distribution family.

mod chernoff;
mod product;
mod rot;
mod slc;
mod spherical;

pub use chernoff::{chernoff_gamma, chernoff_gamma_n, chernoff_objective, ChernoffResult, ComponentSpec, TabulatedDensity};
pub use product::{dependent_f, product_bernstein_f, product_hoeffding_f, CenterChoice};
pub use rot::{rot_ratio_bound, rotgeneral_f, rotsimple_f, RotBoundRadial};
pub use slc::{indbound_exponent, slc_f, SlcParams};
pub use spherical::{
    ball_asymptotic, ball_exact, ball_upper, exponential_asymptotic, exponential_base, exponential_exact, layer_ratio_cdf,
    normal_asymptotic_upper, normal_exact, spherical_generic, BallRadial, ExponentialRadial, FnRadial, LayerRadial, RadialModel,
};

use crate::error::{domain, Result};
use crate::specfun::LogProb;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Exact,
    UpperBound,
    Asymptotic,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Exact => "exact",
            Kind::UpperBound => "upper_bound",
            Kind::Asymptotic => "asymptotic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPointResult {
    pub f: LogProb,
    /// ln of the formula value before clamping to 1; differs from `f` only
    /// for vacuous upper bounds.
    pub raw_ln: f64,
    pub kind: Kind,
    /// Relative numerical error of `f` (0 for closed forms).
    pub numeric_error: f64,
}

impl TwoPointResult {
    pub(crate) fn closed(log_f: f64, kind: Kind) -> TwoPointResult {
        TwoPointResult { f: LogProb::from_ln_bound(log_f), raw_ln: log_f, kind, numeric_error: 0.0 }
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("alpha must be in (0,1], got {alpha}"));
    }
    Ok(())
}

pub(crate) fn check_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        return domain(format!("dimension n must be at least {min}, got {n}"));
    }
    Ok(())
}
