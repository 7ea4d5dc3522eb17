//! Chernoff exponents for product distributions with explicit components.
//!
//! Every component is centred at its mean. With x̃, ỹ i.i.d. centred copies
//! and z = x̃ỹ − αx̃², the per-coordinate exponent is
//! γ = ½·sup_{λ≥0} −log E[e^{λz}]. The expectation is taken over x̃ with the
//! inner moment generating function of ỹ in closed form where possible.

use std::f64::consts::LN_2;

use super::check_alpha;
use crate::error::{domain, Error, Result};
use crate::numerics::{
    integrate_adaptive_abs, integrate_log_domain, integrate_log_split, integrate_split_abs, maximize_unimodal,
};
use crate::specfun::log_sum_exp;

const INNER_TOL: f64 = 1e-12;
const OUTER_TOL: f64 = 1e-10;
const LAMBDA_CAP: f64 = 65_536.0;

/// A piecewise-linear density on a grid, normalized on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDensity {
    xs: Vec<f64>,
    density: Vec<f64>,
    cdf: Vec<f64>,
    mean: f64,
    variance: f64,
}

impl TabulatedDensity {
    pub fn new(xs: Vec<f64>, density: Vec<f64>) -> Result<TabulatedDensity> {
        if xs.len() < 2 || xs.len() != density.len() {
            return domain("tabulated density needs at least two (x, density) pairs of equal length");
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) || density.iter().any(|&d| !(d >= 0.0) || !d.is_finite()) {
            return domain("tabulated grid must be strictly increasing with finite nonnegative densities");
        }
        let mut cdf = vec![0.0];
        for i in 0..xs.len() - 1 {
            let area = 0.5 * (density[i] + density[i + 1]) * (xs[i + 1] - xs[i]);
            cdf.push(cdf[i] + area);
        }
        let total = *cdf.last().unwrap();
        if !(total > 0.0) {
            return domain("tabulated density has zero mass");
        }
        let density: Vec<f64> = density.iter().map(|d| d / total).collect();
        let cdf: Vec<f64> = cdf.iter().map(|c| c / total).collect();
        // Exact moments of a piecewise-linear density.
        let (mut m1, mut m2) = (0.0, 0.0);
        for i in 0..xs.len() - 1 {
            let (a, b) = (xs[i], xs[i + 1]);
            let (fa, fb) = (density[i], density[i + 1]);
            let h = b - a;
            m1 += h / 6.0 * (fa * (2.0 * a + b) + fb * (a + 2.0 * b));
            m2 += h / 12.0 * (fa * (3.0 * a * a + 2.0 * a * b + b * b) + fb * (a * a + 2.0 * a * b + 3.0 * b * b));
        }
        Ok(TabulatedDensity { xs, density, cdf, mean: m1, variance: m2 - m1 * m1 })
    }

    pub fn density_at(&self, x: f64) -> f64 {
        let xs = &self.xs;
        if x < xs[0] || x > xs[xs.len() - 1] {
            return 0.0;
        }
        let i = xs.partition_point(|&g| g <= x).clamp(1, xs.len() - 1) - 1;
        let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
        self.density[i] * (1.0 - w) + self.density[i + 1] * w
    }

    /// Inverse CDF for sampling.
    pub fn quantile(&self, u: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c <= u).clamp(1, self.xs.len() - 1) - 1;
        let (a, fa, fb) = (self.xs[i], self.density[i], self.density[i + 1]);
        let h = self.xs[i + 1] - a;
        let target = u - self.cdf[i];
        let slope = (fb - fa) / h;
        // Solve fa·s + slope·s²/2 = target for s in [0, h].
        let s = if slope.abs() < 1e-14 * (fa + fb).max(1e-300) {
            if fa > 0.0 {
                target / fa
            } else {
                0.0
            }
        } else {
            let disc = (fa * fa + 2.0 * slope * target).max(0.0);
            2.0 * target / (fa + disc.sqrt())
        };
        a + s.clamp(0.0, h)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn grid(&self) -> &[f64] {
        &self.xs
    }
}

/// One coordinate of a product distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum ComponentSpec {
    Uniform01,
    /// Values 0 and 1 with equal probability.
    SymmetricBernoulli,
    /// Values 0, ½, 1 with probabilities 2σ₀², 1−4σ₀², 2σ₀².
    ThreePoint {
        sigma0: f64,
    },
    Laplace {
        scale: f64,
    },
    StandardNormal,
    Tabulated(TabulatedDensity),
}

impl ComponentSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ComponentSpec::ThreePoint { sigma0 } if !(*sigma0 > 0.0 && *sigma0 <= 0.5) => {
                domain(format!("three-point sigma0 must be in (0, 0.5], got {sigma0}"))
            }
            ComponentSpec::Laplace { scale } if !(*scale > 0.0) => domain(format!("Laplace scale must be positive, got {scale}")),
            ComponentSpec::Tabulated(t) if !(t.variance > 0.0) => domain("tabulated component has zero variance"),
            _ => Ok(()),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            ComponentSpec::Uniform01 | ComponentSpec::SymmetricBernoulli | ComponentSpec::ThreePoint { .. } => 0.5,
            ComponentSpec::Laplace { .. } | ComponentSpec::StandardNormal => 0.0,
            ComponentSpec::Tabulated(t) => t.mean,
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            ComponentSpec::Uniform01 => 1.0 / 12.0,
            ComponentSpec::SymmetricBernoulli => 0.25,
            ComponentSpec::ThreePoint { sigma0 } => sigma0 * sigma0,
            ComponentSpec::Laplace { scale } => 2.0 * scale * scale,
            ComponentSpec::StandardNormal => 1.0,
            ComponentSpec::Tabulated(t) => t.variance,
        }
    }

    /// Centred atoms and weights for discrete components.
    fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            ComponentSpec::SymmetricBernoulli => Some(vec![(-0.5, 0.5), (0.5, 0.5)]),
            ComponentSpec::ThreePoint { sigma0 } => {
                let p = 2.0 * sigma0 * sigma0;
                Some(vec![(-0.5, p), (0.0, 1.0 - 2.0 * p), (0.5, p)])
            }
            _ => None,
        }
    }

    /// (ln E[e^{λz}], E[z·e^{λz}]/E[e^{λz}]) with z = x̃ỹ − αx̃². The log is
    /// +∞ when the expectation diverges.
    pub fn tilted_moments(&self, lambda: f64, alpha: f64) -> Result<(f64, f64)> {
        if let Some(atoms) = self.atoms() {
            let mut logs = Vec::with_capacity(9);
            let mut zs = Vec::with_capacity(9);
            for &(x, px) in &atoms {
                for &(y, py) in &atoms {
                    if px * py > 0.0 {
                        let z = x * y - alpha * x * x;
                        logs.push((px * py).ln() + lambda * z);
                        zs.push(z);
                    }
                }
            }
            let l0 = log_sum_exp(&logs);
            let ratio = logs.iter().zip(&zs).map(|(l, z)| (l - l0).exp() * z).sum();
            return Ok((l0, ratio));
        }
        match self {
            ComponentSpec::Uniform01 => {
                // ỹ uniform on [−½,½]: M(s) = sinh(s/2)/(s/2); the integrand is even in x̃.
                let ln_w = |x: f64| -lambda * alpha * x * x + ln_uniform_mgf(lambda * x);
                let l0 = LN_2 + integrate_log_domain(ln_w, 0.0, 0.5, INNER_TOL)?.value;
                let ratio = 2.0
                    * integrate_adaptive_abs(
                        |x| (ln_w(x) - l0).exp() * (x * uniform_dlog(lambda * x) - alpha * x * x),
                        0.0,
                        0.5,
                        INNER_TOL,
                        INNER_TOL,
                    )?
                    .value;
                Ok((l0, ratio))
            }
            ComponentSpec::StandardNormal => {
                // ỹ standard normal: M(s) = e^{s²/2}, so the x̃-integrand is a
                // centred Gaussian with precision 1 + 2λα − λ².
                let prec = 1.0 + 2.0 * lambda * alpha - lambda * lambda;
                if prec <= 0.0 {
                    return Ok((f64::INFINITY, f64::NAN));
                }
                Ok((-0.5 * prec.ln(), (lambda - alpha) / prec))
            }
            ComponentSpec::Laplace { .. } => Ok((f64::INFINITY, f64::NAN)),
            ComponentSpec::Tabulated(t) => tabulated_moments(t, lambda, alpha),
            _ => unreachable!("discrete components handled above"),
        }
    }
}

/// ln(sinh(s/2)/(s/2)), with a series near zero.
fn ln_uniform_mgf(s: f64) -> f64 {
    let s = s.abs();
    if s < 1e-2 {
        let s2 = s * s;
        (s2 / 24.0 + s2 * s2 / 1920.0 + s2 * s2 * s2 / 322_560.0).ln_1p()
    } else {
        0.5 * s + (-(-s).exp()).ln_1p() - s.ln()
    }
}

/// d/ds ln(sinh(s/2)/(s/2)) = ½coth(s/2) − 1/s.
fn uniform_dlog(s: f64) -> f64 {
    if s.abs() < 1e-2 {
        let s2 = s * s;
        s / 12.0 - s * s2 / 720.0 + s * s2 * s2 / 30_240.0
    } else {
        0.5 / (0.5 * s).tanh() - 1.0 / s
    }
}

fn tabulated_moments(t: &TabulatedDensity, lambda: f64, alpha: f64) -> Result<(f64, f64)> {
    let mu = t.mean;
    let (lo, hi) = t.support();
    let grid = &t.grid()[1..t.grid().len() - 1];
    let ln_rho = |x: f64| t.density_at(x).ln();
    // (ln M(s), M'(s)/M(s)) for the centred inner variable.
    let inner = |xc: f64| -> Result<(f64, f64)> {
        let s = lambda * xc;
        let lm = integrate_log_split(|y| ln_rho(y) + s * (y - mu), lo, hi, grid, INNER_TOL)?.value;
        let r =
            integrate_split_abs(|y| (ln_rho(y) + s * (y - mu) - lm).exp() * (y - mu), lo, hi, grid, INNER_TOL, INNER_TOL)?.value;
        Ok((lm, r))
    };
    let mut failure = None;
    let mut eval = |x: f64| -> (f64, f64) {
        let xc = x - mu;
        match inner(xc) {
            Ok((lm, r)) => (ln_rho(x) - lambda * alpha * xc * xc + lm, xc * r - alpha * xc * xc),
            Err(e) => {
                failure = Some(e);
                (f64::NEG_INFINITY, 0.0)
            }
        }
    };
    let l0 = integrate_log_split(|x| eval(x).0, lo, hi, grid, OUTER_TOL)?.value;
    let ratio = integrate_split_abs(
        |x| {
            let (l, z) = eval(x);
            (l - l0).exp() * z
        },
        lo,
        hi,
        grid,
        OUTER_TOL,
        OUTER_TOL,
    )?
    .value;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((l0, ratio))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChernoffResult {
    pub gamma: f64,
    pub lambda_star: f64,
    /// Derivative in λ of the tilted mean E[z e^{λz}]/E[e^{λz}] at λ*.
    pub c_star: f64,
}

/// −Σ log E[e^{λzᵢ}] for a shared λ; −∞ where an expectation diverges.
pub fn chernoff_objective(components: &[ComponentSpec], alpha: f64, lambda: f64) -> Result<f64> {
    let mut s = 0.0;
    for c in components {
        let (l0, _) = c.tilted_moments(lambda, alpha)?;
        if l0 == f64::INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        s -= l0;
    }
    Ok(s)
}

fn maximize_lambda(components: &[ComponentSpec], alpha: f64) -> Result<(f64, f64)> {
    let mut err = None;
    let mut g = |l: f64| match chernoff_objective(components, alpha, l) {
        Ok(v) => v,
        Err(e) => {
            err = Some(e);
            f64::NEG_INFINITY
        }
    };
    if g(1e-6) == f64::NEG_INFINITY {
        return Err(err.unwrap_or_else(|| {
            Error::Unsupported("moment generating function is infinite for every λ > 0; no Chernoff exponent".into())
        }));
    }
    let mut hi = 1.0;
    while hi < LAMBDA_CAP && g(2.0 * hi) >= g(hi) {
        hi *= 2.0;
    }
    let hi = (2.0 * hi).min(LAMBDA_CAP);
    let r = maximize_unimodal(&mut g, 0.0, hi, 1e-10 * hi)?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok((r.argmax, r.max_value))
}

pub fn chernoff_gamma(component: &ComponentSpec, alpha: f64) -> Result<ChernoffResult> {
    check_alpha(alpha)?;
    component.validate()?;
    let comps = std::slice::from_ref(component);
    let (lambda_star, best) = maximize_lambda(comps, alpha)?;
    let ratio = |l: f64| -> Result<f64> { Ok(component.tilted_moments(l, alpha)?.1) };
    let h = (lambda_star * 1e-4).max(1e-8);
    let c_star = (ratio(lambda_star + h)? - ratio((lambda_star - h).max(0.0))?) / (lambda_star + h - (lambda_star - h).max(0.0));
    Ok(ChernoffResult { gamma: 0.5 * best, lambda_star, c_star })
}

/// γₙ = ½·sup_λ −Σᵢ log E[e^{λzᵢ}] with one λ shared by all coordinates.
pub fn chernoff_gamma_n(components: &[ComponentSpec], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if components.is_empty() {
        return Ok(0.0);
    }
    for c in components {
        c.validate()?;
    }
    // Identical coordinates share one expectation.
    if components.iter().all(|c| *c == components[0]) {
        let g = chernoff_gamma(&components[0], alpha)?;
        return Ok(components.len() as f64 * g.gamma);
    }
    let (_, best) = maximize_lambda(components, alpha)?;
    Ok(0.5 * best)
}
