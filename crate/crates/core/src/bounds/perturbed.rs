//! Randomly perturbed points: each point is displaced uniformly within an
//! ε-ball around its own base point.

use crate::error::{domain, Result};
use crate::numerics::maximize_unimodal;
use crate::specfun::log_add_exp;

/// The optimized lower bound on the separability probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbedBound {
    /// 1 − deficit; may be negative.
    pub probability: f64,
    /// ln of the deficit 2M²/(ϑ√n)(1−ϑ²)^{(n+1)/2} + M(2ϑ/ε)ⁿ at the optimum.
    pub ln_deficit: f64,
    pub theta: f64,
}

fn ln_deficit(n: f64, ln_m: f64, eps: f64, theta: f64) -> f64 {
    let shrink = (-theta * theta).ln_1p();
    let a = std::f64::consts::LN_2 + 2.0 * ln_m - theta.ln() - 0.5 * n.ln() + 0.5 * (n + 1.0) * shrink;
    let b = ln_m + n * (2.0 * theta / eps).ln();
    log_add_exp(a, b)
}

fn check(n: usize, eps: f64) -> Result<()> {
    if n < 2 {
        return domain(format!("perturbed model needs n ≥ 2, got {n}"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return domain(format!("epsilon must be in (0,1), got {eps}"));
    }
    Ok(())
}

fn optimize(n: usize, ln_m: f64, eps: f64) -> Result<PerturbedBound> {
    let nf = n as f64;
    let lo = nf.powf(-0.5);
    let g = |t: f64| -ln_deficit(nf, ln_m, eps, t);
    // Coarse scan to bracket the optimum, then refine.
    const GRID: usize = 400;
    let step = (1.0 - lo) / GRID as f64;
    let mut best = (0, f64::NEG_INFINITY);
    for i in 1..GRID {
        let v = g(lo + i as f64 * step);
        if v > best.1 {
            best = (i, v);
        }
    }
    let a = lo + (best.0 as f64 - 1.0) * step;
    let b = lo + (best.0 as f64 + 1.0) * step;
    let r = maximize_unimodal(g, a, b, 1e-12)?;
    let ln_deficit = -r.max_value;
    Ok(PerturbedBound { probability: -ln_deficit.exp_m1(), ln_deficit, theta: r.argmax })
}

/// Lower bound on the probability that M perturbed points are 1-Fisher
/// separable, maximized over ϑ ∈ (n^{−1/2}, 1).
pub fn perturbed_probability(n: usize, m: f64, eps: f64) -> Result<PerturbedBound> {
    check(n, eps)?;
    if !(m >= 1.0) {
        return domain(format!("M must be at least 1, got {m}"));
    }
    optimize(n, m.ln(), eps)
}

/// ln of the largest M whose optimized deficit stays at or below δ, or
/// `None` when even M = 1 fails. The deficit increases with M, so bisect on
/// ln M over [0, ln 10³⁰⁰].
pub fn perturbed_ln_m(n: usize, delta: f64, eps: f64) -> Result<Option<f64>> {
    check(n, eps)?;
    let target = delta.ln();
    let ok = |ln_m: f64| -> Result<bool> { Ok(optimize(n, ln_m, eps)?.ln_deficit <= target) };
    if !ok(0.0)? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0, 300.0 * std::f64::consts::LN_10);
    if ok(hi)? {
        return Ok(Some(hi));
    }
    while hi - lo > 1e-12 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo))
}
