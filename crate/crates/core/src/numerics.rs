//! Adaptive Gauss–Kronrod quadrature (linear and log domain) and a
//! golden-section maximizer.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{domain, Error, Result};
use crate::specfun::log_sum_exp;

/// Default relative tolerance for probability integrals.
pub const PROB_TOL: f64 = 1e-10;
/// Default relative tolerance for Chernoff expectations.
pub const CHERNOFF_TOL: f64 = 1e-8;

const ABS_FLOOR: f64 = 1e-300;
const MAX_PANELS: usize = 4_000;

// Kronrod 15-point nodes on [0,1] (positive half, centre last) and weights.
const XK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss 7-point weights for the odd-indexed Kronrod nodes (and the centre).
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    /// The integral, or its natural log for the log-domain variant.
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XK[j];
        let s = f(c - x) + f(c + x);
        k += WK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn check_bracket(a: f64, b: f64) -> Result<()> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return domain(format!("integration interval [{a}, {b}] must be finite with a < b"));
    }
    Ok(())
}

/// ∫ₐᵇ f by adaptive GK15, bisecting the panel with the largest error.
/// Stops with [`Error::Quadrature`] carrying the best estimate when the
/// panel budget runs out before `rel_tol` is met.
pub fn integrate_adaptive(f: impl FnMut(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<QuadratureResult> {
    integrate_adaptive_abs(f, a, b, rel_tol, ABS_FLOOR)
}

/// [`integrate_adaptive`] with an absolute error floor, for integrands
/// whose integral may cancel to zero.
pub fn integrate_adaptive_abs(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadratureResult> {
    check_bracket(a, b)?;
    let mut evals = 15;
    let (v, e) = gk15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value: v, error: e });
    let (mut total, mut err) = (v, e);
    let resum =
        |heap: &BinaryHeap<Panel>| -> (f64, f64) { (heap.iter().map(|p| p.value).sum(), heap.iter().map(|p| p.error).sum()) };
    while err > rel_tol * total.abs() + abs_tol {
        // The running sums keep the rounding of the first, largest
        // estimates; re-sum before giving up and every so often.
        if heap.len() >= MAX_PANELS || heap.len() % 64 == 0 {
            (total, err) = resum(&heap);
            if err <= rel_tol * total.abs() + abs_tol {
                break;
            }
            if heap.len() >= MAX_PANELS {
                return Err(Error::Quadrature { value: total, abs_error: err });
            }
        }
        let p = heap.pop().expect("heap never empties");
        let m = 0.5 * (p.a + p.b);
        let (v1, e1) = gk15(&mut f, p.a, m);
        let (v2, e2) = gk15(&mut f, m, p.b);
        evals += 30;
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        heap.push(Panel { a: p.a, b: m, value: v1, error: e1 });
        heap.push(Panel { a: m, b: p.b, value: v2, error: e2 });
        if !total.is_finite() {
            return Err(Error::Quadrature { value: total, abs_error: f64::INFINITY });
        }
    }
    let (total, err) = resum(&heap);
    Ok(QuadratureResult { value: total, abs_error_estimate: err, evaluations: evals })
}

/// Same rule over several panels split at known kinks; `points` must be
/// increasing and inside (a, b).
pub fn integrate_split(f: impl FnMut(f64) -> f64, a: f64, b: f64, points: &[f64], rel_tol: f64) -> Result<QuadratureResult> {
    integrate_split_abs(f, a, b, points, rel_tol, ABS_FLOOR)
}

pub fn integrate_split_abs(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    points: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadratureResult> {
    let edges = panel_edges(a, b, points);
    let mut out = QuadratureResult { value: 0.0, abs_error_estimate: 0.0, evaluations: 0 };
    for w in edges.windows(2) {
        let r = integrate_adaptive_abs(&mut f, w[0], w[1], rel_tol, abs_tol)?;
        out.value += r.value;
        out.abs_error_estimate += r.abs_error_estimate;
        out.evaluations += r.evaluations;
    }
    Ok(out)
}

fn panel_edges(a: f64, b: f64, points: &[f64]) -> Vec<f64> {
    let mut edges = vec![a];
    for &p in points {
        if p > *edges.last().unwrap() && p < b {
            edges.push(p);
        }
    }
    edges.push(b);
    edges
}

/// One GK15 panel in the log domain: (ln K, relative gap |K−G|/K).
fn gk15_log(f_log: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut vals = [0.0f64; 15];
    vals[0] = f_log(c);
    for j in 0..7 {
        let x = h * XK[j];
        vals[1 + 2 * j] = f_log(c - x);
        vals[2 + 2 * j] = f_log(c + x);
    }
    let m = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return (f64::NEG_INFINITY, 0.0);
    }
    let e = |i: usize| (vals[i] - m).exp();
    let mut k = WK[7] * e(0);
    let mut g = WG[3] * e(0);
    for j in 0..7 {
        let s = e(1 + 2 * j) + e(2 + 2 * j);
        k += WK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    if k <= 0.0 {
        return (f64::NEG_INFINITY, 0.0);
    }
    (m + (k * h).ln(), ((k - g) / k).abs())
}

struct LogPanel {
    a: f64,
    b: f64,
    log_value: f64,
    rel_error: f64,
    /// Weight used for ordering: log of the absolute error contribution.
    key: f64,
}

impl PartialEq for LogPanel {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}
impl Eq for LogPanel {}
impl PartialOrd for LogPanel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for LogPanel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.total_cmp(&other.key)
    }
}

fn log_panel(f_log: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> LogPanel {
    let (log_value, rel_error) = gk15_log(f_log, a, b);
    LogPanel { a, b, log_value, rel_error, key: log_value + rel_error.max(1e-300).ln() }
}

/// ln ∫ₐᵇ e^{f_log}. Each panel is rescaled by its own maximum, so the
/// integrand may sit hundreds of orders of magnitude below 1.
/// `abs_error_estimate` is the relative error of the linear integral.
pub fn integrate_log_domain(mut f_log: impl FnMut(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<QuadratureResult> {
    check_bracket(a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(log_panel(&mut f_log, a, b));
    let mut evals = 15;
    loop {
        let logs: Vec<f64> = heap.iter().map(|p| p.log_value).collect();
        let total = log_sum_exp(&logs);
        if total == f64::NEG_INFINITY && heap.len() >= 64 {
            return Ok(QuadratureResult { value: total, abs_error_estimate: 0.0, evaluations: evals });
        }
        let rel_err: f64 = if total == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            heap.iter().map(|p| (p.log_value - total).exp() * p.rel_error).sum()
        };
        if rel_err <= rel_tol {
            return Ok(QuadratureResult { value: total, abs_error_estimate: rel_err, evaluations: evals });
        }
        if heap.len() >= MAX_PANELS {
            return Err(Error::Quadrature { value: total, abs_error: rel_err });
        }
        let p = heap.pop().expect("heap never empties");
        let m = 0.5 * (p.a + p.b);
        heap.push(log_panel(&mut f_log, p.a, m));
        heap.push(log_panel(&mut f_log, m, p.b));
        evals += 30;
    }
}

/// Log-domain integration over panels split at known kinks.
pub fn integrate_log_split(
    mut f_log: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    points: &[f64],
    rel_tol: f64,
) -> Result<QuadratureResult> {
    let edges = panel_edges(a, b, points);
    let mut logs = Vec::with_capacity(edges.len());
    let mut errs = Vec::with_capacity(edges.len());
    let mut evals = 0;
    for w in edges.windows(2) {
        let r = integrate_log_domain(&mut f_log, w[0], w[1], rel_tol)?;
        logs.push(r.value);
        errs.push(r.abs_error_estimate);
        evals += r.evaluations;
    }
    let total = log_sum_exp(&logs);
    let rel = if total == f64::NEG_INFINITY { 0.0 } else { logs.iter().zip(&errs).map(|(l, e)| (l - total).exp() * e).sum() };
    Ok(QuadratureResult { value: total, abs_error_estimate: rel, evaluations: evals })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptResult {
    pub argmax: f64,
    pub max_value: f64,
    pub bracket: (f64, f64),
}

/// Golden-section search for the maximum of a unimodal `g` on [lo, hi].
/// If an endpoint beats the interior optimum, the endpoint is returned.
pub fn maximize_unimodal(mut g: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<OptResult> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return domain(format!("invalid bracket [{lo}, {hi}]"));
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut g1 = g(x1);
    let mut g2 = g(x2);
    while b - a > tol {
        if g1 < g2 {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + inv_phi * (b - a);
            g2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - inv_phi * (b - a);
            g1 = g(x1);
        }
        // Stop once the bracket no longer shrinks in floating point.
        if x1 >= x2 {
            break;
        }
    }
    let (mut best_x, mut best_g) = if g1 >= g2 { (x1, g1) } else { (x2, g2) };
    for x in [lo, hi] {
        let v = g(x);
        if v > best_g {
            best_x = x;
            best_g = v;
        }
    }
    Ok(OptResult { argmax: best_x, max_value: best_g, bracket: (lo, hi) })
}
