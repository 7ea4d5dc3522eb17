//! Log-domain gamma, beta and regularized incomplete beta.
//!
//! Two-point probabilities reach e^{-700} at the dimensions the tables use,
//! so everything here works with natural logarithms.

use std::f64::consts::{LN_2, PI};
use std::fmt;

use crate::error::{domain, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// A probability, or a bound on one, stored as its natural logarithm.
#[derive(Clone, Copy, PartialEq, PartialOrd)]
pub struct LogProb {
    log_value: f64,
}

impl LogProb {
    pub const ZERO: LogProb = LogProb { log_value: f64::NEG_INFINITY };
    pub const ONE: LogProb = LogProb { log_value: 0.0 };

    /// Wraps a log value. Values slightly above zero from rounding are clamped.
    pub fn from_ln(log_value: f64) -> Result<LogProb> {
        if log_value.is_nan() || log_value > 1e-9 {
            return domain(format!("log-probability {log_value} is not ≤ 0"));
        }
        Ok(LogProb { log_value: log_value.min(0.0) })
    }

    /// Wraps a log value that may exceed zero, e.g. a vacuous upper bound.
    /// The stored value is clamped to the probability range.
    pub fn from_ln_bound(log_value: f64) -> LogProb {
        LogProb { log_value: log_value.min(0.0) }
    }

    pub fn from_prob(p: f64) -> Result<LogProb> {
        if !(0.0..=1.0).contains(&p) {
            return domain(format!("probability {p} outside [0,1]"));
        }
        Ok(LogProb { log_value: p.ln() })
    }

    pub fn ln(self) -> f64 {
        self.log_value
    }

    pub fn log10(self) -> f64 {
        self.log_value / std::f64::consts::LN_10
    }

    pub fn prob(self) -> f64 {
        self.log_value.exp()
    }

    /// 1 − p.
    pub fn complement(self) -> LogProb {
        LogProb { log_value: ln_one_minus_exp(self.log_value) }
    }
}

/// Product of two probabilities: logs add.
#[allow(clippy::suspicious_arithmetic_impl)]
impl std::ops::Mul for LogProb {
    type Output = LogProb;
    fn mul(self, other: LogProb) -> LogProb {
        LogProb { log_value: self.log_value + other.log_value }
    }
}

/// Sum of two probabilities, clamped at 1.
impl std::ops::Add for LogProb {
    type Output = LogProb;
    fn add(self, other: LogProb) -> LogProb {
        LogProb::from_ln_bound(log_add_exp(self.log_value, other.log_value))
    }
}

impl fmt::Debug for LogProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LogProb(ln={}, p={:e})", self.log_value, self.prob())
    }
}

/// ln(e^a + e^b) without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// ln Σ e^{xᵢ}.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m.is_infinite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// ln(1 − e^x) for x ≤ 0.
pub fn ln_one_minus_exp(x: f64) -> f64 {
    if x > -LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Tail of the Stirling series, ln Γ(x) − [(x−½)ln x − x + ½ln 2π].
fn stirling_correction(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    r * (1.0 / 12.0
        + r2 * (-1.0 / 360.0
            + r2 * (1.0 / 1260.0 + r2 * (-1.0 / 1680.0 + r2 * (1.0 / 1188.0 + r2 * (-691.0 / 360_360.0 + r2 / 156.0))))))
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("ln_gamma needs x > 0, got {x}"));
    }
    Ok(ln_gamma_pos(x))
}

fn ln_gamma_pos(x: f64) -> f64 {
    if x >= 10.0 {
        return (x - 0.5) * x.ln() - x + LN_SQRT_2PI + stirling_correction(x);
    }
    if x < 0.5 {
        return ln_gamma_pos(x + 1.0) - x.ln();
    }
    // Exact zeros keep ln Γ(1) = ln Γ(2) = 0 free of rounding.
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    let z = x - 1.0;
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + a.ln()
}

/// ln B(a, b).
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return domain(format!("ln_beta needs a, b > 0, got ({a}, {b})"));
    }
    Ok(ln_beta_pos(a, b))
}

fn ln_beta_pos(a: f64, b: f64) -> f64 {
    let (big, small) = if a >= b { (a, b) } else { (b, a) };
    if big < 10.0 {
        return ln_gamma_pos(a) + ln_gamma_pos(b) - ln_gamma_pos(a + b);
    }
    // ln Γ(big) − ln Γ(big+small) written so the large leading terms cancel
    // analytically instead of in floating point.
    let s = big + small;
    let diff = -(big - 0.5) * (small / big).ln_1p() - small * s.ln() + small + stirling_correction(big) - stirling_correction(s);
    ln_gamma_pos(small) + diff
}

const CF_MAX_ITER: usize = 10_000;

/// Continued fraction for I_z(a,b) (modified Lentz), valid for z below the
/// mean-based switch point.
fn inc_beta_cf(z: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * z / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * z / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * z / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return h;
        }
    }
    debug_assert!(false, "incomplete beta continued fraction did not converge for z={z}, a={a}, b={b}");
    h
}

/// ln I_z(a,b) on the side of the switch point where the fraction converges fast.
fn ln_inc_beta_direct(z: f64, a: f64, b: f64) -> f64 {
    let front = a * z.ln() + b * (-z).ln_1p() - ln_beta_pos(a, b) - a.ln();
    front + inc_beta_cf(z, a, b).ln()
}

/// Regularized incomplete beta I_z(a,b), returned in the log domain.
pub fn reg_inc_beta(z: f64, a: f64, b: f64) -> Result<LogProb> {
    if !(0.0..=1.0).contains(&z) || !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return domain(format!("reg_inc_beta needs z in [0,1], a, b > 0, got ({z}, {a}, {b})"));
    }
    if z == 0.0 {
        return Ok(LogProb::ZERO);
    }
    if z == 1.0 {
        return Ok(LogProb::ONE);
    }
    let v = if z > (a + 1.0) / (a + b + 2.0) {
        ln_one_minus_exp(ln_inc_beta_direct(1.0 - z, b, a).min(0.0))
    } else {
        ln_inc_beta_direct(z, a, b)
    };
    Ok(LogProb::from_ln_bound(v))
}

/// Closed-form upper bound zᵃ(1−z)^{b−1}a^{b−1}/Γ(b) on I_z(a,b), for b in (0,1).
pub fn reg_inc_beta_upper(z: f64, a: f64, b: f64) -> Result<LogProb> {
    if !(z > 0.0 && z < 1.0) || !(a > 0.0) || !(b > 0.0 && b < 1.0) {
        return domain(format!("reg_inc_beta_upper needs z in (0,1), a > 0, b in (0,1), got ({z}, {a}, {b})"));
    }
    let v = a * z.ln() + (b - 1.0) * (-z).ln_1p() + (b - 1.0) * a.ln() - ln_gamma_pos(b);
    Ok(LogProb::from_ln_bound(v))
}

/// ½·ln π, exposed for tests and callers that need Γ(½).
pub fn ln_sqrt_pi() -> f64 {
    0.5 * PI.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ln_factorial(k: u64) -> f64 {
        (2..=k).map(|i| (i as f64).ln()).sum()
    }

    #[test]
    fn gamma_trivial_points() {
        assert_eq!(ln_gamma(1.0).unwrap(), 0.0);
        assert_eq!(ln_gamma(2.0).unwrap(), 0.0);
        assert_relative_eq!(ln_gamma(0.5).unwrap(), ln_sqrt_pi(), max_relative = 1e-14);
        assert_relative_eq!(ln_gamma(10.0).unwrap(), 362_880f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(ln_gamma(10.0).unwrap(), 12.801_827_480_081_469, max_relative = 1e-14);
    }

    #[test]
    fn gamma_matches_factorials_across_range() {
        for k in [3u64, 7, 9, 11, 25, 100, 1_000, 100_000] {
            let want = ln_factorial(k - 1);
            let got = ln_gamma(k as f64).unwrap();
            assert!((got - want).abs() <= 1e-13 * want.abs().max(1.0), "k={k}: {got} vs {want}");
        }
    }

    #[test]
    fn gamma_half_integers_and_frozen_values() {
        // Γ(k+½) = (2k)! √π / (4ᵏ k!)
        for k in [1u64, 4, 9, 20, 60] {
            let want = ln_factorial(2 * k) + ln_sqrt_pi() - (k as f64) * 4f64.ln() - ln_factorial(k);
            let got = ln_gamma(k as f64 + 0.5).unwrap();
            assert!((got - want).abs() <= 1e-13 * want.abs().max(1.0), "k={k}");
        }
        // mpmath.loggamma at 50 digits
        let frozen = [
            (0.75, 0.203_280_951_431_295_37),
            (3.3, 0.987_098_577_894_734_6),
            (9.99, 12.779_315_214_350_193),
            (1e6, 12_815_504.569_147_611),
        ];
        for (x, want) in frozen {
            let got = ln_gamma(x).unwrap();
            assert!((got - want).abs() <= 1e-13 * f64::abs(want).max(1.0), "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn gamma_rejects_nonpositive() {
        assert!(ln_gamma(0.0).is_err());
        assert!(ln_gamma(-1.5).is_err());
        assert!(ln_beta(0.0, 1.0).is_err());
    }

    #[test]
    fn beta_values() {
        assert_relative_eq!(ln_beta(1.0, 1.0).unwrap(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(ln_beta(0.5, 0.5).unwrap(), PI.ln(), max_relative = 1e-13);
        // ∫ t(1−t)² dt = 1/12
        assert_relative_eq!(ln_beta(2.0, 3.0).unwrap(), (1.0f64 / 12.0).ln(), max_relative = 1e-13);
        // mpmath log(beta(5000, 0.5)) and log(beta(250, 300))
        assert_relative_eq!(ln_beta(5000.0, 0.5).unwrap(), -3.686_206_652_783_460_3, max_relative = 1e-12);
        assert_relative_eq!(ln_beta(250.0, 300.0).unwrap(), -380.493_345_590_407_86, max_relative = 1e-12);
    }

    #[test]
    fn inc_beta_trivial_cases() {
        assert_eq!(reg_inc_beta(1.0, 3.0, 2.0).unwrap().ln(), 0.0);
        assert_relative_eq!(reg_inc_beta(0.3, 1.0, 1.0).unwrap().prob(), 0.3, max_relative = 1e-14);
        for a in [0.5, 3.0, 40.0, 2500.0] {
            assert_relative_eq!(reg_inc_beta(0.5, a, a).unwrap().prob(), 0.5, max_relative = 1e-12);
        }
        assert!(reg_inc_beta(1.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn inc_beta_frozen_values() {
        // mpmath.betainc(a, b, 0, z, regularized=True)
        let cases = [(0.2, 2.0, 3.0, 0.180_8), (0.7, 10.0, 20.0, 0.999_982_858_082_826_9)];
        for (z, a, b, want) in cases {
            let got = reg_inc_beta(z, a, b).unwrap().prob();
            assert!((got - want).abs() <= 1e-14, "({z},{a},{b}): {got} vs {want}");
        }
        // log-domain values where the linear value underflows double precision
        let log_cases = [
            (0.5, 50.0, 0.5, -36.851_241_233_805_07),
            (0.9, 5000.0, 0.5, -530.483_170_086_520_8),
            (0.5, 5000.0, 0.5, -3_470.220_415_703_111_7),
        ];
        for (z, a, b, want) in log_cases {
            let got = reg_inc_beta(z, a, b).unwrap().ln();
            assert!((got - want).abs() <= 1e-11 * want.abs(), "({z},{a},{b}): {got} vs {want}");
        }
    }

    #[test]
    fn upper_bound_spec_example() {
        // At z = ½, a = 50, b = ½ the bound is √(2/(50π))·2⁻⁵⁰; half of it is
        // the normal-case form √(1/(100π))·2⁻⁵⁰.
        let up = reg_inc_beta_upper(0.5, 50.0, 0.5).unwrap().ln();
        let want = 0.5 * (2.0 / (50.0 * PI)).ln() - 50.0 * LN_2;
        assert_relative_eq!(up, want, max_relative = 1e-13);
        let half = up - LN_2;
        assert_relative_eq!(half, 0.5 * (2.0 / (2.0 * PI * 100.0)).ln() - 50.0 * LN_2, max_relative = 1e-13);
        assert!(up >= reg_inc_beta(0.5, 50.0, 0.5).unwrap().ln());
    }

    #[test]
    fn upper_bound_gap_shrinks_with_a() {
        let ratio = |a: f64| (reg_inc_beta_upper(0.5, a, 0.5).unwrap().ln() - reg_inc_beta(0.5, a, 0.5).unwrap().ln()).exp();
        let r = [ratio(50.0), ratio(500.0), ratio(5000.0)];
        assert!(r[0] >= 1.0 && r[0] > r[1] && r[1] > r[2] && r[2] >= 1.0, "{r:?}");
        assert!(r[2] < 1.001);
    }

    #[test]
    fn logprob_helpers() {
        let h = LogProb::from_prob(0.5).unwrap();
        assert_relative_eq!((h + h).prob(), 1.0, max_relative = 1e-15);
        assert!((h + h).ln() <= 0.0);
        assert_relative_eq!((h * h).prob(), 0.25);
        assert_relative_eq!(LogProb::from_prob(0.25).unwrap().complement().prob(), 0.75, max_relative = 1e-15);
        assert_eq!(LogProb::ZERO.prob(), 0.0);
        assert!(LogProb::from_ln(0.1).is_err());
        assert!(LogProb::from_prob(1.5).is_err());
    }
}
