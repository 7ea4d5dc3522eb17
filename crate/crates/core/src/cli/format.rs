//! Number display in the style of printed tables, and parsing of printed
//! cells back into values.

use crate::error::{Error, Result};

const SUPERSCRIPT: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];

fn superscript(e: i64) -> String {
    let mut s = String::new();
    if e < 0 {
        s.push('⁻');
    }
    for d in e.unsigned_abs().to_string().bytes() {
        s.push(SUPERSCRIPT[(d - b'0') as usize]);
    }
    s
}

pub fn with_commas(v: u64) -> String {
    let digits = v.to_string();
    let mut out = String::new();
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

/// Scientific form m.m·10ᵏ from a base-10 logarithm, so values beyond the
/// f64 range still print.
pub fn scientific_from_log10(log10: f64, digits: usize) -> String {
    let mut e = log10.floor();
    let mut mant = 10f64.powf(log10 - e);
    let scale = 10f64.powi(digits as i32 - 1);
    if (mant * scale).round() >= 10.0 * scale {
        mant /= 10.0;
        e += 1.0;
    }
    format!("{:.*}·10{}", digits - 1, mant, superscript(e as i64))
}

/// A bound given by its base-10 logarithm: two decimals below 10, one below
/// 100, grouped integers below 10⁶, two significant digits above.
pub fn display_log10(log10: f64) -> String {
    if log10 == f64::NEG_INFINITY {
        return "0".into();
    }
    if log10.is_nan() {
        return "nan".into();
    }
    if log10 >= 6.0 {
        return scientific_from_log10(log10, 2);
    }
    let v = 10f64.powf(log10);
    if v < 10.0 {
        format!("{v:.2}")
    } else if v < 100.0 {
        format!("{v:.1}")
    } else {
        with_commas(v.round() as u64)
    }
}

pub fn display_value(v: f64) -> String {
    if v < 0.0 {
        return format!("-{}", display_value(-v));
    }
    if v == 0.0 {
        return "0".into();
    }
    if v < 0.01 {
        return scientific_from_log10(v.log10(), 2);
    }
    display_log10(v.log10())
}

/// A probability lower bound: "<0" when negative, 1−d·10⁻ᵏ when within
/// 10⁻⁶ of 1.
pub fn display_probability(p: f64, ln_deficit: f64) -> String {
    if p < 0.0 {
        return "<0".into();
    }
    let log10_def = ln_deficit / std::f64::consts::LN_10;
    if log10_def < -6.0 {
        return format!("1−{}", scientific_from_log10(log10_def, 2));
    }
    format!("{:.4}", p).trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Full precision for machine-readable output: 12 significant digits.
pub fn full(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else {
        v.to_string()
    }
}

/// A cell as printed in a table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Printed {
    /// The value and the unit of its last printed digit.
    Value {
        value: f64,
        unit: f64,
    },
    /// "1 − d": the deficit d and the unit of its last digit.
    OneMinus {
        deficit: f64,
        unit: f64,
    },
    Negative,
}

fn parse_mantissa(s: &str) -> Result<(f64, f64)> {
    let s = s.trim();
    let clean: String = s.chars().filter(|c| *c != ',').collect();
    let value: f64 = clean.parse().map_err(|_| Error::Input(format!("cannot read '{s}' as a number")))?;
    let decimals = clean.split_once('.').map_or(0, |(_, f)| f.len());
    Ok((value, 10f64.powi(-(decimals as i32))))
}

fn from_superscript(s: &str) -> Option<String> {
    s.chars()
        .map(|c| match c {
            '⁻' => Some('-'),
            _ => SUPERSCRIPT.iter().position(|&d| d == c).map(|d| (b'0' + d as u8) as char),
        })
        .collect()
}

/// m, "m·10ᵏ", "m \cdot 10^{k}" and "m·10^k".
fn parse_magnitude(s: &str) -> Result<(f64, f64)> {
    let s = s.trim().trim_matches('$').trim();
    let split = s.split_once("\\cdot").or_else(|| s.split_once('·')).or_else(|| s.split_once('*'));
    let Some((m, p)) = split else {
        return parse_mantissa(s);
    };
    let (value, unit) = parse_mantissa(m)?;
    let p = p.trim();
    let exp = p
        .strip_prefix("10")
        .ok_or_else(|| Error::Input(format!("expected a power of ten in '{s}'")))?
        .trim()
        .trim_start_matches('^')
        .trim_start_matches('{')
        .trim_end_matches('}')
        .trim();
    let exp = if exp.chars().all(|c| c.is_ascii_digit() || c == '-') {
        exp.to_string()
    } else {
        from_superscript(exp).unwrap_or_default()
    };
    let k: i32 = exp.parse().map_err(|_| Error::Input(format!("bad exponent in '{s}'")))?;
    let scale = 10f64.powi(k);
    Ok((value * scale, unit * scale))
}

/// Parses a printed cell: plain numbers with optional thousands commas,
/// powers of ten in LaTeX or Unicode form, "<0" and "1 − d".
pub fn parse_printed(s: &str) -> Result<Printed> {
    let t = s.trim().trim_matches('$').trim();
    if t == "<0" {
        return Ok(Printed::Negative);
    }
    for minus in ['-', '−'] {
        if let Some((one, rest)) = t.split_once(minus) {
            if one.trim() == "1" {
                let (deficit, unit) = parse_magnitude(rest)?;
                return Ok(Printed::OneMinus { deficit, unit });
            }
        }
    }
    let (value, unit) = parse_magnitude(t)?;
    Ok(Printed::Value { value, unit })
}

/// Whether `computed` reproduces `printed` within `rel_tol`, or lies in the
/// window that rounding or truncation of the printed digits allows:
/// [p − u/2, p + u).
pub fn value_matches(computed: f64, printed: f64, unit: f64, rel_tol: f64) -> bool {
    (computed - printed).abs() <= rel_tol * printed.abs() || (printed - 0.5 * unit <= computed && computed < printed + unit)
}

/// Relative deviation of `computed` from `printed`.
pub fn relative_deviation(computed: f64, printed: f64) -> f64 {
    if printed == 0.0 {
        computed.abs()
    } else {
        (computed - printed).abs() / printed.abs()
    }
}
