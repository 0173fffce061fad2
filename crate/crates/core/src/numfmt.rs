//! Deterministic text formatting for CSV output, including magnitudes that
//! only exist in log form.

use std::f64::consts::LN_10;

/// Largest natural log we still print as an ordinary `f64`.
const PLAIN_LN_LIMIT: f64 = 700.0;

/// Formats `sign * exp(ln_abs)`; falls back to a decimal mantissa/exponent
/// string when the value does not fit in an `f64`.
pub fn ext(sign: f64, ln_abs: f64) -> String {
    if ln_abs == f64::NEG_INFINITY || sign == 0.0 {
        return "0".to_string();
    }
    if ln_abs.is_nan() {
        return "NaN".to_string();
    }
    if ln_abs < PLAIN_LN_LIMIT {
        return float(sign * ln_abs.exp());
    }
    let log10 = ln_abs / LN_10;
    let mut exponent = log10.floor();
    // the log carries ~1e-13 relative error, so nine decimals are honest
    let mut m = format!("{:.9}", 10f64.powf(log10 - exponent));
    if m.starts_with("10") {
        exponent += 1.0;
        m = format!("{:.9}", 1.0);
    }
    let s = if sign < 0.0 { "-" } else { "" };
    format!("{s}{m}e{exponent:.0}")
}

pub fn float(x: f64) -> String {
    if x == 0.0 {
        // normalise -0
        "0".to_string()
    } else {
        format!("{x}")
    }
}
