//! Minimal C-style `%g` float formatting.
//!
//! CSV output promises `%.12g` semantics: 12 significant digits, fixed
//! notation for decimal exponents in [-4, 12), scientific otherwise, and
//! trailing zeros trimmed. Rust's standard formatter has no `%g` equivalent,
//! so this is hand-rolled and pinned by tests against the C library output.

/// Format with `%.12g` semantics.
pub fn g12(x: f64) -> String {
    format_g(x, 12)
}

fn format_g(x: f64, significant: usize) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_string();
    }

    // Rounding to the target precision can bump the decimal exponent
    // (e.g. 0.999... -> 1), so read it off the rounded scientific form.
    let sci = format!("{:.*e}", significant - 1, x);
    let (mantissa, exp_str) = sci.split_once('e').expect("exponential format");
    let exp: i32 = exp_str.parse().expect("exponent");

    if exp >= -4 && exp < significant as i32 {
        let decimals = (significant as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let mantissa = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}
