//! Text formatting shared by the CSV and JSON writers.

/// Formats `v` with 12 significant decimal digits.
///
/// Values in `[1e-4, 1e12)` are written in positional notation with trailing
/// zeros trimmed; everything else uses exponent notation.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "NaN".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let a = v.abs();
    if (1e-4..1e12).contains(&a) {
        let exp10 = a.log10().floor() as i32;
        let decimals = (11 - exp10).max(0) as usize;
        let s = format!("{v:.decimals$}");
        // rounding can carry into a new digit (9.99… → 10.0); re-trim is enough
        trim_zeros(s)
    } else {
        let s = format!("{v:.11e}");
        let (mant, exp) = s.split_once('e').expect("exponent form");
        format!("{}e{exp}", trim_zeros(mant.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        t.to_string()
    } else {
        s
    }
}

/// Rounds `v` to 12 significant digits, for embedding in JSON.
pub fn round_sig(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    fmt_sig(v).parse().unwrap_or(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_sig(std::f64::consts::PI), "3.14159265359");
        assert_eq!(fmt_sig(-0.5), "-0.5");
        assert_eq!(fmt_sig(1234.0), "1234");
        assert_eq!(fmt_sig(1.0 / 3.0 * 1e-7), "3.33333333333e-8");
        assert_eq!(fmt_sig(2.5e15), "2.5e15");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(round_sig(0.1 + 0.2), 0.3);
    }
}
