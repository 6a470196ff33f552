//! Locale-independent number formatting shared by every CSV/JSON writer.

/// Significant digits of every number written to an artifact.
pub const SIG_DIGITS: usize = 12;

/// Formats `x` with [`SIG_DIGITS`] significant digits.
///
/// Plain decimal notation is used for magnitudes in `[1e-4, 1e15)`,
/// scientific notation otherwise. Trailing zeros are trimmed.
pub fn sig(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs();
    if !(1e-4..1e15).contains(&mag) {
        let s = format!("{:.*e}", SIG_DIGITS - 1, x);
        let (mant, exp) = s.split_once('e').expect("exponent");
        return format!("{}e{}", trim_zeros(mant), exp);
    }
    // Round first so that e.g. 9.9999999999995 picks the right exponent.
    let rounded: f64 = format!("{:.*e}", SIG_DIGITS - 1, x).parse().expect("float");
    let exp10 = rounded.abs().log10().floor() as i32;
    let decimals = (SIG_DIGITS as i32 - 1 - exp10).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, rounded)).to_string()
}

/// Rounds `x` to [`SIG_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x).parse().expect("float")
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(sig(1.0), "1");
        assert_eq!(sig(-2.5), "-2.5");
        assert_eq!(sig(std::f64::consts::PI), "3.14159265359");
        assert_eq!(sig(1234.5678901234567), "1234.56789012");
        assert_eq!(sig(0.000123456789012345), "0.000123456789012");
        assert_eq!(sig(1.5e-9), "1.5e-9");
        assert_eq!(sig(9.9999999999995), "10");
        assert_eq!(sig(0.0), "0");
    }

    #[test]
    fn round_trip_through_rounding() {
        let x = 1.0 / 3.0;
        assert_eq!(sig(x).parse::<f64>().unwrap(), round_sig(x));
    }
}
