//! Fixed-precision number formatting shared by every file writer.

pub const DECIMALS: usize = 6;

/// Formats with exactly six fractional digits; non-finite values become
/// `nan`, `inf` or `-inf`.
pub fn fixed(value: f64) -> String {
    if value.is_nan() {
        "nan".to_string()
    } else if value.is_infinite() {
        if value > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        let s = format!("{value:.DECIMALS$}");
        // "-0.000000" and "0.000000" must compare equal in diffs.
        if s.trim_start_matches('-')
            .chars()
            .all(|c| c == '0' || c == '.')
        {
            s.trim_start_matches('-').to_string()
        } else {
            s
        }
    }
}

/// Rounds to six decimals for structured (JSON) output.
pub fn round6(value: f64) -> f64 {
    if value.is_finite() {
        let r = (value * 1e6).round() / 1e6;
        if r == 0.0 {
            0.0
        } else {
            r
        }
    } else {
        value
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_digits() {
        assert_eq!(fixed(1.0 / 3.0), "0.333333");
        assert_eq!(fixed(2.0), "2.000000");
        assert_eq!(fixed(-1e-9), "0.000000");
        assert_eq!(fixed(-0.5), "-0.500000");
        assert_eq!(fixed(f64::INFINITY), "inf");
        assert_eq!(round6(0.1234567), 0.123457);
    }
}
