//! C-style number formatting for reports.

/// Formats like printf `%.6e`: `1.234560e-03`, `-2.000000e+01`.
pub fn sci(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.6e}");
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", exp.abs())
}

#[cfg(test)]
mod tests {
    use super::sci;

    #[test]
    fn matches_printf() {
        assert_eq!(sci(0.0), "0.000000e+00");
        assert_eq!(sci(6.0e-7), "6.000000e-07");
        assert_eq!(sci(-1234.5), "-1.234500e+03");
        assert_eq!(sci(1e100), "1.000000e+100");
        assert_eq!(sci(f64::NAN), "nan");
    }
}
