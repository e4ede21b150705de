//! Platform-independent decimal rendering used by every text artifact.

/// Significant digits written to CSV and schedule files.
pub const SIG_DIGITS: usize = 12;

/// Formats `x` as a plain decimal with exactly 12 significant digits.
///
/// Rounding is delegated to the standard library's correctly rounded
/// scientific formatter, so the output is identical on every platform.
/// Magnitudes outside `1e-15..1e15` stay in scientific notation; zero
/// (of either sign) prints as `0`.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-15..15).contains(&exp) {
        return sci;
    }
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let point = exp + 1; // digits before the decimal point
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point as usize >= digits.len() {
        format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
    } else {
        let (int, frac) = digits.split_at(point as usize);
        format!("{int}.{frac}")
    };
    format!("{sign}{body}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_values() {
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(-0.0), "0");
        assert_eq!(sig12(1.0), "1.00000000000");
        assert_eq!(sig12(-1.5), "-1.50000000000");
        assert_eq!(sig12(0.1), "0.100000000000");
        assert_eq!(sig12(2.0 * 0.1 / (std::f64::consts::PI * 215.0)), "0.000296102219706");
        assert_eq!(sig12(-150.5), "-150.500000000");
        assert_eq!(sig12(123456789012345.0), "123456789012000");
        assert_eq!(sig12(1e20), "1.00000000000e20");
        assert_eq!(sig12(3.0e-16), "3.00000000000e-16");
        assert_eq!(sig12(0.9999999999996), "1.00000000000");
    }

    #[test]
    fn parses_back_within_precision() {
        for x in [0.123456789012345, -7.25e-9, 42.0, 6.02e14, 1.0 / 3.0] {
            let y: f64 = sig12(x).parse().unwrap();
            assert!((x - y).abs() <= 1e-11 * x.abs());
        }
    }
}
