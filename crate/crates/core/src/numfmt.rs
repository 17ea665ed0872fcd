//! Number formatting shared by every CSV writer.

/// Formats `x` with 12 significant digits, trailing zeros removed, in
/// positional notation unless the decimal exponent is below -4 or at least
/// 12 (the rules of C's `%.12g`).
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
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
    fn matches_printf_g12() {
        assert_eq!(format_sig12(0.0), "0");
        assert_eq!(format_sig12(1.0), "1");
        assert_eq!(format_sig12(-2.5), "-2.5");
        assert_eq!(format_sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig12(10.0 / 22.0), "0.454545454545");
        assert_eq!(format_sig12(123456.789), "123456.789");
        assert_eq!(format_sig12(1e-7), "1e-07");
        assert_eq!(format_sig12(1.5e-5), "1.5e-05");
        assert_eq!(format_sig12(0.0001), "0.0001");
        assert_eq!(format_sig12(1e12), "1e+12");
        assert_eq!(format_sig12(999999999999.0), "999999999999");
        assert_eq!(format_sig12(0.9999999999999), "1");
    }
}
