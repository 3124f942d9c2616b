//! Number formatting for CSV output.

/// `x` with 12 significant digits, trailing zeros trimmed; fixed notation
/// for exponents in `[-5, 12)`, scientific otherwise.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::num;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(0.0), "0");
        assert_eq!(num(1.0), "1");
        assert_eq!(num(-2.5), "-2.5");
        assert_eq!(num(std::f64::consts::PI), "3.14159265359");
        assert_eq!(num(18.2555123456789), "18.2555123457");
        assert_eq!(num(1.0 / 3.0 * 1e-7), "3.33333333333e-8");
        assert_eq!(num(6.02214076e23), "6.02214076e23");
        assert_eq!(num(123456.0), "123456");
        assert_eq!(num(f64::INFINITY), "inf");
    }

    #[test]
    fn parses_back_to_twelve_digits() {
        for &x in &[0.79681213002, 2.48526751266e-3, 9.87654321e-9, 42.0] {
            let y: f64 = num(x).parse().unwrap();
            assert!((y / x - 1.0).abs() < 1e-11);
        }
    }
}
