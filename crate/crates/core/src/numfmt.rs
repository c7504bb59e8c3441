//! Fixed-precision number rendering shared by the file writers.
//!
//! Every number written to an instance file, sidecar or CSV uses the same
//! `%.17g`-style rendering so the output is lossless and byte-stable.

/// Renders `x` with 17 significant digits, trailing zeros removed
/// (`%.17g` semantics). Non-finite values render as `null`.
pub fn g17(x: f64) -> String {
    if !x.is_finite() {
        return "null".to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (16 - exp) as usize;
        trim_fraction(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Renders a slice as a JSON array using [`g17`].
pub fn g17_array(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|&x| g17(x)).collect();
    format!("[{}]", items.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn matches_printf_g17() {
        assert_eq!(g17(0.1), "0.10000000000000001");
        assert_eq!(g17(2.0), "2");
        assert_eq!(g17(0.5), "0.5");
        assert_eq!(g17(1e20), "1e+20");
        assert_eq!(g17(1.5e-7), "1.4999999999999999e-07");
        assert_eq!(g17(-3.25), "-3.25");
        assert_eq!(g17(123456789.0), "123456789");
        assert_eq!(g17(0.0), "0");
        assert_eq!(g17(1e16), "10000000000000000");
        assert_eq!(g17(1e-5), "1.0000000000000001e-05");
        assert_eq!(g17(1e-4), "0.0001");
        assert_eq!(g17(f64::NAN), "null");
    }

    proptest! {
        #[test]
        fn round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            let back: f64 = g17(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
