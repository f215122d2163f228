//! Fixed-precision decimal text for reports.

/// `x` with `digits` significant digits in `%g` style: plain notation for
/// decimal exponents in `[-5, digits)`, scientific otherwise, trailing zeros
/// removed. Non-finite values print as `inf`, `-inf`, `nan`.
pub fn sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let e = format!("{:.*e}", digits - 1, x);
    let (mant, exp) = e.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if exp < -5 || exp >= digits as i32 {
        let mant = trim(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{:.*}", decimals, x)).to_string()
    }
}

/// Twelve significant digits.
pub fn g12(x: f64) -> String {
    sig(x, 12)
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
    use super::*;

    #[test]
    fn formats() {
        assert_eq!(g12(std::f64::consts::FRAC_PI_2), "1.57079632679");
        assert_eq!(g12(5.0), "5");
        assert_eq!(g12(-0.25), "-0.25");
        assert_eq!(g12(1.5e-7), "1.5e-07");
        assert_eq!(g12(2.5e13), "2.5e+13");
        assert_eq!(g12(f64::INFINITY), "inf");
        assert_eq!(g12(123456.0), "123456");
    }
}
