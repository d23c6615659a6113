//! Number formatting and CSV output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::exit::CliError;

/// Formats like C's `%.9g`: nine significant digits, trailing zeros
/// dropped, scientific notation outside `1e-4 ≤ |x| < 1e9`.
pub fn g9(x: f64) -> String {
    const P: i32 = 9;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    // exponent after rounding to P significant digits
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("`e` formatting has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A CSV table of numbers, rendered with [`g9`] and LF line endings.
pub struct Csv {
    out: String,
    width: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut out = header.join(",");
        out.push('\n');
        Csv { out, width: header.len() }
    }

    pub fn row(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.width);
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                self.out.push(',');
            }
            write!(self.out, "{}", g9(*v)).expect("writing to a String");
        }
        self.out.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.out
    }

    pub fn write_to(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, &self.out).map_err(|e| CliError::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::g9;

    #[test]
    fn matches_printf() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (-0.5, "-0.5"),
            (0.368054196, "0.368054196"),
            (1.0 / 3.0, "0.333333333"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (999999999.5, "1e+09"),
            (2.5e-300, "2.5e-300"),
            (-std::f64::consts::LN_2, "-0.693147181"),
            (f64::INFINITY, "inf"),
        ];
        for (x, s) in cases {
            assert_eq!(g9(x), s, "{x}");
        }
    }
}
