use super::{real, Real};
use crate::error::{Error, Result};

/// Decimal digits needed to carry `prec` bits: ⌈prec · log10 2⌉ + 1.
pub fn decimal_digits(prec: u32) -> usize {
    (prec as f64 * std::f64::consts::LOG10_2).ceil() as usize + 1
}

/// Scientific notation at full working precision with trailing zeros of the
/// mantissa dropped, e.g. `2.4e1`, `-6e0`, `0e0`.
///
/// The output depends only on the value and its precision, so identical
/// inputs always give byte-identical text.
pub fn format_real(x: &Real) -> String {
    if x.is_zero() {
        return "0e0".to_string();
    }
    let digits = decimal_digits(x.prec());
    let (negative, mantissa, exponent) = x.to_sign_string_exp(10, Some(digits));
    // value = 0.<mantissa> × 10^exponent
    let exponent = exponent.unwrap_or(0) - 1;
    let trimmed = mantissa.trim_end_matches('0');
    let (head, tail) = trimmed.split_at(1);
    let sign = if negative { "-" } else { "" };
    if tail.is_empty() {
        format!("{sign}{head}e{exponent}")
    } else {
        format!("{sign}{head}.{tail}e{exponent}")
    }
}

/// Parses a decimal string at `prec` bits (correctly rounded).
pub fn parse_real(text: &str, prec: u32) -> Result<Real> {
    let parsed = Real::parse(text.trim()).map_err(|_| Error::Parse(text.to_string()))?;
    let value = real(prec, parsed);
    if !value.is_finite() {
        return Err(Error::Parse(text.to_string()));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_integers() {
        assert_eq!(format_real(&real(256, 24)), "2.4e1");
        assert_eq!(format_real(&real(256, -6)), "-6e0");
        assert_eq!(format_real(&real(256, 0)), "0e0");
        assert_eq!(format_real(&real(256, 0.5)), "5e-1");
    }

    #[test]
    fn full_precision_digits() {
        let third = real(256, 1) / 3u32;
        let text = format_real(&third);
        let mantissa: String = text[..text.find('e').unwrap()].chars().filter(char::is_ascii_digit).collect();
        assert_eq!(mantissa.len(), decimal_digits(256));
        assert!(mantissa.len() as f64 >= 256.0 * 0.3);
    }

    #[test]
    fn parse_round_trip() {
        let x = real(256, 2).sqrt();
        let back = parse_real(&format_real(&x), 256).unwrap();
        assert_eq!(x, back);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_real("abc", 256).is_err());
        assert!(parse_real("inf", 256).is_err());
    }
}
