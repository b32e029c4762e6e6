//! Exact-number helpers shared across the crate: parsing, rendering and the
//! decimal-string encodings used by the file formats.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{HimError, Result};

/// Parses a decimal integer such as `"-42"`.
pub fn parse_int(s: &str) -> Result<BigInt> {
    s.trim().parse::<BigInt>().map_err(|e| HimError::Parse(format!("`{s}` is not an integer: {e}")))
}

/// Parses `"7/5"`, `"1.4"`, `"-0.6"` or a plain integer into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_int(n)?;
        let d = parse_int(d)?;
        if d.is_zero() {
            return Err(HimError::Parse(format!("`{s}` has a zero denominator")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(HimError::Parse(format!("`{s}` is not a decimal")));
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        let digits = format!("{}{}", if whole_digits.is_empty() { "0" } else { whole_digits }, frac);
        let mut numer = parse_int(&digits)?;
        if negative {
            numer = -numer;
        }
        let denom = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(numer, denom));
    }
    Ok(BigRational::from_integer(parse_int(s)?))
}

/// Renders a rational as `n` or `n/d` (lowest terms).
pub fn fraction(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Renders a rational in decimal notation. Terminating expansions are exact;
/// others are cut after `max_places` digits and suffixed with `...`.
pub fn decimal(x: &BigRational, max_places: usize) -> String {
    let sign = if x.is_negative() { "-" } else { "" };
    let x = x.abs();
    let (whole, mut rem) = x.numer().div_rem(x.denom());
    if rem.is_zero() {
        return format!("{sign}{whole}");
    }
    let ten = BigInt::from(10);
    let mut digits = String::new();
    while !rem.is_zero() && digits.len() < max_places {
        rem *= &ten;
        let (q, r) = rem.div_rem(x.denom());
        digits.push_str(&q.to_string());
        rem = r;
    }
    let tail = if rem.is_zero() { "" } else { "..." };
    format!("{sign}{whole}.{digits}{tail}")
}

pub(crate) fn floor(x: &BigRational) -> BigInt {
    x.numer().div_floor(x.denom())
}

pub(crate) fn two() -> BigInt {
    BigInt::from(2)
}

pub(crate) fn is_even_integer(x: &BigRational) -> bool {
    x.is_integer() && x.numer().is_even()
}

pub(crate) fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub(crate) fn int(x: &BigInt) -> BigRational {
    BigRational::from_integer(x.clone())
}

/// Serde adapter: arbitrary-precision integers as decimal strings.
pub(crate) mod dec {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_int(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter: rationals as a `["num", "den"]` pair of decimal strings.
pub(crate) mod dec_ratio {
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::Zero;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        [v.numer().to_string(), v.denom().to_string()].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let [n, den] = <[String; 2]>::deserialize(d)?;
        let n: BigInt = super::parse_int(&n).map_err(serde::de::Error::custom)?;
        let den: BigInt = super::parse_int(&den).map_err(serde::de::Error::custom)?;
        if den.is_zero() {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(BigRational::new(n, den))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals() {
        assert_eq!(parse_rational("0.4").unwrap(), ratio(2, 5));
        assert_eq!(parse_rational("1.4").unwrap(), ratio(7, 5));
        assert_eq!(parse_rational("-0.6").unwrap(), ratio(-3, 5));
        assert_eq!(parse_rational("3/2").unwrap(), ratio(3, 2));
        assert_eq!(parse_rational("43").unwrap(), ratio(43, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("1.x").is_err());
    }

    #[test]
    fn renders_decimals() {
        assert_eq!(decimal(&ratio(2, 5), 6), "0.4");
        assert_eq!(decimal(&ratio(-3, 5), 6), "-0.6");
        assert_eq!(decimal(&ratio(1, 3), 4), "0.3333...");
        assert_eq!(fraction(&ratio(14, 10)), "7/5");
    }

    #[test]
    fn floor_rounds_toward_negative_infinity() {
        assert_eq!(floor(&ratio(-3, 10)), BigInt::from(-1));
        assert_eq!(floor(&ratio(212, 10)), BigInt::from(21));
    }
}
