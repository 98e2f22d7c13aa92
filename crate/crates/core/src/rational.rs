//! Exact rational helpers: parsing of user input and small conversions.

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational number used for all cone parameters.
pub type Rational = Rational64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty number")]
    Empty,
    #[error("malformed number `{0}`: expected an integer, a fraction p/q or a terminating decimal")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("`{0}` does not fit in 64-bit exact arithmetic")]
    Overflow(String),
}

/// Parses `"3"`, `"-7/4"` or a terminating decimal such as `"0.35"` into an exact rational.
///
/// Decimals are converted digit by digit, so `"0.1"` is exactly `1/10`.
pub fn parse_rational(input: &str) -> Result<Rational, ParseRationalError> {
    let s = input.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let malformed = || ParseRationalError::Malformed(s.to_string());
    let overflow = || ParseRationalError::Overflow(s.to_string());

    if let Some((num, den)) = s.split_once('/') {
        let num: i64 = parse_int(num.trim()).ok_or_else(malformed)?.ok_or_else(overflow)?;
        let den: i64 = parse_int(den.trim()).ok_or_else(malformed)?.ok_or_else(overflow)?;
        if den == 0 {
            return Err(ParseRationalError::ZeroDenominator(s.to_string()));
        }
        return Ok(Rational::new(num, den));
    }

    let (negative, body) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if (int_part.is_empty() && frac_part.is_empty())
        || !int_part.bytes().all(|b| b.is_ascii_digit())
        || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(malformed());
    }
    let digits = format!("{int_part}{frac_part}");
    let digits = digits.trim_start_matches('0');
    let numerator: i64 = if digits.is_empty() {
        0
    } else {
        digits.parse().map_err(|_| overflow())?
    };
    let denominator = 10i64
        .checked_pow(frac_part.len() as u32)
        .ok_or_else(overflow)?;
    let value = Rational::new(numerator, denominator);
    Ok(if negative { -value } else { value })
}

fn parse_int(s: &str) -> Option<Option<i64>> {
    let body = s.strip_prefix(['-', '+']).unwrap_or(s);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some(s.parse().ok())
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn is_integer(q: &Rational) -> bool {
    q.is_integer()
}

/// Integer value of `q` when it is an integer.
pub fn as_integer(q: &Rational) -> Option<i64> {
    q.is_integer().then(|| q.to_integer())
}

/// Formats as `p/q`, or `p` for integers.
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Floor of a rational as an integer.
pub fn floor(q: &Rational) -> i64 {
    q.numer().div_floor(q.denom())
}

pub fn is_zero(q: &Rational) -> bool {
    q.is_zero()
}
