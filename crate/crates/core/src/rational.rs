//! Exact rational arithmetic and the external string form `"p/q"`.
//!
//! Every quantity in this crate (valuations, probabilities, payments, LP
//! coefficients) is a [`Rat`]. `num-rational` keeps values canonical after
//! every operation: denominator positive, gcd(|numerator|, denominator) = 1.
//! No floating point appears anywhere.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Canonical arbitrary-precision rational.
pub type Rat = BigRational;

/// Shorthand constructor for a rational `n/d`. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Shorthand constructor for an integer rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalParseError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal {0:?}")]
    Malformed(String),
    #[error("denominator of {0:?} is not positive")]
    NonPositiveDenominator(String),
}

/// Parses the external form: an integer string `"p"` or a fraction `"p/q"`.
///
/// The denominator must be written positive; `"1/0"` and `"1/-2"` are
/// rejected rather than normalized away.
pub fn parse_rat(s: &str) -> Result<Rat, RationalParseError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(RationalParseError::Empty);
    }
    let malformed = || RationalParseError::Malformed(s.to_string());
    match s.split_once('/') {
        None => {
            let n: BigInt = s.parse().map_err(|_| malformed())?;
            Ok(Rat::from_integer(n))
        }
        Some((num, den)) => {
            if den.contains('/') {
                return Err(malformed());
            }
            let n: BigInt = num.trim().parse().map_err(|_| malformed())?;
            let d: BigInt = den.trim().parse().map_err(|_| malformed())?;
            if d <= BigInt::zero() {
                return Err(RationalParseError::NonPositiveDenominator(s.to_string()));
            }
            Ok(Rat::new(n, d))
        }
    }
}

/// Formats a rational canonically: `"p"` when the denominator is 1,
/// otherwise `"p/q"` with `q > 0`.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Encoding length of a rational in bits: bits of |numerator| plus bits of
/// the denominator. `0` has bit length 1 (one bit of numerator convention
/// aside, the denominator 1 contributes its single bit).
pub fn bit_length(r: &Rat) -> u64 {
    r.numer().abs().bits() + r.denom().bits()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integers_and_fractions() {
        assert_eq!(parse_rat("3").unwrap(), rat_int(3));
        assert_eq!(parse_rat("-7").unwrap(), rat_int(-7));
        assert_eq!(parse_rat("1/2").unwrap(), rat(1, 2));
        assert_eq!(parse_rat("-3/6").unwrap(), rat(-1, 2));
        assert_eq!(parse_rat(" 4/8 ").unwrap(), rat(1, 2));
    }

    #[test]
    fn rejects_non_positive_denominators() {
        assert_eq!(
            parse_rat("1/0"),
            Err(RationalParseError::NonPositiveDenominator("1/0".into()))
        );
        assert_eq!(
            parse_rat("1/-2"),
            Err(RationalParseError::NonPositiveDenominator("1/-2".into()))
        );
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_rat("").is_err());
        assert!(parse_rat("a/b").is_err());
        assert!(parse_rat("1/2/3").is_err());
        assert!(parse_rat("1.5").is_err());
    }

    #[test]
    fn formats_canonically() {
        assert_eq!(format_rat(&rat(2, 4)), "1/2");
        assert_eq!(format_rat(&rat_int(-3)), "-3");
        assert_eq!(format_rat(&rat(-2, 4)), "-1/2");
        assert_eq!(format_rat(&Rat::zero()), "0");
    }

    #[test]
    fn bit_length_counts_both_parts() {
        assert_eq!(bit_length(&rat_int(0)), 1);
        assert_eq!(bit_length(&rat_int(1)), 2);
        assert_eq!(bit_length(&rat(-5, 3)), 5);
    }
}
