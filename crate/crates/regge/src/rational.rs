//! Rational scalar type and small parsing/printing helpers.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

/// Scalar field for the whole crate: arbitrary-precision rationals,
/// always in lowest terms with positive denominator (maintained by
/// `BigRational` itself).
pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    assert!(d != 0);
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn is_zero(x: &Q) -> bool {
    x.is_zero()
}

/// Parse `p/q` or a plain integer.
pub fn parse_q(s: &str) -> Result<Q, String> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| format!("bad numerator in `{s}`"))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| format!("bad denominator in `{s}`"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in `{s}`"));
        }
        Ok(Q::new(n, d))
    } else {
        let n: BigInt = s.parse().map_err(|_| format!("bad rational `{s}`"))?;
        Ok(Q::from_integer(n))
    }
}

/// Render as `p/q`, or just `p` when the value is an integer.
pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Rough magnitude measure used for pivot selection: total bit length of
/// numerator and denominator.
pub fn bit_size(x: &Q) -> u64 {
    x.numer().abs().bits() + x.denom().bits()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3/7", "-2/5", "4", "-9", "0"] {
            let v = parse_q(s).unwrap();
            assert_eq!(fmt_q(&v), s);
        }
        assert_eq!(fmt_q(&parse_q("6/4").unwrap()), "3/2");
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
    }
}
