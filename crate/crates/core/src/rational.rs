//! Exact rational scalars.
//!
//! Every quantity in this crate (payoffs, strategies, LP solutions) is a
//! [`Rat`], an arbitrary-precision fraction kept in canonical form: positive
//! denominator, numerator and denominator coprime. `num-rational` maintains
//! that invariant through every arithmetic operation, so nothing here ever
//! rounds.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;

/// Integer-valued rational.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Fraction `n/d`. Panics on `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p"` or `"p/q"`, the wire format used by game files.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        None => s.parse::<BigInt>().ok().map(Rat::from_integer),
        Some((p, q)) => {
            let num = p.trim().parse::<BigInt>().ok()?;
            let den = q.trim().parse::<BigInt>().ok()?;
            if den.is_zero() {
                return None;
            }
            Some(Rat::new(num, den))
        }
    }
}

/// Canonical string form: bare integer, otherwise `p/q` in lowest terms.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Number of bits needed to write `r` down (numerator plus denominator).
pub fn bit_length(r: &Rat) -> u64 {
    r.numer().bits() + r.denom().bits()
}

pub fn abs(r: &Rat) -> Rat {
    if r.is_negative() {
        -r.clone()
    } else {
        r.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;
    use proptest::prelude::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["0", "7", "-3", "1/2", "-22/7"] {
            let r = parse_rat(s).unwrap();
            assert_eq!(format_rat(&r), s);
        }
        assert_eq!(format_rat(&parse_rat("4/6").unwrap()), "2/3");
        assert_eq!(format_rat(&parse_rat("3/-6").unwrap()), "-1/2");
        assert!(parse_rat("1/0").is_none());
        assert!(parse_rat("x").is_none());
    }

    proptest! {
        // Canonical-form closure: arithmetic always yields gcd = 1 and a
        // positive denominator.
        #[test]
        fn arithmetic_stays_canonical(a in -50i64..50, b in 1i64..50, c in -50i64..50, d in 1i64..50) {
            let x = ratio(a, b);
            let y = ratio(c, d);
            for r in [&x + &y, &x - &y, &x * &y] {
                prop_assert!(r.denom() > &BigInt::from(0));
                prop_assert!(r.numer().gcd(r.denom()) == BigInt::from(1) || r.numer().is_zero());
            }
            if !y.is_zero() {
                let q = &x / &y;
                prop_assert!(q.denom() > &BigInt::from(0));
            }
        }

        #[test]
        fn addition_is_exact(a in -100i64..100, b in 1i64..100, c in -100i64..100, d in 1i64..100) {
            // (a/b)+(c/d) = (ad+cb)/(bd), compared exactly.
            let lhs = ratio(a, b) + ratio(c, d);
            let rhs = Rat::new(BigInt::from(a * d + c * b), BigInt::from(b * d));
            prop_assert_eq!(lhs, rhs);
        }
    }
}
