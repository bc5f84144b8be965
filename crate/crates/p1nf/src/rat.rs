//! Exact rational scalars shared by every series type in this crate.
//!
//! `Rat` is an arbitrary-precision rational; all series coefficients are
//! `Rat`s and every algebraic operation on them is exact.  `CxRat` is a
//! complex number with rational real and imaginary parts, used where a
//! numeric check must stay free of floating-point noise (for instance the
//! order-scaling tests, which compare residual magnitudes across points
//! whose coordinates are halved exactly).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::str::FromStr;

/// Arbitrary-precision rational number, always stored reduced with a
/// positive denominator (invariants maintained by `num_rational`).
pub type Rat = BigRational;

/// `p/q` as a `Rat`.  Panics on `q == 0`.
pub fn rat(p: i64, q: i64) -> Rat {
    assert!(q != 0, "rational with zero denominator");
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Integer `n` as a `Rat`.
pub fn rint(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

/// Best `f64` approximation of a `Rat` (used only in diagnostics and in the
/// floating-point evaluation layer, never in the exact solvers).
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Upper bound on the digit count accepted by [`parse_rat`].  Rational
/// literals come from untrusted files; without a cap a hostile input could
/// force a multi-gigabyte bignum allocation out of a few bytes of text.
pub const MAX_RAT_DIGITS: usize = 10_000;

/// Parse a rational literal of the form `p` or `p/q` (optional leading `-`,
/// decimal digits, `q > 0`).  This is deliberately stricter than
/// `BigRational::from_str`: no whitespace, no `+`, no signed denominator,
/// no empty parts.
pub fn parse_rat(s: &str) -> Result<Rat, RatParseError> {
    let (num_part, den_part) = match s.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (s, None),
    };
    let num = parse_int_part(num_part, true)?;
    match den_part {
        None => Ok(BigRational::from_integer(num)),
        Some(d) => {
            let den = parse_int_part(d, false)?;
            if den.is_zero() {
                return Err(RatParseError::ZeroDenominator);
            }
            Ok(BigRational::new(num, den))
        }
    }
}

fn parse_int_part(s: &str, allow_sign: bool) -> Result<BigInt, RatParseError> {
    let (negative, digits) = match s.strip_prefix('-') {
        Some(rest) if allow_sign => (true, rest),
        Some(_) => return Err(RatParseError::Malformed),
        None => (false, s),
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(RatParseError::Malformed);
    }
    if digits.len() > MAX_RAT_DIGITS {
        return Err(RatParseError::TooLong);
    }
    // Leading zeros are accepted ("007"): harmless and common in hand-edited files.
    let n = BigInt::from_str(digits).map_err(|_| RatParseError::Malformed)?;
    Ok(if negative { -n } else { n })
}

/// Render a `Rat` in the same `p/q` form accepted by [`parse_rat`].
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RatParseError {
    #[error("malformed rational literal (expected p or p/q with decimal digits)")]
    Malformed,
    #[error("rational literal with zero denominator")]
    ZeroDenominator,
    #[error("rational literal too long (more than {MAX_RAT_DIGITS} digits)")]
    TooLong,
}

/// Complex number with exact rational real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CxRat {
    pub re: Rat,
    pub im: Rat,
}

impl CxRat {
    pub fn new(re: Rat, im: Rat) -> Self {
        CxRat { re, im }
    }

    pub fn from_rat(re: Rat) -> Self {
        CxRat { re, im: Rat::zero() }
    }

    pub fn zero() -> Self {
        CxRat { re: Rat::zero(), im: Rat::zero() }
    }

    pub fn one() -> Self {
        CxRat { re: Rat::one(), im: Rat::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, o: &CxRat) -> CxRat {
        CxRat { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    pub fn sub(&self, o: &CxRat) -> CxRat {
        CxRat { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    pub fn neg(&self) -> CxRat {
        CxRat { re: -self.re.clone(), im: -self.im.clone() }
    }

    pub fn mul(&self, o: &CxRat) -> CxRat {
        CxRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    pub fn mul_rat(&self, r: &Rat) -> CxRat {
        CxRat { re: &self.re * r, im: &self.im * r }
    }

    /// Exact division.  Panics on division by zero.
    pub fn div(&self, o: &CxRat) -> CxRat {
        let n = o.norm_sqr();
        assert!(!n.is_zero(), "division by zero CxRat");
        CxRat {
            re: (&self.re * &o.re + &self.im * &o.im) / &n,
            im: (&self.im * &o.re - &self.re * &o.im) / &n,
        }
    }

    /// `|z|^2` as an exact rational.
    pub fn norm_sqr(&self) -> Rat {
        &self.re * &self.re + &self.im * &self.im
    }

    /// `|z|` as an `f64` (the only lossy operation on this type).
    pub fn abs_f64(&self) -> f64 {
        rat_to_f64(&self.norm_sqr()).sqrt()
    }

    pub fn to_c64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }

    /// Exact halving, used by the order-scaling tests.
    pub fn half(&self) -> CxRat {
        let two = rint(2);
        CxRat { re: &self.re / &two, im: &self.im / &two }
    }
}

impl fmt::Display for CxRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", format_rat(&self.re))
        } else if self.im.is_negative() {
            write!(f, "{} - {}i", format_rat(&self.re), format_rat(&(-self.im.clone())))
        } else {
            write!(f, "{} + {}i", format_rat(&self.re), format_rat(&self.im))
        }
    }
}
