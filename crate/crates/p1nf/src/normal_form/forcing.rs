//! The forcing polynomial `f` in `y'' = 6 y^2 + f(x)`, with a small text
//! parser for CLI use.  `f(x) = x` is the equation of interest; other
//! polynomials feed the obstruction analyzer.

use crate::rat::{parse_rat, rat_to_f64, Rat, RatParseError};
use crate::series::TPoly;
use num_complex::Complex64;
use num_traits::Zero;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Forcing {
    /// Coefficient of `x^m` at index `m`, trailing zeros trimmed.
    coeffs: Vec<Rat>,
}

impl Forcing {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Forcing { coeffs }
    }

    /// `f(x) = x`.
    pub fn painleve_one() -> Self {
        Forcing::new(vec![Rat::zero(), Rat::from_integer(1.into())])
    }

    pub fn zero() -> Self {
        Forcing::new(Vec::new())
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_painleve_one(&self) -> bool {
        *self == Forcing::painleve_one()
    }

    /// As a polynomial in the series base variable.
    pub fn to_tpoly(&self) -> TPoly {
        TPoly::new(self.coeffs.clone())
    }

    /// `f(x0 + tau)` as a polynomial in `tau` (exact Taylor shift).
    pub fn shifted(&self, x0: &Rat) -> TPoly {
        self.to_tpoly().shift(x0)
    }

    pub fn eval_c64(&self, x: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * x + Complex64::new(rat_to_f64(c), 0.0);
        }
        acc
    }

    /// `f'(x)`, by Horner on the term-by-term derivative.
    pub fn derivative_c64(&self, x: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * x + Complex64::new(j as f64 * rat_to_f64(c), 0.0);
        }
        acc
    }

    /// Parse expressions like `x`, `x^2`, `0`, `2x+1`, `-3/2x^5 + x`,
    /// `1/2*x^3 - x`.  Terms are `[coef][*]x[^exp]` or bare rationals,
    /// joined by `+`/`-`; spaces around operators are allowed.
    pub fn parse(src: &str) -> Result<Forcing, ForcingParseError> {
        let s = src.trim();
        if s.is_empty() {
            return Err(ForcingParseError::Empty);
        }
        let mut coeffs: Vec<Rat> = Vec::new();
        let mut rest = s;
        let mut first = true;
        while !rest.is_empty() {
            let (sign, after_sign) = match rest.as_bytes()[0] {
                b'+' => (1, rest[1..].trim_start()),
                b'-' => (-1, rest[1..].trim_start()),
                _ if first => (1, rest),
                _ => return Err(ForcingParseError::ExpectedOperator(rest.to_string())),
            };
            first = false;
            let term_end = after_sign
                .find(['+', '-'])
                .unwrap_or(after_sign.len());
            let term = after_sign[..term_end].trim();
            if term.is_empty() {
                return Err(ForcingParseError::Empty);
            }
            let (mut coef, power) = parse_term(term)?;
            if sign < 0 {
                coef = -coef;
            }
            if coeffs.len() <= power {
                coeffs.resize(power + 1, Rat::zero());
            }
            coeffs[power] += coef;
            rest = after_sign[term_end..].trim_start();
        }
        Ok(Forcing::new(coeffs))
    }
}

/// Upper bound on exponents accepted by the parser; far beyond anything the
/// recurrence can use, but keeps hostile input from allocating huge tables.
const MAX_EXPONENT: usize = 512;

fn parse_term(term: &str) -> Result<(Rat, usize), ForcingParseError> {
    match term.find('x') {
        None => {
            let c = parse_rat(term).map_err(ForcingParseError::BadRational)?;
            Ok((c, 0))
        }
        Some(xi) => {
            let coef_src = term[..xi].trim_end();
            let coef_src = coef_src.strip_suffix('*').map(str::trim_end).unwrap_or(coef_src);
            let coef = if coef_src.is_empty() {
                Rat::from_integer(1.into())
            } else {
                parse_rat(coef_src).map_err(ForcingParseError::BadRational)?
            };
            let exp_src = term[xi + 1..].trim_start();
            let power = if exp_src.is_empty() {
                1
            } else {
                let digits = exp_src
                    .strip_prefix('^')
                    .ok_or_else(|| ForcingParseError::BadExponent(exp_src.to_string()))?
                    .trim_start();
                let p: usize = digits
                    .parse()
                    .map_err(|_| ForcingParseError::BadExponent(digits.to_string()))?;
                if p > MAX_EXPONENT {
                    return Err(ForcingParseError::ExponentTooLarge(p));
                }
                p
            };
            Ok((coef, power))
        }
    }
}

#[derive(Debug, Error)]
pub enum ForcingParseError {
    #[error("empty forcing expression")]
    Empty,
    #[error("expected '+' or '-' before {0:?}")]
    ExpectedOperator(String),
    #[error("bad rational coefficient: {0}")]
    BadRational(RatParseError),
    #[error("bad exponent {0:?} (expected ^<integer>)")]
    BadExponent(String),
    #[error("exponent {0} too large")]
    ExponentTooLarge(usize),
}

impl fmt::Display for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let (sign, mag) = if c < &Rat::zero() {
                ("-", -c.clone())
            } else {
                ("+", c.clone())
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {sign} ")?;
            }
            let unit_coef = mag == Rat::from_integer(1.into());
            match m {
                0 => write!(f, "{}", crate::rat::format_rat(&mag))?,
                _ => {
                    if !unit_coef {
                        write!(f, "{}", crate::rat::format_rat(&mag))?;
                    }
                    write!(f, "x")?;
                    if m > 1 {
                        write!(f, "^{m}")?;
                    }
                }
            }
        }
        Ok(())
    }
}
