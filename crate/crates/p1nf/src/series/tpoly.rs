//! Exact polynomials in the shifted base variable `tau = t - x0`.
//!
//! These are the innermost coefficients of the triple expansion used
//! throughout the crate: a map coefficient is a polynomial in `tau`, a
//! `w`-direction series has `TPoly` coefficients, and a `v`-direction series
//! has `w`-series coefficients.  Polynomials are exact objects (no
//! truncation): every operation here is closed and lossless.
//!
//! Invariant: `coeffs` never ends in a zero, so the zero polynomial is the
//! empty vector and `degree()` is `None` exactly for zero.

use crate::rat::{format_rat, rat_to_f64, CxRat, Rat};
use num_complex::Complex64;
use num_traits::Zero;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TPoly {
    coeffs: Vec<Rat>,
}

impl TPoly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        TPoly { coeffs }
    }

    pub fn zero() -> Self {
        TPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rat) -> Self {
        TPoly::new(vec![c])
    }

    /// The monomial `c * tau^j`.
    pub fn monomial(j: usize, c: Rat) -> Self {
        if c.is_zero() {
            return TPoly::zero();
        }
        let mut v = vec![Rat::zero(); j + 1];
        v[j] = c;
        TPoly { coeffs: v }
    }

    /// The identity polynomial `tau`.
    pub fn tau() -> Self {
        TPoly::monomial(1, Rat::from_integer(1.into()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of `tau^j` (zero beyond the stored degree).
    pub fn coeff(&self, j: usize) -> Rat {
        self.coeffs.get(j).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn add(&self, o: &TPoly) -> TPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            out.push(self.coeff(j) + o.coeff(j));
        }
        TPoly::new(out)
    }

    pub fn sub(&self, o: &TPoly) -> TPoly {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> TPoly {
        TPoly { coeffs: self.coeffs.iter().map(|c| -c.clone()).collect() }
    }

    pub fn mul(&self, o: &TPoly) -> TPoly {
        if self.is_zero() || o.is_zero() {
            return TPoly::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        TPoly::new(out)
    }

    pub fn scale(&self, c: &Rat) -> TPoly {
        TPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Derivative with respect to `tau`.
    pub fn derive(&self) -> TPoly {
        if self.coeffs.len() <= 1 {
            return TPoly::zero();
        }
        let mut out = Vec::with_capacity(self.coeffs.len() - 1);
        for (j, c) in self.coeffs.iter().enumerate().skip(1) {
            out.push(c * Rat::from_integer(j.into()));
        }
        TPoly::new(out)
    }

    /// Exact Taylor shift `p(tau) -> p(tau + a)`, recentering the polynomial.
    pub fn shift(&self, a: &Rat) -> TPoly {
        // Horner on p(X) with X = tau + a keeps everything rational.
        let mut acc = TPoly::zero();
        let x = TPoly::new(vec![a.clone(), Rat::from_integer(1.into())]);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&x);
            acc = acc.add(&TPoly::constant(c.clone()));
        }
        acc
    }

    /// Exact evaluation at a complex-rational point.
    pub fn eval_cx(&self, tau: &CxRat) -> CxRat {
        let mut acc = CxRat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(tau).add(&CxRat::from_rat(c.clone()));
        }
        acc
    }

    /// Floating-point Horner evaluation.
    pub fn eval_f64(&self, tau: Complex64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for c in self.coeffs.iter().rev() {
            acc = acc * tau + rat_to_f64(c);
        }
        acc
    }

    /// Coefficients converted to `f64` complex numbers, ascending powers.
    pub fn coeffs_f64(&self) -> Vec<Complex64> {
        self.coeffs.iter().map(|c| Complex64::new(rat_to_f64(c), 0.0)).collect()
    }
}

impl fmt::Display for TPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match j {
                0 => write!(f, "{}", format_rat(c))?,
                1 => write!(f, "({})*tau", format_rat(c))?,
                _ => write!(f, "({})*tau^{}", format_rat(c), j)?,
            }
        }
        Ok(())
    }
}
