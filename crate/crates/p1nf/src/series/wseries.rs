//! Truncated power series in `s = w - 1/4` with `TPoly` coefficients.
//!
//! A `WSeries` stores the coefficients of `s^0 ..= s^trunc` and makes no
//! claim about higher orders.  Arithmetic propagates the certified order:
//! for a product the result is certified through
//! `min(a.trunc + val(b), b.trunc + val(a))`, where `val` is the `s`-adic
//! valuation of the stored coefficients.  The valuation terms matter in the
//! solver: multiplying by `s` (valuation 1) keeps the full order, which is
//! why the combination `s * d/dw` loses nothing while a bare `d/dw` drops
//! one order.
//!
//! Invariant: `coeffs.len() == trunc + 1` (dense storage, zero coefficients
//! included).

use super::tpoly::TPoly;
use crate::rat::{rat, rint, Rat};
use num_complex::Complex64;
use num_traits::Zero;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WSeries {
    coeffs: Vec<TPoly>,
    trunc: usize,
}

impl WSeries {
    /// Build from coefficients of `s^0..`, padding or cutting to `trunc + 1`.
    pub fn new(mut coeffs: Vec<TPoly>, trunc: usize) -> Self {
        coeffs.resize(trunc + 1, TPoly::zero());
        WSeries { coeffs, trunc }
    }

    pub fn zero(trunc: usize) -> Self {
        WSeries::new(Vec::new(), trunc)
    }

    pub fn constant(p: TPoly, trunc: usize) -> Self {
        WSeries::new(vec![p], trunc)
    }

    pub fn constant_rat(c: Rat, trunc: usize) -> Self {
        WSeries::constant(TPoly::constant(c), trunc)
    }

    /// The monomial `p * s^n`.
    pub fn monomial(n: usize, p: TPoly, trunc: usize) -> Self {
        let mut coeffs = vec![TPoly::zero(); trunc + 1];
        if n <= trunc {
            coeffs[n] = p;
        }
        WSeries { coeffs, trunc }
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn coeff(&self, n: usize) -> &TPoly {
        assert!(n <= self.trunc, "coefficient beyond certified s-order");
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[TPoly] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, n: usize, p: TPoly) {
        assert!(n <= self.trunc, "coefficient beyond certified s-order");
        self.coeffs[n] = p;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// `s`-adic valuation of the stored coefficients; `trunc + 1` for the
    /// zero series (meaning "at least past the certified window").
    pub fn val(&self) -> usize {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .unwrap_or(self.trunc + 1)
    }

    /// Reduce the certified order (no-op if already at or below `to`).
    pub fn truncate(&self, to: usize) -> WSeries {
        if to >= self.trunc {
            return self.clone();
        }
        WSeries::new(self.coeffs[..=to].to_vec(), to)
    }

    pub fn add(&self, o: &WSeries) -> WSeries {
        let t = self.trunc.min(o.trunc);
        let mut out = Vec::with_capacity(t + 1);
        for n in 0..=t {
            out.push(self.coeffs[n].add(&o.coeffs[n]));
        }
        WSeries::new(out, t)
    }

    pub fn sub(&self, o: &WSeries) -> WSeries {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> WSeries {
        WSeries::new(self.coeffs.iter().map(TPoly::neg).collect(), self.trunc)
    }

    pub fn mul(&self, o: &WSeries) -> WSeries {
        let t = (self.trunc + o.val()).min(o.trunc + self.val());
        let mut out = vec![TPoly::zero(); t + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if i + j > t {
                    break;
                }
                if !b.is_zero() {
                    out[i + j] = out[i + j].add(&a.mul(b));
                }
            }
        }
        WSeries::new(out, t)
    }

    pub fn scale(&self, c: &Rat) -> WSeries {
        WSeries::new(self.coeffs.iter().map(|a| a.scale(c)).collect(), self.trunc)
    }

    pub fn scale_poly(&self, p: &TPoly) -> WSeries {
        WSeries::new(self.coeffs.iter().map(|a| a.mul(p)).collect(), self.trunc)
    }

    /// Derivative in the base variable `tau` (order preserved).
    pub fn derive_t(&self) -> WSeries {
        WSeries::new(self.coeffs.iter().map(TPoly::derive).collect(), self.trunc)
    }

    /// Bare `d/dw` derivative; certified order drops by one.
    pub fn derive_w(&self) -> WSeries {
        if self.trunc == 0 {
            return WSeries::zero(0);
        }
        let mut out = Vec::with_capacity(self.trunc);
        for n in 1..=self.trunc {
            out.push(self.coeffs[n].scale(&rint(n as i64)));
        }
        WSeries::new(out, self.trunc - 1)
    }

    /// The Euler combination `s * d/dw`, i.e. `s^n -> n s^n`.  Exact at every
    /// stored order, so the certified order is preserved.
    pub fn s_dw(&self) -> WSeries {
        let out = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c.scale(&rint(n as i64)))
            .collect();
        WSeries::new(out, self.trunc)
    }

    /// Multiplicative inverse.  Requires the `s^0` coefficient to be a
    /// nonzero rational constant (so the inverse stays polynomial in `tau`).
    pub fn invert(&self) -> Result<WSeries, super::SeriesError> {
        let lead = &self.coeffs[0];
        if lead.degree().is_none_or(|d| d > 0) {
            return Err(super::SeriesError::NotAUnit);
        }
        let c0 = lead.coeff(0);
        debug_assert!(!c0.is_zero());
        let c0_inv = Rat::from_integer(1.into()) / c0;
        let mut out = vec![TPoly::zero(); self.trunc + 1];
        out[0] = TPoly::constant(c0_inv.clone());
        for n in 1..=self.trunc {
            let mut acc = TPoly::zero();
            for (j, o) in out.iter().enumerate().take(n) {
                acc = acc.add(&o.mul(&self.coeffs[n - j]));
            }
            out[n] = acc.neg().scale(&c0_inv);
        }
        Ok(WSeries::new(out, self.trunc))
    }

    /// The polynomial `w = 1/4 + s`.
    pub fn w_poly(trunc: usize) -> WSeries {
        WSeries::new(vec![TPoly::constant(rat(1, 4)), TPoly::constant(rint(1))], trunc)
    }

    /// The polynomial `w^2 = 1/16 + s/2 + s^2`.
    pub fn w2_poly(trunc: usize) -> WSeries {
        WSeries::new(
            vec![
                TPoly::constant(rat(1, 16)),
                TPoly::constant(rat(1, 2)),
                TPoly::constant(rint(1)),
            ],
            trunc,
        )
    }

    /// Expansion of `1/w` about `w = 1/4`: coefficients `4 * (-4)^n`.
    pub fn inv_w(trunc: usize) -> WSeries {
        let mut out = Vec::with_capacity(trunc + 1);
        let mut c = rint(4);
        for _ in 0..=trunc {
            out.push(TPoly::constant(c.clone()));
            c *= rint(-4);
        }
        WSeries::new(out, trunc)
    }

    /// Expansion of `2/w - 6`, the `d/dv` weight of the flow derivative.
    pub fn two_over_w_minus_six(trunc: usize) -> WSeries {
        WSeries::inv_w(trunc)
            .scale(&rint(2))
            .sub(&WSeries::constant_rat(rint(6), trunc))
    }

    /// Exact evaluation at a complex-rational `s`.
    pub fn eval_cx(&self, tau: &crate::rat::CxRat, s: &crate::rat::CxRat) -> crate::rat::CxRat {
        let mut acc = crate::rat::CxRat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(s).add(&c.eval_cx(tau));
        }
        acc
    }

    pub fn eval_f64(&self, tau: Complex64, s: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * s + c.eval_f64(tau);
        }
        acc
    }
}
