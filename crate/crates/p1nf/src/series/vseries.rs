//! Truncated power series in the chart variable `v`, with `WSeries`
//! coefficients (so overall: polynomials in `tau`, series in `s = w - 1/4`
//! and `v`).
//!
//! Storage is sparse because the objects of interest have large `v`-adic
//! gaps (the map correction starts at `v^5`).  `trunc` is the certified
//! `v`-order; each coefficient carries its own certified `s`-order.
//!
//! The flow derivative
//!
//! `L = d/dt + (2/w - 6) d/dv + (12/v)(w - 1/4) d/dw`
//!
//! acts on series whose `v^0` coefficient does not depend on `w`; the
//! `1/v` term then produces no negative powers.  `apply_l` enforces this.

use std::collections::BTreeMap;

use super::tpoly::TPoly;
use super::wseries::WSeries;
use super::SeriesError;
use crate::rat::{CxRat, Rat};
use num_complex::Complex64;
use num_traits::One;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VSeries {
    coeffs: BTreeMap<usize, WSeries>,
    trunc: usize,
}

impl VSeries {
    pub fn zero(trunc: usize) -> Self {
        VSeries { coeffs: BTreeMap::new(), trunc }
    }

    /// A series constant in `v`.
    pub fn constant(c: WSeries, trunc: usize) -> Self {
        VSeries::monomial(0, c, trunc)
    }

    /// `c * v^k`.
    pub fn monomial(k: usize, c: WSeries, trunc: usize) -> Self {
        let mut coeffs = BTreeMap::new();
        if k <= trunc && !c.is_zero() {
            coeffs.insert(k, c);
        }
        VSeries { coeffs, trunc }
    }

    pub fn from_coeffs(entries: Vec<(usize, WSeries)>, trunc: usize) -> Self {
        let mut out = VSeries::zero(trunc);
        for (k, c) in entries {
            out.set_coeff(k, c);
        }
        out
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn coeff(&self, k: usize) -> Option<&WSeries> {
        assert!(k <= self.trunc, "coefficient beyond certified v-order");
        self.coeffs.get(&k)
    }

    /// Coefficient of `v^k`, materialized with the given `s`-order if absent.
    pub fn coeff_or_zero(&self, k: usize, wtrunc: usize) -> WSeries {
        match self.coeff(k) {
            Some(c) => c.clone(),
            None => WSeries::zero(wtrunc),
        }
    }

    pub fn set_coeff(&mut self, k: usize, c: WSeries) {
        assert!(k <= self.trunc, "coefficient beyond certified v-order");
        if c.is_zero() {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, c);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &WSeries)> {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `v`-adic valuation of the stored coefficients; `trunc + 1` when zero.
    pub fn val(&self) -> usize {
        self.coeffs.keys().next().copied().unwrap_or(self.trunc + 1)
    }

    pub fn truncate(&self, to: usize) -> VSeries {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(k, _)| **k <= to)
            .map(|(k, c)| (*k, c.clone()))
            .collect();
        VSeries { coeffs, trunc: to.min(self.trunc) }
    }

    pub fn add(&self, o: &VSeries) -> VSeries {
        let trunc = self.trunc.min(o.trunc);
        let mut out = VSeries::zero(trunc);
        for (k, c) in self.coeffs.iter().chain(o.coeffs.iter()) {
            if *k > trunc {
                continue;
            }
            let merged = match out.coeffs.get(k) {
                Some(prev) => prev.add(c),
                None => c.clone(),
            };
            out.set_coeff(*k, merged);
        }
        out
    }

    pub fn sub(&self, o: &VSeries) -> VSeries {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> VSeries {
        VSeries {
            coeffs: self.coeffs.iter().map(|(k, c)| (*k, c.neg())).collect(),
            trunc: self.trunc,
        }
    }

    pub fn mul(&self, o: &VSeries) -> VSeries {
        let trunc = (self.trunc + o.val()).min(o.trunc + self.val());
        let mut out = VSeries::zero(trunc);
        for (i, a) in &self.coeffs {
            for (j, b) in &o.coeffs {
                let k = i + j;
                if k > trunc {
                    continue;
                }
                let term = a.mul(b);
                let merged = match out.coeffs.get(&k) {
                    Some(prev) => prev.add(&term),
                    None => term,
                };
                out.set_coeff(k, merged);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> VSeries {
        VSeries {
            coeffs: self.coeffs.iter().map(|(k, a)| (*k, a.scale(c))).collect(),
            trunc: self.trunc,
        }
    }

    /// Multiply every coefficient by the same `w`-series, expanded at each
    /// coefficient's own certified order so no order is lost when the
    /// multiplier is a unit in `s`.
    pub fn scale_w(&self, f: impl Fn(usize) -> WSeries) -> VSeries {
        let mut out = VSeries::zero(self.trunc);
        for (k, a) in &self.coeffs {
            out.set_coeff(*k, a.mul(&f(a.trunc())));
        }
        out
    }

    /// Multiply by `v^p` (certified order rises with the shift).
    pub fn mul_v_pow(&self, p: usize) -> VSeries {
        VSeries {
            coeffs: self.coeffs.iter().map(|(k, c)| (k + p, c.clone())).collect(),
            trunc: self.trunc + p,
        }
    }

    /// Divide by `v^p`; every nonzero coefficient must sit at order >= p.
    pub fn div_v_pow(&self, p: usize) -> Result<VSeries, SeriesError> {
        if self.val() < p {
            return Err(SeriesError::NegativePower);
        }
        Ok(VSeries {
            coeffs: self.coeffs.iter().map(|(k, c)| (k - p, c.clone())).collect(),
            trunc: self.trunc - p,
        })
    }

    /// Derivative in `tau`.
    pub fn derive_t(&self) -> VSeries {
        let mut out = VSeries::zero(self.trunc);
        for (k, c) in &self.coeffs {
            out.set_coeff(*k, c.derive_t());
        }
        out
    }

    /// Derivative in `w` (equivalently in `s`); `s`-order of every
    /// coefficient drops by one.
    pub fn derive_w(&self) -> VSeries {
        let mut out = VSeries::zero(self.trunc);
        for (k, c) in &self.coeffs {
            out.set_coeff(*k, c.derive_w());
        }
        out
    }

    /// Derivative in `v`; certified order drops by one.
    pub fn derive_v(&self) -> VSeries {
        if self.trunc == 0 {
            return VSeries::zero(0);
        }
        let mut out = VSeries::zero(self.trunc - 1);
        for (k, c) in &self.coeffs {
            if *k == 0 {
                continue;
            }
            out.set_coeff(k - 1, c.scale(&Rat::from_integer((*k as i64).into())));
        }
        out
    }

    /// The flow derivative `L`.  Fails if the `v^0` coefficient depends on
    /// `w` (the `(12/v)(w - 1/4) d/dw` term would leave the ring).
    pub fn apply_l(&self) -> Result<VSeries, SeriesError> {
        if let Some(c0) = self.coeffs.get(&0) {
            if !c0.s_dw().is_zero() {
                return Err(SeriesError::NegativePower);
            }
        }
        if self.trunc == 0 {
            return Ok(VSeries::zero(0));
        }
        let trunc = self.trunc - 1;
        let mut out = self.derive_t().truncate(trunc);
        // (2/w - 6) dA/dv
        let dv = self.derive_v().scale_w(WSeries::two_over_w_minus_six);
        out = out.add(&dv);
        // (12/v)(w - 1/4) dA/dw = 12 v^{k-1} * (s d/ds applied per coefficient)
        let twelve = Rat::from_integer(12.into());
        for (k, c) in &self.coeffs {
            if *k == 0 || *k - 1 > trunc {
                continue;
            }
            let e = c.s_dw().scale(&twelve);
            if e.is_zero() {
                continue;
            }
            let merged = match out.coeffs.get(&(k - 1)) {
                Some(prev) => prev.add(&e),
                None => e.truncate(trunc.saturating_sub(0)),
            };
            out.set_coeff(k - 1, merged);
        }
        Ok(out)
    }

    /// Multiplicative inverse; requires a `v^0` coefficient that is a unit
    /// as a `w`-series.
    pub fn invert(&self) -> Result<VSeries, SeriesError> {
        let b0 = self.coeffs.get(&0).ok_or(SeriesError::NotAUnit)?;
        let c0 = b0.invert()?;
        let mut out = VSeries::zero(self.trunc);
        out.set_coeff(0, c0.clone());
        for n in 1..=self.trunc {
            let mut acc: Option<WSeries> = None;
            for (j, bj) in self.coeffs.range(1..=n) {
                if let Some(cnj) = out.coeffs.get(&(n - j)) {
                    let term = bj.mul(cnj);
                    acc = Some(match acc {
                        Some(a) => a.add(&term),
                        None => term,
                    });
                }
            }
            if let Some(a) = acc {
                out.set_coeff(n, a.mul(&c0).neg());
            }
        }
        Ok(out)
    }

    pub fn divide(&self, o: &VSeries) -> Result<VSeries, SeriesError> {
        Ok(self.mul(&o.invert()?))
    }

    /// Substitute `x = tau + delta` into the polynomial `f(x)`:
    /// `f(tau + delta) = sum_m f^(m)(tau)/m! * delta^m`.  Requires
    /// `val(delta) >= 1` so the sum is finite at any truncation; `wtrunc`
    /// sets the `s`-order of the constant `m = 0` term (products with the
    /// delta powers tighten higher terms on their own).
    pub fn compose_shifted(f: &TPoly, delta: &VSeries, wtrunc: usize) -> Result<VSeries, SeriesError> {
        if !delta.is_zero() && delta.val() == 0 {
            return Err(SeriesError::CompositionNeedsValuation);
        }
        let trunc = delta.trunc;
        let mut out = VSeries::zero(trunc);
        let mut deriv = f.clone();
        let mut factorial = Rat::one();
        let mut power = VSeries::constant(WSeries::constant_rat(Rat::one(), wtrunc), trunc);
        let mut m: usize = 0;
        loop {
            if deriv.is_zero() {
                break;
            }
            if m > 0 {
                factorial *= Rat::from_integer((m as i64).into());
            }
            let coeff_poly = deriv.scale(&(Rat::one() / factorial.clone()));
            let term = power.scale_w(|wt| WSeries::constant(coeff_poly.clone(), wt));
            out = out.add(&term);
            if delta.is_zero() || (m + 1) * delta.val() > trunc {
                break;
            }
            power = power.mul(delta);
            deriv = deriv.derive();
            m += 1;
        }
        Ok(out)
    }

    /// Exact evaluation at complex-rational `(tau, s, v)`.
    pub fn eval_cx(&self, tau: &CxRat, s: &CxRat, v: &CxRat) -> CxRat {
        let top = match self.coeffs.keys().next_back() {
            Some(k) => *k,
            None => return CxRat::zero(),
        };
        let mut acc = CxRat::zero();
        for k in (0..=top).rev() {
            acc = acc.mul(v);
            if let Some(c) = self.coeffs.get(&k) {
                acc = acc.add(&c.eval_cx(tau, s));
            }
        }
        acc
    }

    pub fn eval_f64(&self, tau: Complex64, s: Complex64, v: Complex64) -> Complex64 {
        let top = match self.coeffs.keys().next_back() {
            Some(k) => *k,
            None => return Complex64::new(0.0, 0.0),
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (0..=top).rev() {
            acc *= v;
            if let Some(c) = self.coeffs.get(&k) {
                acc += c.eval_f64(tau, s);
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rint};

    fn w_const(c: Rat, wt: usize) -> WSeries {
        WSeries::constant_rat(c, wt)
    }

    #[test]
    fn mul_sharp_truncation() {
        // a = v^5 * 1 certified through v^8; b = 1 certified through v^3.
        let a = VSeries::monomial(5, w_const(rint(1), 4), 8);
        let b = VSeries::constant(w_const(rint(2), 4), 3);
        let p = a.mul(&b);
        // min(8 + 0, 3 + 5) = 8
        assert_eq!(p.trunc(), 8);
        assert_eq!(p.coeff(5).unwrap(), &w_const(rint(2), 4));
    }

    #[test]
    fn apply_l_on_t_plus_monomial() {
        // A = t + c v^5 with c constant: LA = 1 + (2/w - 6) * 5 c v^4.
        let a = VSeries::from_coeffs(
            vec![
                (0, WSeries::constant(TPoly::tau(), 6)),
                (5, w_const(rint(3), 6)),
            ],
            9,
        );
        let la = a.apply_l().unwrap();
        assert_eq!(la.trunc(), 8);
        assert_eq!(la.coeff(0).unwrap(), &w_const(rint(1), 6));
        let expect = WSeries::two_over_w_minus_six(6).scale(&rint(15));
        assert_eq!(la.coeff(4).unwrap(), &expect);
    }

    #[test]
    fn apply_l_euler_term() {
        // A = s v: the w-derivative term contributes 12 s at v^0.
        let a = VSeries::monomial(1, WSeries::monomial(1, TPoly::constant(rint(1)), 5), 4);
        let la = a.apply_l().unwrap();
        // d/dv term: (2/w - 6) * s ; euler term: 12 s  => coefficient of v^0.
        let expect = WSeries::two_over_w_minus_six(5)
            .mul(&WSeries::monomial(1, TPoly::constant(rint(1)), 5))
            .add(&WSeries::monomial(1, TPoly::constant(rint(12)), 5));
        assert_eq!(la.coeff(0).unwrap(), &expect);
    }

    #[test]
    fn apply_l_rejects_w_dependent_constant_term() {
        let a = VSeries::constant(WSeries::monomial(1, TPoly::constant(rint(1)), 3), 4);
        assert!(a.apply_l().is_err());
    }

    #[test]
    fn invert_roundtrip() {
        let one = VSeries::constant(w_const(rint(1), 5), 6);
        let g = one.add(&VSeries::monomial(2, WSeries::w_poly(5), 6));
        let inv = g.invert().unwrap();
        let p = g.mul(&inv);
        assert_eq!(p.coeff(0).unwrap(), &w_const(rint(1), 5));
        for k in 1..=p.trunc() {
            assert!(p.coeff(k).is_none(), "nonzero coefficient at v^{k}");
        }
    }

    #[test]
    fn compose_shift_quadratic() {
        // f(x) = x^2, delta = 2 v^3  =>  f(t + delta) = t^2 + 4 t v^3 + 4 v^6.
        let f = TPoly::tau().mul(&TPoly::tau());
        let delta = VSeries::monomial(3, w_const(rint(2), 4), 8);
        let g = VSeries::compose_shifted(&f, &delta, 4).unwrap();
        assert_eq!(g.coeff(0).unwrap(), &WSeries::constant(TPoly::tau().mul(&TPoly::tau()), 4));
        assert_eq!(g.coeff(3).unwrap(), &WSeries::constant(TPoly::tau().scale(&rint(4)), 4));
        assert_eq!(g.coeff(6).unwrap(), &w_const(rint(4), 4));
    }

    #[test]
    fn eval_matches_structure() {
        let a = VSeries::from_coeffs(
            vec![
                (0, WSeries::constant(TPoly::tau(), 2)),
                (2, WSeries::monomial(1, TPoly::constant(rint(3)), 2)),
            ],
            4,
        );
        // t + 3 s v^2 at t=1/2, s=1/3, v=2 -> 1/2 + 3*(1/3)*4 = 9/2
        let got = a.eval_cx(
            &CxRat::from_rat(rat(1, 2)),
            &CxRat::from_rat(rat(1, 3)),
            &CxRat::from_rat(rint(2)),
        );
        assert_eq!(got, CxRat::from_rat(rat(9, 2)));
    }
}
