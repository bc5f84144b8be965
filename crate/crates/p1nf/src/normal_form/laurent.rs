//! Classical pole-expansion compatibility test: a cross-check on the
//! resonance analysis that shares no code with the series recurrence.
//!
//! Substituting `y = sum_{j>=0} a_j z^{j-2}`, `z = x - x0`, into
//! `y'' = 6y^2 + f(x0 + z)` and matching orders gives
//!
//! `(j - 6)(j + 1) a_j = 6 sum_{0<i<j} a_i a_{j-i} + [z^{j-4}] f(x0 + z)`
//!
//! with `a_0 = 1`.  The divisor vanishes at `j = 6`; the right side there
//! must vanish for a pure power expansion to exist, and equals
//! `f''(x0)/2`.  Coefficients are kept as exact polynomials in the pole
//! location `x0`.

use super::forcing::Forcing;
use crate::rat::{rat, Rat};
use crate::series::TPoly;

#[derive(Debug, Clone)]
pub struct CompatibilityReport {
    /// `a_0 ..= a_J` as polynomials in the pole location; `a_6` is set to
    /// zero (it is the free parameter of the family).
    pub laurent_coeffs: Vec<TPoly>,
    /// Right side of the `j = 6` equation; must vanish identically.
    pub resonance_residual: TPoly,
    pub passes: bool,
}

pub fn painleve_test(forcing: &Forcing, j_max: usize) -> CompatibilityReport {
    assert!(j_max >= 6, "the compatibility condition sits at j = 6");
    // [z^m] f(x0 + z) = f^(m)(x0) / m! as a polynomial in x0.
    let mut fshift: Vec<TPoly> = Vec::new();
    {
        let mut d = forcing.to_tpoly();
        let mut mfact = Rat::from_integer(1.into());
        let mut m = 0i64;
        while !d.is_zero() {
            if m > 0 {
                mfact *= Rat::from_integer(m.into());
            }
            fshift.push(d.scale(&(Rat::from_integer(1.into()) / mfact.clone())));
            d = d.derive();
            m += 1;
        }
    }
    let fcoef = |m: i64| -> TPoly {
        if m < 0 || m as usize >= fshift.len() {
            TPoly::zero()
        } else {
            fshift[m as usize].clone()
        }
    };

    let mut a: Vec<TPoly> = vec![TPoly::constant(Rat::from_integer(1.into()))];
    let mut residual = TPoly::zero();
    for j in 1..=j_max {
        let mut rhs = TPoly::zero();
        for i in 1..j {
            rhs = rhs.add(&a[i].mul(&a[j - i]));
        }
        rhs = rhs.scale(&Rat::from_integer(6.into()));
        rhs = rhs.add(&fcoef(j as i64 - 4));
        let d = (j as i64 - 6) * (j as i64 + 1);
        if d == 0 {
            residual = rhs;
            a.push(TPoly::zero());
        } else {
            a.push(rhs.scale(&rat(1, d)));
        }
    }
    let passes = residual.is_zero();
    CompatibilityReport {
        laurent_coeffs: a,
        resonance_residual: residual,
        passes,
    }
}
