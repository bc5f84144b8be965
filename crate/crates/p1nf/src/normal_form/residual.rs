//! Independent verification of the defining equation.
//!
//! The recurrence in [`super::solve`] uses per-order formulas; this module
//! substitutes a series directly into
//!
//! `v L(L gamma) + 6 (L gamma) - (6 + w^2 v^4 f(gamma)) (L gamma)^3`
//!
//! using only the generic ring operations, so the two code paths share no
//! order-bookkeeping.  For a correctly solved map the result is the zero
//! series through `v^K`.

use super::solve::NormalFormSeries;
use crate::rat::rint;
use crate::series::{SeriesError, TPoly, VSeries, WSeries};

/// Substitute `gamma` (as `t + Delta`, any truncation) into the left side
/// of the defining equation.  `ftilde` is the forcing already shifted to
/// the series center.
pub fn map_equation_residual(
    gamma: &VSeries,
    ftilde: &TPoly,
    n_order: usize,
) -> Result<VSeries, SeriesError> {
    let lg = gamma.apply_l()?;
    let llg = lg.apply_l()?;
    let cube = lg.mul(&lg).mul(&lg);

    let delta = {
        let mut d = gamma.clone();
        d.set_coeff(0, WSeries::zero(n_order));
        d
    };
    let f_of_gamma = VSeries::compose_shifted(ftilde, &delta, n_order)?;
    let coef = VSeries::constant(WSeries::constant_rat(rint(6), n_order), cube.trunc())
        .add(&f_of_gamma.scale_w(WSeries::w2_poly).mul_v_pow(4));

    Ok(llg
        .mul_v_pow(1)
        .add(&lg.scale(&rint(6)))
        .sub(&coef.mul(&cube)))
}

/// Residual of the fully solved map; zero through `v^{K}` iff the solve is
/// consistent.
pub fn residual_pde(nf: &NormalFormSeries) -> Result<VSeries, SeriesError> {
    map_equation_residual(&nf.gamma, &nf.forcing.shifted(&nf.x0), nf.n_order)
}

/// Residual of the partial sum `t + sum_{p<=k_stop} gamma_p v^p`.  Its
/// `v^k` coefficient for `k = k_stop` equals `-h_k`, which is the
/// cross-check used against the recurrence's explicit formula.
pub fn partial_map_residual(
    coeffs: &std::collections::BTreeMap<usize, WSeries>,
    k_stop: usize,
    ftilde: &TPoly,
    n_order: usize,
) -> Result<VSeries, SeriesError> {
    let mut gamma = VSeries::zero(k_stop);
    gamma.set_coeff(0, WSeries::constant(TPoly::tau(), n_order));
    for (p, gp) in coeffs.range(..=k_stop) {
        gamma.set_coeff(*p, gp.clone());
    }
    map_equation_residual(&gamma, ftilde, n_order)
}

/// `theta * eta^2 - v^2 w`, which must vanish identically (the definition
/// of `theta` as the chart image of `w`).
pub fn theta_eta_identity(nf: &NormalFormSeries) -> VSeries {
    let v2w = VSeries::monomial(2, WSeries::w_poly(nf.n_order), nf.theta.trunc() + 2);
    nf.theta.mul(&nf.eta).mul(&nf.eta).sub(&v2w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal_form::forcing::Forcing;
    use crate::normal_form::solve::{solve_normal_form, SolveParams};
    use crate::rat::rat;

    #[test]
    fn identity_map_residual_is_forcing_term() {
        // gamma = t alone: residual = -w^2 v^4 f(t).
        let mut gamma = VSeries::zero(6);
        gamma.set_coeff(0, WSeries::constant(TPoly::tau(), 3));
        let r = map_equation_residual(&gamma, &TPoly::tau(), 3).unwrap();
        let expect = VSeries::monomial(
            4,
            WSeries::w2_poly(3).scale_poly(&TPoly::tau()).neg(),
            r.trunc(),
        );
        assert_eq!(r, expect);
    }

    #[test]
    fn zero_forcing_identity_map_is_exact() {
        let mut gamma = VSeries::zero(6);
        gamma.set_coeff(0, WSeries::constant(TPoly::tau(), 3));
        let r = map_equation_residual(&gamma, &TPoly::zero(), 3).unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn solved_map_has_zero_residual_small_orders() {
        let nf = solve_normal_form(&SolveParams::p1(8, 4)).unwrap();
        let r = residual_pde(&nf).unwrap();
        assert!(r.is_zero(), "residual nonzero: {r:?}");
        assert!(r.trunc() >= 8);
    }

    #[test]
    fn solved_map_with_shift_and_gauge() {
        let params = SolveParams {
            forcing: Forcing::painleve_one(),
            k_order: 9,
            n_order: 3,
            gauge: rat(2, 7),
            x0: rat(1, 2),
        };
        let nf = solve_normal_form(&params).unwrap();
        assert!(residual_pde(&nf).unwrap().is_zero());
        assert!(theta_eta_identity(&nf).is_zero());
    }
}
