//! Algebraic laws of the exact series types, checked on random inputs.

use proptest::prelude::*;
use p1nf::rat::{format_rat, parse_rat, rat, CxRat, Rat};
use p1nf::series::{TPoly, VSeries, WSeries};

fn arb_rat() -> impl Strategy<Value = Rat> {
    (-200i64..=200, 1i64..=40).prop_map(|(p, q)| rat(p, q))
}

fn arb_tpoly(max_deg: usize) -> impl Strategy<Value = TPoly> {
    prop::collection::vec(arb_rat(), 0..=max_deg).prop_map(TPoly::new)
}

fn arb_wseries(trunc: usize) -> impl Strategy<Value = WSeries> {
    prop::collection::vec(arb_tpoly(3), 1..=trunc + 1).prop_map(move |cs| {
        let mut w = WSeries::zero(trunc);
        for (n, p) in cs.into_iter().enumerate() {
            w.set_coeff(n, p);
        }
        w
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_parse_format_roundtrip(p in -10_000i64..=10_000, q in 1i64..=9_999) {
        let r = rat(p, q);
        prop_assert_eq!(parse_rat(&format_rat(&r)).unwrap(), r);
    }

    #[test]
    fn tpoly_ring_laws(a in arb_tpoly(5), b in arb_tpoly(5), c in arb_tpoly(5)) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
    }

    #[test]
    fn tpoly_derivation_is_leibniz(a in arb_tpoly(5), b in arb_tpoly(5)) {
        let lhs = a.mul(&b).derive();
        let rhs = a.derive().mul(&b).add(&a.mul(&b.derive()));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn tpoly_shift_composes_with_eval(a in arb_tpoly(4), h in arb_rat(), x in -30i64..=30) {
        // (shift by h, then evaluate at x) == evaluate at x + h.
        let xr = Rat::from_integer(x.into());
        let direct = a.shift(&h).eval_cx(&CxRat::from_rat(xr.clone()));
        let composed = a.eval_cx(&CxRat::from_rat(&xr + &h));
        prop_assert_eq!(direct, composed);
    }

    #[test]
    fn wseries_mul_commutes_and_distributes(
        a in arb_wseries(5), b in arb_wseries(5), c in arb_wseries(5),
    ) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
    }

    #[test]
    fn wseries_invert_is_reciprocal(a in arb_wseries(5)) {
        // Inversion needs a unit at s^0, so pin that slot.
        let mut u = a;
        u.set_coeff(0, TPoly::constant(rat(3, 2)));
        let inv = u.invert().unwrap();
        prop_assert_eq!(u.mul(&inv), WSeries::constant_rat(rat(1, 1), 5));
    }

    #[test]
    fn wseries_euler_weight_is_derivation(a in arb_wseries(5), b in arb_wseries(5)) {
        // s d/ds obeys the product rule.
        let lhs = a.mul(&b).s_dw();
        let rhs = a.s_dw().mul(&b).add(&a.mul(&b.s_dw()));
        prop_assert_eq!(lhs, rhs);
    }
}

/// Equality on the jointly certified part: products sharpen the carried
/// `s`-order from valuations, so two routes to the same series can differ
/// in bookkeeping while agreeing on every common coefficient.
fn same_certified(a: &VSeries, b: &VSeries) -> bool {
    let keys: std::collections::BTreeSet<usize> = a
        .iter()
        .map(|(k, _)| k)
        .chain(b.iter().map(|(k, _)| k))
        .collect();
    for k in keys {
        let za = WSeries::zero(0);
        let zb = WSeries::zero(0);
        let wa = a.coeff(k).unwrap_or(&za);
        let wb = b.coeff(k).unwrap_or(&zb);
        let n_common = wa.trunc().min(wb.trunc());
        for n in 0..=n_common {
            if wa.coeff(n) != wb.coeff(n) {
                return false;
            }
        }
    }
    true
}

fn arb_vseries(k_max: usize, trunc: usize) -> impl Strategy<Value = VSeries> {
    prop::collection::btree_map(0..=k_max, arb_wseries(trunc), 0..=3).prop_map(move |m| {
        let mut v = VSeries::zero(k_max);
        for (k, w) in m {
            v.set_coeff(k, w);
        }
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn vseries_mul_commutes(a in arb_vseries(6, 3), b in arb_vseries(6, 3)) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
    }

    #[test]
    fn vseries_derivatives_are_leibniz(a in arb_vseries(5, 3), b in arb_vseries(5, 3)) {
        let prod = a.mul(&b);
        prop_assert!(same_certified(
            &prod.derive_t(),
            &a.derive_t().mul(&b).add(&a.mul(&b.derive_t()))
        ));
        prop_assert!(same_certified(
            &prod.derive_w(),
            &a.derive_w().mul(&b).add(&a.mul(&b.derive_w()))
        ));
    }

    #[test]
    fn vseries_invert_is_reciprocal(a in arb_vseries(5, 3)) {
        let mut u = a;
        let unit = {
            let mut w = WSeries::constant_rat(rat(2, 1), 3);
            w.set_coeff(1, TPoly::constant(rat(1, 3)));
            w
        };
        u.set_coeff(0, unit);
        let inv = u.invert().unwrap();
        let one = {
            let mut v = VSeries::zero(5);
            v.set_coeff(0, WSeries::constant_rat(rat(1, 1), 3));
            v
        };
        prop_assert_eq!(u.mul(&inv), one);
    }
}
