//! Exactness batteries for the exponent calculus: the diagonal
//! identities, s-continuity, and the comparator algebra.

use bloomlab_core::bounds::{
    approx, compare_bounds, form_exponents, incomparability_region, split_descriptor,
    split_verdict, split_verdict_exact, symmetric_descriptor, symmetric_exponent, Comparison,
    Rational, SplitVerdict,
};
use bloomlab_core::{Ext, FormParams};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

#[test]
fn diagonal_identity_grid_is_exact() {
    // On the diagonal with r = 1, s = ∞ the bundle collapses to the
    // symmetric exponent on both sides, as exact rationals.
    for p in [1.1, 1.5, 2.0, 3.0, 8.0] {
        for m in 1..=5u32 {
            let params = FormParams::new(1.0, Ext::Inf, p, p, m).unwrap();
            let bundle = form_exponents(&params).unwrap();
            let target = symmetric_exponent(p, m).unwrap();
            assert_eq!(bundle.beta_mu1, target, "p={p} m={m}");
            assert_eq!(
                &bundle.beta_lambda1 + &bundle.beta_lambda2,
                target,
                "p={p} m={m}"
            );
            if m >= 2 {
                let inv = Rational::one() / (Rational::from_float(p).unwrap() - Rational::one());
                assert_eq!(bundle.beta_mu2.unwrap(), q(m as i64, 1) * inv);
            } else {
                assert!(bundle.beta_mu2.is_none());
            }
        }
    }
}

#[test]
fn bundle_is_continuous_at_s_infinity() {
    for (p, qq, m) in [(2.0, 2.0, 1), (2.0, 4.0, 2), (4.0, 2.0, 2), (3.0, 3.0, 4)] {
        let inf = form_exponents(&FormParams::new(1.0, Ext::Inf, p, qq, m).unwrap()).unwrap();
        let big =
            form_exponents(&FormParams::new(1.0, Ext::Finite(1e6), p, qq, m).unwrap()).unwrap();
        assert!(
            (approx(&inf.beta_lambda2) - approx(&big.beta_lambda2)).abs() < 1e-4,
            "p={p} q={qq} m={m}"
        );
        assert_eq!(inf.beta_mu1, big.beta_mu1);
        assert_eq!(inf.beta_lambda1, big.beta_lambda1);
    }
}

#[test]
fn verdict_transitions_exactly_at_the_region_endpoints() {
    for m in [2u32, 3, 4] {
        let (lo, hi) = incomparability_region(m).unwrap();
        let eps = q(1, 1_000_000_000);
        assert_eq!(
            split_verdict_exact(&(&lo - &eps), m).unwrap(),
            SplitVerdict::ImprovesLambda
        );
        assert_eq!(split_verdict_exact(&lo, m).unwrap(), SplitVerdict::Open);
        assert_eq!(split_verdict_exact(&hi, m).unwrap(), SplitVerdict::Open);
        assert_eq!(
            split_verdict_exact(&(&hi + &eps), m).unwrap(),
            SplitVerdict::ImprovesMu
        );
    }
}

#[test]
fn improvement_shows_up_in_directional_evaluation() {
    // Above the region the split bound wins when only [μ] grows...
    let sym = symmetric_descriptor(3.0, 2).unwrap();
    let split = split_descriptor(3.0, 2).unwrap();
    assert!(split.eval(1.0, 100.0) < sym.eval(1.0, 100.0));
    // ...and loses when only [λ] grows.
    assert!(split.eval(100.0, 1.0) > sym.eval(100.0, 1.0));
    assert_eq!(compare_bounds(&sym, &split), Comparison::Incomparable);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn diagonal_identity_holds_off_grid(p in 1.01f64..10.0, m in 1u32..=5) {
        let params = FormParams::new(1.0, Ext::Inf, p, p, m).unwrap();
        let bundle = form_exponents(&params).unwrap();
        let target = symmetric_exponent(p, m).unwrap();
        prop_assert_eq!(bundle.beta_mu1, target.clone());
        prop_assert_eq!(&bundle.beta_lambda1 + &bundle.beta_lambda2, target);
    }

    #[test]
    fn verdict_is_consistent_with_the_region(p in 1.01f64..6.0, m in 2u32..=5) {
        let (lo, hi) = incomparability_region(m).unwrap();
        let pr = Rational::from_float(p).unwrap();
        let want = if pr > hi {
            SplitVerdict::ImprovesMu
        } else if pr < lo {
            SplitVerdict::ImprovesLambda
        } else {
            SplitVerdict::Open
        };
        prop_assert_eq!(split_verdict(p, m).unwrap(), want);
    }

    #[test]
    fn general_r_bundle_stays_nonnegative(
        p in 1.3f64..6.0,
        rq in 0.05f64..0.9,
        m in 1u32..=4,
        s_fin in proptest::bool::ANY,
    ) {
        // r interpolates between 1 and p so the tuple is admissible.
        let r = 1.0 + rq * (p.min(2.0) - 1.0) * 0.9;
        let s = if s_fin { Ext::Finite(p * 3.0 + m as f64) } else { Ext::Inf };
        let params = FormParams::new(r, s, p, p, m).unwrap();
        let bundle = form_exponents(&params).unwrap();
        prop_assert!(bundle.beta_mu1 > Rational::zero());
        prop_assert!(bundle.beta_lambda1 >= Rational::zero());
        prop_assert!(bundle.beta_lambda2 > Rational::zero());
    }
}
