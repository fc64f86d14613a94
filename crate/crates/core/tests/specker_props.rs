use metastab_core::metastability::{least_metastable_n, GapFunction, WindowPredicate};
use metastab_core::specker::{
    check_identity_31, check_identity_32, check_tauber_condition_32, transform_31, BaseSequence,
};
use metastab_core::{CoefficientSequence, Rational};
use proptest::prelude::*;

fn base() -> impl Strategy<Value = BaseSequence> {
    (
        -3i64..=3,
        prop::collection::vec((0i64..=4, 1i64..=9), 1..14),
    )
        .prop_map(|(start, steps)| {
            let mut q = Rational::from(start);
            let mut values = vec![q.clone()];
            for (n, d) in steps {
                q = q + Rational::frac(n, d);
                values.push(q.clone());
            }
            BaseSequence::table(values).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn difference_transform_reproduces_the_base(b in base()) {
        prop_assert!(check_identity_31(&b, 64).unwrap().holds());
    }

    #[test]
    fn spread_transform_identities(b in base()) {
        prop_assert!(check_identity_32(&b, 10).unwrap().holds());
        prop_assert!(check_tauber_condition_32(&b, 200).unwrap().holds());
    }

    #[test]
    fn oracle_sees_the_base_sequence(b in base(), c in 0u64..5, k in 1i64..8) {
        let eps = Rational::frac(1, k);
        let g = GapFunction::linear(1, c);
        let seq = transform_31(&b).unwrap();
        let q = b.clone();
        let direct = CoefficientSequence::from_partial_sums("q", move |n| q.value(n));
        let via = least_metastable_n(&WindowPredicate::cauchy_partial_sums(seq, eps.clone()), &g, 40).unwrap();
        let own = least_metastable_n(&WindowPredicate::cauchy_partial_sums(direct, eps), &g, 40).unwrap();
        prop_assert_eq!(via, own);
    }
}

#[test]
fn named_bases() {
    for b in [
        BaseSequence::dyadic_approach(),
        BaseSequence::rational_approach(),
    ] {
        assert!(check_identity_31(&b, 64).unwrap().holds());
        assert!(check_identity_32(&b, 10).unwrap().holds());
        assert!(check_tauber_condition_32(&b, 200).unwrap().holds());
    }
}
