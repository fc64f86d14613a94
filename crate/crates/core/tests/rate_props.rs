use metastab_core::metastability::{
    least_metastable_n, least_metastable_n_with, GapFunction, SearchOptions, WindowPredicate,
};
use metastab_core::rate::{
    abel_rate, gamma_bound, monotone_metastability_bound, tauber_rate, ResourceLimits,
    SearchFunctional,
};
use metastab_core::{CoefficientSequence, Natural, PointFamily, Rational};
use proptest::prelude::*;

fn closed_form_sequence() -> impl Strategy<Value = CoefficientSequence> {
    prop_oneof![
        prop::collection::vec((-4i64..=4, 1i64..=4), 1..6).prop_map(|v| {
            CoefficientSequence::finite(v.into_iter().map(|(n, d)| Rational::frac(n, d)).collect())
        }),
        prop::sample::select(vec![(1, 2), (-1, 2), (1, 3), (1, 4)])
            .prop_map(|(n, d)| CoefficientSequence::geometric(Rational::frac(n, d))),
    ]
}

fn small_gap() -> impl Strategy<Value = GapFunction> {
    prop_oneof![
        (0u64..4).prop_map(GapFunction::constant),
        (1u64..3, 0u64..3).prop_map(|(a, b)| GapFunction::linear(a, b)),
    ]
}

fn eps() -> impl Strategy<Value = Rational> {
    prop::sample::select(vec![
        Rational::frac(1, 2),
        Rational::one(),
        Rational::from_u64(2),
    ])
}

fn positive_or_one(q: Option<&Rational>) -> Rational {
    match q {
        Some(q) if q.is_positive() => q.clone(),
        _ => Rational::one(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn abel_rate_end_to_end(seq in closed_form_sequence(), g in small_gap(), eps in eps()) {
        let l = positive_or_one(seq.partial_sum_bound());
        let r = abel_rate(&eps, &g, &l, &PointFamily::V, &SearchFunctional::partial_sums(seq), 100_000).unwrap();
        prop_assert!(r.verdict.premise.holds && r.verdict.conclusion.holds);
        prop_assert_eq!(r.bundle.window().lo, r.n);
        prop_assert!(r.bundle.audit(&g).is_ok());
        prop_assert_eq!(&r.bundle.f_n1, &Natural::from(r.bundle.n + r.bundle.g_n).max(r.bundle.l.clone()));
        prop_assert_eq!(r.bundle.h_n1_n2, r.bundle.n + r.bundle.g_n);
    }

    #[test]
    fn tauber_rate_end_to_end(seq in closed_form_sequence(), g in small_gap(), eps in eps()) {
        let l = positive_or_one(seq.coeff_bound());
        let meta = SearchFunctional::f_values(seq.clone(), PointFamily::V);
        let r = tauber_rate(&eps, &g, &l, &seq, &meta, 100_000).unwrap();
        prop_assert!(r.verdict.premise.holds && r.verdict.conclusion.holds);
        prop_assert!(r.bundle.audit(&g).is_ok());
        prop_assert_eq!(r.bundle.h_n1_n2, r.bundle.n + r.bundle.g_n);
    }
}

fn monotone_sequence() -> impl Strategy<Value = (CoefficientSequence, Rational)> {
    prop_oneof![
        prop::collection::vec((0i64..=5, 1i64..=6), 1..15).prop_map(|v| {
            let values: Vec<Rational> = v.into_iter().map(|(n, d)| Rational::frac(n, d)).collect();
            let spread = values
                .iter()
                .skip(1)
                .fold(Rational::zero(), |acc, a| acc + a);
            (CoefficientSequence::finite(values), spread)
        }),
        prop::sample::select(vec![(1, 2), (2, 3), (3, 4), (1, 5)]).prop_map(|(n, d)| {
            let r = Rational::frac(n, d);
            // increments r^i for i >= 1 sum to r / (1 - r)
            let spread = &r / (Rational::one() - &r);
            (CoefficientSequence::geometric(r), spread)
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn monotone_bound_dominates_the_oracle((seq, spread) in monotone_sequence(), g in small_gap(), k in 1i64..=30) {
        let eps = Rational::frac(1, k);
        let l = if spread.is_positive() { spread } else { Rational::one() };
        let bound = monotone_metastability_bound(&eps, |n| Ok(n + g.eval_big(n)?), &l, &ResourceLimits::default());
        let bound = match bound {
            Ok(b) => b,
            Err(e) => { prop_assert!(e.is_exhaustion()); return Ok(()); }
        };
        let cap: u64 = bound.clone().min(Natural::from(5000u32)).try_into().unwrap();
        let pred = WindowPredicate::cauchy_partial_sums(seq, eps);
        let found = least_metastable_n(&pred, &g, cap).unwrap().found();
        prop_assert!(found.is_some(), "no N <= {}", cap);
        prop_assert!(Natural::from(found.unwrap()) <= bound);
    }
}

#[test]
fn gamma_dominates_the_oracle_on_positive_series() {
    let limits = ResourceLimits::default();
    let sequences = [
        CoefficientSequence::geometric(Rational::frac(1, 2)),
        CoefficientSequence::geometric(Rational::frac(1, 3)),
        CoefficientSequence::finite(vec![
            Rational::frac(1, 2),
            Rational::frac(1, 4),
            Rational::frac(1, 8),
        ]),
        CoefficientSequence::finite(vec![
            Rational::zero(),
            Rational::frac(3, 4),
            Rational::zero(),
            Rational::frac(1, 4),
        ]),
    ];
    for seq in &sequences {
        let l = seq.partial_sum_bound().unwrap().clone();
        for eps in [
            &l * Rational::from_u64(4),
            &l * Rational::from_u64(2),
            &l * Rational::frac(3, 2),
        ] {
            for g in [
                GapFunction::constant(0),
                GapFunction::constant(2),
                GapFunction::linear(1, 1),
            ] {
                let gamma = gamma_bound(&eps, &g, &l, &limits).unwrap().gamma;
                let pred = WindowPredicate::joint_abel(seq.clone(), eps.clone(), PointFamily::V);
                let found =
                    least_metastable_n_with(&pred, &g, SearchOptions::offset(1000).starting_at(1))
                        .unwrap()
                        .found()
                        .unwrap();
                assert!(
                    Natural::from(found) <= gamma,
                    "{} eps={eps} g={g}",
                    seq.label()
                );
            }
        }
    }
}

#[test]
fn gamma_is_monotone_in_the_gap() {
    let limits = ResourceLimits::default();
    let l = Rational::one();
    for eps in [
        Rational::from_u64(4),
        Rational::from_u64(2),
        Rational::one(),
    ] {
        for (small, large) in [
            (GapFunction::constant(0), GapFunction::constant(3)),
            (GapFunction::linear(1, 0), GapFunction::linear(2, 1)),
            (
                GapFunction::constant(5),
                GapFunction::max(GapFunction::constant(5), GapFunction::identity()),
            ),
        ] {
            let a = gamma_bound(&eps, &small, &l, &limits).unwrap();
            let b = gamma_bound(&eps, &large, &l, &limits).unwrap();
            assert!(a.gamma <= b.gamma, "eps={eps} {small} vs {large}");
        }
    }
}
