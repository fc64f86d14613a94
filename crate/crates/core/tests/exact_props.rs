use metastab_core::{ceil_log2, omega, Natural, Rational};
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-500i64..=500, 1i64..=300).prop_map(|(n, d)| Rational::frac(n, d))
}

proptest! {
    #[test]
    fn omega_contract(n in 1i64..=40, d in 1i64..=400, p in 1u64..=50) {
        // eps in (0, 1]
        let (n, d) = if n > d { (d, n) } else { (n, d) };
        let eps = Rational::frac(n, d);
        let w = omega(&eps, &Natural::from(p)).unwrap();
        prop_assert!(w >= Natural::from(p));
        let base = Rational::one() - Rational::from_u64(p).recip().unwrap();
        let l: u64 = w.try_into().unwrap();
        prop_assert!(base.pow(l) <= eps);
        prop_assert!(base.pow(l + 1) <= eps);
    }

    #[test]
    fn omega_large_eps_keeps_p(n in 1i64..=1000, p in 1u64..=50) {
        let eps = Rational::from_u64(1) + Rational::frac(n, 7);
        prop_assert_eq!(omega(&eps, &Natural::from(p)).unwrap(), Natural::from(p));
    }

    #[test]
    fn ceil_log2_is_tight(n in 1i64..=100_000, d in 1i64..=100_000) {
        let q = Rational::frac(n, d);
        let k = ceil_log2(&q).unwrap();
        let two = Rational::from_u64(2);
        let pow = |e: i64| if e >= 0 { two.pow(e as u64) } else { two.pow((-e) as u64).recip().unwrap() };
        prop_assert!(q <= pow(k));
        prop_assert!(q > pow(k - 1));
    }

    #[test]
    fn rational_text_round_trip(q in rational()) {
        let text = format!("{q}");
        prop_assert_eq!(text.parse::<Rational>().unwrap(), q);
    }
}

#[test]
fn rejected_text() {
    for bad in ["", "1/0", "a/b", "1/-2", "1//2", "1.5"] {
        assert!(bad.parse::<Rational>().is_err(), "{bad}");
    }
    assert_eq!("-6/4".parse::<Rational>().unwrap(), Rational::frac(-3, 2));
}
