use alloc::vec::Vec;

use super::gap::GapFunction;
use super::predicate::{WindowEvaluator, WindowPredicate};
use super::window::{Window, WindowConvention};
use crate::error::Result;

/// Result of a bounded least-`N` search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    Found {
        n: u64,
        window: Window,
        checked: u64,
    },
    NotFoundBelowCap {
        cap: u64,
    },
}

impl SearchOutcome {
    pub fn found(&self) -> Option<u64> {
        match self {
            SearchOutcome::Found { n, .. } => Some(*n),
            SearchOutcome::NotFoundBelowCap { .. } => None,
        }
    }
}

/// Where a search starts, where it stops and which window `g` describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    pub convention: WindowConvention,
    pub from: u64,
    pub cap: u64,
}

impl SearchOptions {
    pub fn offset(cap: u64) -> Self {
        SearchOptions {
            convention: WindowConvention::Offset,
            from: 0,
            cap,
        }
    }

    pub fn absolute(cap: u64) -> Self {
        SearchOptions {
            convention: WindowConvention::Absolute,
            from: 0,
            cap,
        }
    }

    pub fn starting_at(mut self, from: u64) -> Self {
        self.from = from;
        self
    }
}

/// Builds the window at `n` under `convention`.
pub fn window_at(g: &GapFunction, convention: WindowConvention, n: u64) -> Result<Window> {
    match convention {
        WindowConvention::Offset => g.offset_window(n),
        WindowConvention::Absolute => g.absolute_window(n),
    }
}

/// Least `N <= cap` such that `pred` holds on `[N; N + g(N)]`.
pub fn least_metastable_n(
    pred: &WindowPredicate,
    g: &GapFunction,
    cap: u64,
) -> Result<SearchOutcome> {
    least_metastable_n_with(pred, g, SearchOptions::offset(cap))
}

/// Least `N` in `[opts.from; opts.cap]` whose window satisfies `pred`.
///
/// This is a brute-force scan: every candidate is checked in order, so the
/// answer is the true minimum over the range.
pub fn least_metastable_n_with(
    pred: &WindowPredicate,
    g: &GapFunction,
    opts: SearchOptions,
) -> Result<SearchOutcome> {
    least_n_by(pred, opts.from, opts.cap, |n| {
        window_at(g, opts.convention, n)
    })
}

/// Least `n` in `[from; cap]` with `pred` holding on `window_of(n)`, for
/// window shapes that are not a plain gap function.
pub fn least_n_by<F>(
    pred: &WindowPredicate,
    from: u64,
    cap: u64,
    mut window_of: F,
) -> Result<SearchOutcome>
where
    F: FnMut(u64) -> Result<Window>,
{
    let mut ev = WindowEvaluator::new(pred);
    let mut n = from;
    while n <= cap {
        let w = window_of(n)?;
        let c = ev.check(w)?;
        if c.holds {
            return Ok(SearchOutcome::Found {
                n,
                window: w,
                checked: c.checked,
            });
        }
        if n == u64::MAX {
            break;
        }
        n += 1;
    }
    Ok(SearchOutcome::NotFoundBelowCap { cap })
}

/// Searches, for every `n <= n_max`, the least `k <= k_max` with `pred`
/// failing on `[n; k]`. When every `n` has one, the table `g(n) = k` is a gap
/// function on which no `n <= n_max` satisfies `pred` on `[n; g(n)]`.
/// Returns `None` as soon as some `n` admits no failing `k`.
pub fn counterexample_gap(
    pred: &WindowPredicate,
    n_max: u64,
    k_max: u64,
) -> Result<Option<GapFunction>> {
    let mut values = Vec::new();
    for n in 0..=n_max {
        let mut ev = WindowEvaluator::new(pred);
        let mut hit = None;
        // [n; k] is empty below n, so failures start at k = n.
        for k in n..=k_max {
            if !ev.check(Window::new(n, k))?.holds {
                hit = Some(k);
                break;
            }
        }
        match hit {
            Some(k) => values.push(k),
            None => return Ok(None),
        }
    }
    Ok(Some(GapFunction::Table { values, default: 0 }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Rational;
    use crate::metastability::predicate::holds_on;
    use crate::series::CoefficientSequence;

    fn reciprocal_sums() -> CoefficientSequence {
        CoefficientSequence::from_partial_sums("c_n=1/(n+1)", |n| Rational::from_u64(n + 1).recip())
    }

    fn alternating_ones() -> CoefficientSequence {
        CoefficientSequence::from_fn("alt", |i| {
            if i % 2 == 0 {
                Rational::one()
            } else {
                Rational::int(-1)
            }
        })
    }

    #[test]
    fn reciprocal_sequence_with_doubling_gap() {
        let p = WindowPredicate::cauchy_partial_sums(reciprocal_sums(), Rational::frac(1, 10));
        let g = GapFunction::linear(2, 0);
        // N = 0 gives the one-point window [0; 0].
        assert_eq!(least_metastable_n(&p, &g, 100).unwrap().found(), Some(0));
        let from_one =
            least_metastable_n_with(&p, &g, SearchOptions::offset(100).starting_at(1)).unwrap();
        assert_eq!(from_one.found(), Some(6));
        // 1/6 - 1/16 = 5/48 > 1/10 and 1/7 - 1/19 = 12/133 <= 1/10
        assert!(!holds_on(&p, Window::new(5, 15)).unwrap());
        assert!(holds_on(&p, Window::new(6, 18)).unwrap());
    }

    #[test]
    fn constant_sequence_is_found_at_zero() {
        let p = WindowPredicate::cauchy_partial_sums(
            CoefficientSequence::finite(alloc::vec![Rational::int(3)]),
            Rational::frac(1, 1000),
        );
        for g in [GapFunction::constant(50), GapFunction::linear(7, 3)] {
            assert_eq!(least_metastable_n(&p, &g, 10).unwrap().found(), Some(0));
        }
    }

    #[test]
    fn oscillating_sequence_exhausts_the_cap() {
        let p = WindowPredicate::cauchy_partial_sums(alternating_ones(), Rational::frac(1, 2));
        for cap in [0, 5, 200] {
            assert_eq!(
                least_metastable_n(&p, &GapFunction::linear(1, 1), cap).unwrap(),
                SearchOutcome::NotFoundBelowCap { cap }
            );
        }
    }

    #[test]
    fn counterexample_for_oscillation() {
        let p = WindowPredicate::cauchy_partial_sums(alternating_ones(), Rational::frac(1, 2));
        let g = counterexample_gap(&p, 10, 20)
            .unwrap()
            .expect("every window [n; n+1] jumps by 1");
        for n in 0..=10u64 {
            assert_eq!(g.eval(n).unwrap(), n + 1);
        }
        let found = least_metastable_n_with(&p, &g, SearchOptions::absolute(10)).unwrap();
        assert_eq!(found, SearchOutcome::NotFoundBelowCap { cap: 10 });
    }

    #[test]
    fn counterexample_absent_for_constant() {
        let p =
            WindowPredicate::cauchy_partial_sums(CoefficientSequence::zero(), Rational::frac(1, 2));
        assert!(counterexample_gap(&p, 5, 30).unwrap().is_none());
    }

    #[test]
    fn counterexample_for_reciprocals() {
        let p = WindowPredicate::cauchy_partial_sums(reciprocal_sums(), Rational::frac(1, 10));
        let g = counterexample_gap(&p, 3, 100).unwrap().unwrap();
        // least k with 1/(n+1) - 1/(k+1) > 1/10
        let expected = [1u64, 2, 4, 6];
        for (n, k) in expected.iter().enumerate() {
            assert_eq!(g.eval(n as u64).unwrap(), *k);
        }
    }
}
