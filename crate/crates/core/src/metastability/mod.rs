//! Windows, gap functions and metastable window predicates.
//!
//! A sequence is metastable when for every `eps > 0` and every gap function
//! `g` some `N` has all of `[N; N + g(N)]` within `eps`. The search here is
//! the brute-force oracle that every bound elsewhere in the crate is judged
//! against.

mod certificate;
mod gap;
mod predicate;
mod search;
mod window;

pub use certificate::{Certificate, Verdict};
pub use gap::GapFunction;
pub use predicate::{
    check_on, holds_on, FEval, WindowCheck, WindowEvaluator, WindowPredicate, Witness,
};
pub use search::{
    counterexample_gap, least_metastable_n, least_metastable_n_with, least_n_by, window_at,
    SearchOptions, SearchOutcome,
};
pub use window::{Window, WindowConvention};
