//! Exact finitary forms of Abel's and Tauber's theorems.
//!
//! Everything here is exact rational arithmetic: power-series evaluation
//! with certified truncation, metastable window predicates and their
//! brute-force search, checkers for the finite Abel and Tauber theorems,
//! the rate functionals that compose them, and the two Specker-style
//! sequence transformations.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod error;
pub mod exact;
pub mod metastability;
pub mod rate;
pub mod series;
pub mod specker;
pub mod theorems;

pub use error::{Error, Result};
pub use exact::{ceil_log2, omega, Natural, Rational};
pub use series::{CoefficientSequence, EvalPoint, PointFamily};
