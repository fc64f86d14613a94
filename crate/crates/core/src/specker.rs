//! Coefficient sequences built from a monotone bounded base sequence `q_n`.
//!
//! [`transform_31`] takes differences, so `s_n = q_n`. [`transform_32`]
//! spreads each difference `q_{m+1} - q_m` evenly over the `2^(m-1)` indices
//! `n` with `ceil(log2 n) = m`, so `s_{2^k} = q_{k+1}` and `n |a_n|` stays
//! below `2 (q_{m+1} - q_m)`. When `q` has a noncomputable limit, the first
//! series has no computable rate of convergence while the second even
//! satisfies the Tauber condition.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exact::{ceil_log2, Rational};
use crate::series::CoefficientSequence;

type BaseFn = Arc<dyn Fn(u64) -> Rational + Send + Sync>;

/// A rational sequence declared non-decreasing and bounded above by `upper`.
///
/// Both declarations are checked at every index that is read.
#[derive(Clone)]
pub struct BaseSequence {
    q: BaseFn,
    upper: Rational,
    label: String,
}

impl core::fmt::Debug for BaseSequence {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("BaseSequence")
            .field("label", &self.label)
            .field("upper", &self.upper)
            .finish()
    }
}

impl BaseSequence {
    pub fn new<F>(label: impl Into<String>, upper: Rational, q: F) -> Self
    where
        F: Fn(u64) -> Rational + Send + Sync + 'static,
    {
        BaseSequence {
            q: Arc::new(q),
            upper,
            label: label.into(),
        }
    }

    /// `q_n = 1 - 2^-n`.
    pub fn dyadic_approach() -> Self {
        BaseSequence::new("dyadic_approach", Rational::one(), |n| {
            Rational::one() - Rational::frac(1, 2).pow(n)
        })
    }

    /// `q_n = n / (n + 1)`.
    pub fn rational_approach() -> Self {
        BaseSequence::new("rational_approach", Rational::one(), |n| {
            Rational::from_u64(n) / Rational::from_u64(n + 1)
        })
    }

    /// The listed values, after which the last one repeats.
    pub fn table(values: Vec<Rational>) -> Result<Self> {
        let last = values
            .last()
            .cloned()
            .ok_or_else(|| Error::config("a table base sequence needs at least one value"))?;
        if let Some(i) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::config(format!(
                "table base sequence decreases at index {}: {} > {}",
                i + 1,
                values[i],
                values[i + 1]
            )));
        }
        let label = format!(
            "table[{}]",
            values
                .iter()
                .map(|v| format!("{v}"))
                .collect::<Vec<_>>()
                .join(",")
        );
        Ok(BaseSequence::new(label, last, move |n| {
            values
                .get(n as usize)
                .cloned()
                .unwrap_or_else(|| values[values.len() - 1].clone())
        }))
    }

    pub fn upper(&self) -> &Rational {
        &self.upper
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `q_n`, checked against the upper bound.
    pub fn value(&self, n: u64) -> Result<Rational> {
        let v = (self.q)(n);
        if v > self.upper {
            return Err(Error::BoundViolation {
                what: "q_n <= B",
                index: n,
                value: format!("{v}"),
                bound: format!("{}", self.upper),
            });
        }
        Ok(v)
    }

    /// `q_{n+1} - q_n`, checked to be non-negative.
    pub fn step(&self, n: u64) -> Result<Rational> {
        let lo = self.value(n)?;
        let hi = self.value(n + 1)?;
        if hi < lo {
            return Err(Error::BoundViolation {
                what: "q_n <= q_{n+1}",
                index: n,
                value: format!("{hi}"),
                bound: format!("{lo}"),
            });
        }
        Ok(hi - lo)
    }

    /// `max(|q_0|, B - q_0)` bounds every term of both transforms, and
    /// `max(|q_0|, |B|)` every partial sum, since those stay in `[q_0, B]`.
    fn bounds(&self) -> Result<(Rational, Rational)> {
        let q0 = self.value(0)?;
        let one = Rational::one();
        let coeff = q0.abs().max(&self.upper - &q0);
        let sums = q0.abs().max(self.upper.abs());
        let positive = |r: Rational| if r.is_positive() { r } else { one.clone() };
        Ok((positive(coeff), positive(sums)))
    }
}

/// `a_0 = q_0`, `a_{n+1} = q_{n+1} - q_n`.
pub fn transform_31(base: &BaseSequence) -> Result<CoefficientSequence> {
    let (coeff, sums) = base.bounds()?;
    let b = base.clone();
    CoefficientSequence::from_fallible_fn(format!("specker31({})", base.label()), move |i| {
        if i == 0 {
            b.value(0)
        } else {
            b.step(i - 1)
        }
    })
    .with_coeff_bound(coeff)?
    .with_partial_sum_bound(sums)
}

/// `m = ceil(log2 n)` for `n >= 1`.
fn spread_level(n: u64) -> Result<u64> {
    Ok(ceil_log2(&Rational::from_u64(n))? as u64)
}

/// `a_0 = q_0`, `a_1 = q_1 - q_0` and `a_n = (q_{m+1} - q_m) / 2^(m-1)` with
/// `m = ceil(log2 n)` for `n >= 2`.
pub fn transform_32(base: &BaseSequence) -> Result<CoefficientSequence> {
    let (coeff, sums) = base.bounds()?;
    let b = base.clone();
    CoefficientSequence::from_fallible_fn(
        format!("specker32({})", base.label()),
        move |n| match n {
            0 => b.value(0),
            1 => b.step(0),
            _ => {
                let m = spread_level(n)?;
                Ok(b.step(m)? / Rational::from_u64(2).pow(m - 1))
            }
        },
    )
    .with_coeff_bound(coeff)?
    .with_partial_sum_bound(sums)
}

/// Outcome of checking one identity over a range of indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityReport {
    pub identity: &'static str,
    pub checked: u64,
    /// First index where the identity fails, with both sides.
    pub violation: Option<(u64, Rational, Rational)>,
}

impl IdentityReport {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks `s_n = q_n` for `n <= n_max` on [`transform_31`].
pub fn check_identity_31(base: &BaseSequence, n_max: u64) -> Result<IdentityReport> {
    let seq = transform_31(base)?;
    let mut report = IdentityReport {
        identity: "s_n = q_n",
        checked: 0,
        violation: None,
    };
    for (n, s) in seq.partial_sums().take(n_max as usize + 1).enumerate() {
        let s = s?;
        let q = base.value(n as u64)?;
        report.checked += 1;
        if s != q {
            report.violation = Some((n as u64, s, q));
            break;
        }
    }
    Ok(report)
}

/// Checks `s_{2^k} = q_{k+1}` for `1 <= k <= k_max` on [`transform_32`].
pub fn check_identity_32(base: &BaseSequence, k_max: u32) -> Result<IdentityReport> {
    if k_max >= 40 {
        return Err(Error::resource(format!(
            "s_(2^{k_max}) needs too many terms"
        )));
    }
    let seq = transform_32(base)?;
    let mut report = IdentityReport {
        identity: "s_(2^k) = q_(k+1)",
        checked: 0,
        violation: None,
    };
    let mut sums = seq.partial_sums();
    let mut next = 0u64;
    let mut s = Rational::zero();
    for k in 1..=k_max {
        let target = 1u64 << k;
        while next <= target {
            s = sums.next().expect("infinite iterator")?;
            next += 1;
        }
        let q = base.value(k as u64 + 1)?;
        report.checked += 1;
        if s != q {
            report.violation = Some((target, s, q));
            break;
        }
    }
    Ok(report)
}

/// Checks `n |a_n| <= 2 (q_{m+1} - q_m)` with `m = ceil(log2 n)` for
/// `2 <= n <= n_max` on [`transform_32`].
pub fn check_tauber_condition_32(base: &BaseSequence, n_max: u64) -> Result<IdentityReport> {
    let seq = transform_32(base)?;
    let mut report = IdentityReport {
        identity: "n |a_n| <= 2 (q_(m+1) - q_m)",
        checked: 0,
        violation: None,
    };
    for n in 2..=n_max {
        let lhs = Rational::from_u64(n) * seq.term(n)?.abs();
        let rhs = Rational::from_u64(2) * base.step(spread_level(n)?)?;
        report.checked += 1;
        if lhs > rhs {
            report.violation = Some((n, lhs, rhs));
            break;
        }
    }
    Ok(report)
}
