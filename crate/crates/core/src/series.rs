//! Coefficient sequences, partial sums and exact/certified evaluation of the
//! generated power series `F(x) = sum a_i x^i`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{ceil_log2, omega, to_index, Natural, Rational};

pub type TermFn = Arc<dyn Fn(u64) -> Result<Rational> + Send + Sync>;
pub type ClosedFormFn = Arc<dyn Fn(&Rational) -> Result<Rational> + Send + Sync>;

/// A total map `i -> a_i` together with optional declared bounds.
///
/// Declared bounds are trusted inputs, but every routine that touches a term
/// or a partial sum re-checks it against the relevant bound and fails with
/// [`Error::BoundViolation`] instead of producing a vacuous result. All
/// declared bounds must be strictly positive; a sequence whose terms are all
/// zero declares `1`.
#[derive(Clone)]
pub struct CoefficientSequence {
    gen: TermFn,
    coeff_bound: Option<Rational>,
    partial_sum_bound: Option<Rational>,
    closed_form: Option<ClosedFormFn>,
    label: String,
}

impl fmt::Debug for CoefficientSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientSequence")
            .field("label", &self.label)
            .field("coeff_bound", &self.coeff_bound)
            .field("partial_sum_bound", &self.partial_sum_bound)
            .field("closed_form", &self.closed_form.is_some())
            .finish()
    }
}

fn positive_bound(b: Rational, what: &str) -> Result<Rational> {
    if b.is_positive() {
        Ok(b)
    } else {
        Err(Error::domain(format!("{what} must be > 0, got {b}")))
    }
}

impl CoefficientSequence {
    pub fn from_fn<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(u64) -> Rational + Send + Sync + 'static,
    {
        Self::from_fallible_fn(label, move |i| Ok(f(i)))
    }

    pub fn from_fallible_fn<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(u64) -> Result<Rational> + Send + Sync + 'static,
    {
        CoefficientSequence {
            gen: Arc::new(f),
            coeff_bound: None,
            partial_sum_bound: None,
            closed_form: None,
            label: label.into(),
        }
    }

    /// The sequence whose partial sums are `c_0, c_1, ...`, i.e.
    /// `a_0 = c_0` and `a_i = c_i - c_{i-1}`.
    pub fn from_partial_sums<F>(label: impl Into<String>, c: F) -> Self
    where
        F: Fn(u64) -> Result<Rational> + Send + Sync + 'static,
    {
        Self::from_fallible_fn(
            label,
            move |i| {
                if i == 0 {
                    c(0)
                } else {
                    Ok(c(i)? - c(i - 1)?)
                }
            },
        )
    }

    pub fn zero() -> Self {
        Self::from_fn("zero", |_| Rational::zero())
            .with_bounds_unchecked(Rational::one(), Rational::one())
            .with_closed_form(|_| Ok(Rational::zero()))
    }

    /// `a_i = c` for every `i`.
    pub fn constant(c: Rational) -> Self {
        if c.is_zero() {
            let mut z = Self::zero();
            z.label = String::from("constant(0)");
            return z;
        }
        let label = format!("constant({c})");
        let bound = c.abs();
        let cc = c.clone();
        let seq = Self::from_fn(label, move |_| cc.clone()).with_closed_form(move |x| {
            let one_minus = Rational::one() - x;
            c.checked_div(&one_minus)
        });
        CoefficientSequence {
            coeff_bound: Some(bound),
            ..seq
        }
    }

    /// `a_i = r^i`.
    ///
    /// For `|r| < 1` the terms are bounded by 1, the partial sums by
    /// `1/(1-|r|)` and `F(x) = 1/(1 - r x)`.
    pub fn geometric(r: Rational) -> Self {
        let label = format!("geometric({r})");
        let rr = r.clone();
        let mut seq = Self::from_fn(label, move |i| rr.pow(i));
        let abs = r.abs();
        if abs <= Rational::one() {
            seq.coeff_bound = Some(Rational::one());
            let rc = r.clone();
            seq.closed_form = Some(Arc::new(move |x: &Rational| {
                (Rational::one() - &rc * x).recip()
            }));
        }
        if abs < Rational::one() {
            seq.partial_sum_bound = Some((Rational::one() - abs).recip().expect("|r| < 1"));
        } else if r == Rational::int(-1) {
            seq.partial_sum_bound = Some(Rational::one());
        }
        seq
    }

    /// `a_i = (-1)^i / (i+1)`.
    pub fn alternating_harmonic() -> Self {
        Self::from_fn("alternating_harmonic", |i| {
            let t = Rational::frac(1, 1)
                .checked_div(&Rational::from_u64(i + 1))
                .expect("i+1 > 0");
            if i % 2 == 0 {
                t
            } else {
                -t
            }
        })
        .with_bounds_unchecked(Rational::one(), Rational::one())
    }

    /// `a_i = (i+1)^(-k)`; index shifted by one so that `a_0` is defined.
    pub fn power(k: u32) -> Self {
        let mut seq = Self::from_fn(format!("power({k})"), move |i| {
            Rational::from_u64(i + 1)
                .pow(k as u64)
                .recip()
                .expect("i+1 > 0")
        });
        seq.coeff_bound = Some(Rational::one());
        if k >= 2 {
            // sum 1/n^k <= sum 1/n^2 < 2
            seq.partial_sum_bound = Some(Rational::int(2));
        }
        seq
    }

    /// Finitely supported: `a_i = values[i]` for `i < len`, zero afterwards.
    /// `F = F_{len-1}` exactly.
    pub fn finite(values: Vec<Rational>) -> Self {
        let mut max_term = Rational::zero();
        let mut max_sum = Rational::zero();
        let mut s = Rational::zero();
        for v in &values {
            s += v;
            max_term = max_term.max(v.abs());
            max_sum = max_sum.max(s.abs());
        }
        let label = format!(
            "finite[{}]",
            values
                .iter()
                .map(|v| format!("{v}"))
                .collect::<Vec<_>>()
                .join(",")
        );
        let vals = Arc::new(values);
        let gen_vals = Arc::clone(&vals);
        let seq = Self::from_fn(label, move |i| {
            usize::try_from(i)
                .ok()
                .and_then(|i| gen_vals.get(i).cloned())
                .unwrap_or_else(Rational::zero)
        })
        .with_closed_form(move |x| {
            let mut acc = Rational::zero();
            for v in vals.iter().rev() {
                acc = acc * x + v;
            }
            Ok(acc)
        });
        let one = Rational::one();
        seq.with_bounds_unchecked(
            if max_term.is_zero() {
                one.clone()
            } else {
                max_term
            },
            if max_sum.is_zero() { one } else { max_sum },
        )
    }

    fn with_bounds_unchecked(mut self, coeff: Rational, partial: Rational) -> Self {
        self.coeff_bound = Some(coeff);
        self.partial_sum_bound = Some(partial);
        self
    }

    /// Declares `|a_i| <= bound` for all `i`.
    pub fn with_coeff_bound(mut self, bound: Rational) -> Result<Self> {
        self.coeff_bound = Some(positive_bound(bound, "coefficient bound")?);
        Ok(self)
    }

    /// Declares `|s_i| <= bound` for all `i`.
    pub fn with_partial_sum_bound(mut self, bound: Rational) -> Result<Self> {
        self.partial_sum_bound = Some(positive_bound(bound, "partial-sum bound")?);
        Ok(self)
    }

    /// Attaches an exact formula for `F(x)` on `[0, 1)`.
    pub fn with_closed_form<F>(mut self, f: F) -> Self
    where
        F: Fn(&Rational) -> Result<Rational> + Send + Sync + 'static,
    {
        self.closed_form = Some(Arc::new(f));
        self
    }

    pub fn without_closed_form(mut self) -> Self {
        self.closed_form = None;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn coeff_bound(&self) -> Option<&Rational> {
        self.coeff_bound.as_ref()
    }

    pub fn partial_sum_bound(&self) -> Option<&Rational> {
        self.partial_sum_bound.as_ref()
    }

    pub fn has_closed_form(&self) -> bool {
        self.closed_form.is_some()
    }

    /// `a_i`.
    pub fn term(&self, i: u64) -> Result<Rational> {
        (self.gen)(i)
    }

    /// `a_i`, checked against `bound` when given.
    pub fn term_bounded(&self, i: u64, bound: Option<&Rational>) -> Result<Rational> {
        let a = self.term(i)?;
        if let Some(b) = bound {
            if &a.abs() > b {
                return Err(Error::BoundViolation {
                    what: "|a_i| <= L",
                    index: i,
                    value: format!("{a}"),
                    bound: format!("{b}"),
                });
            }
        }
        Ok(a)
    }

    /// Exact `F(x)` when a closed form is attached.
    pub fn closed_form(&self, x: &Rational) -> Option<Result<Rational>> {
        self.closed_form.as_ref().map(|f| f(x))
    }

    /// `s_0, s_1, ...`, each computed from the previous one.
    pub fn partial_sums(&self) -> PartialSums<'_> {
        PartialSums {
            seq: self,
            next: 0,
            acc: Rational::zero(),
            bound: None,
        }
    }

    /// Like [`partial_sums`](Self::partial_sums) but every `s_i` is checked
    /// against `bound`.
    pub fn partial_sums_bounded<'a>(&'a self, bound: Option<&'a Rational>) -> PartialSums<'a> {
        PartialSums {
            seq: self,
            next: 0,
            acc: Rational::zero(),
            bound,
        }
    }

    /// `s_n = a_0 + ... + a_n`.
    pub fn partial_sum(&self, n: u64) -> Result<Rational> {
        let mut acc = Rational::zero();
        for i in 0..=n {
            let a = self.term(i)?;
            if !a.is_zero() {
                acc += &a;
            }
        }
        Ok(acc)
    }

    /// Spot-checks every declared bound on indices `0..=upto`.
    pub fn verify_declared_bounds(&self, upto: u64) -> Result<()> {
        let cb = self.coeff_bound.as_ref();
        if cb.is_some() {
            for i in 0..=upto {
                self.term_bounded(i, cb)?;
            }
        }
        if self.partial_sum_bound.is_some() {
            for s in self
                .partial_sums_bounded(self.partial_sum_bound.as_ref())
                .take(upto as usize + 1)
            {
                s?;
            }
        }
        Ok(())
    }

    /// `F_l(x) = sum_{i<=l} a_i x^i`, exactly.
    pub fn eval_truncated(&self, x: &Rational, l: u64) -> Result<Rational> {
        self.horner(x, l, None)
    }

    fn horner(&self, x: &Rational, l: u64, bound: Option<&Rational>) -> Result<Rational> {
        if x.is_zero() {
            return self.term_bounded(0, bound);
        }
        let mut acc = Rational::zero();
        let mut i = l;
        loop {
            acc = acc * x + self.term_bounded(i, bound)?;
            if i == 0 {
                break;
            }
            i -= 1;
        }
        Ok(acc)
    }

    /// Returns `F_l(x)` with `l = omega(eps / (L p), p)`, which lies within
    /// `eps` of `F(x)` for every `x` in `[0, 1-1/p]` when `|a_i| <= L`.
    ///
    /// `L` is the declared coefficient bound.
    pub fn eval_certified(&self, pt: &EvalPoint, eps: &Rational) -> Result<(Rational, Natural)> {
        let bound = self.coeff_bound.clone().ok_or_else(|| {
            Error::config(format!(
                "certified evaluation of `{}` needs a coefficient bound",
                self.label
            ))
        })?;
        self.eval_certified_with_bound(pt, eps, &bound)
    }

    /// [`eval_certified`](Self::eval_certified) with an explicit coefficient
    /// bound, re-checked on every term that is summed.
    pub fn eval_certified_with_bound(
        &self,
        pt: &EvalPoint,
        eps: &Rational,
        bound: &Rational,
    ) -> Result<(Rational, Natural)> {
        if !eps.is_positive() {
            return Err(Error::domain(format!(
                "certified evaluation needs eps > 0, got {eps}"
            )));
        }
        if !bound.is_positive() {
            return Err(Error::domain(format!(
                "coefficient bound must be > 0, got {bound}"
            )));
        }
        let p = Rational::from_natural(&pt.p);
        let l = omega(&(eps / &(bound * &p)), &pt.p)?;
        let li = to_index(&l, "truncation index")?;
        let v = self.horner(&pt.x, li, Some(bound))?;
        Ok((v, l))
    }

    /// Both sides of `F_l(x) = s_l x^l + (1-x) sum_{i<l} s_i x^i`.
    pub fn summation_by_parts(&self, x: &Rational, l: u64) -> Result<(Rational, Rational)> {
        let lhs = self.eval_truncated(x, l)?;
        let mut inner = Rational::zero();
        let mut power = Rational::one();
        let mut sums = self.partial_sums();
        for _ in 0..l {
            let s = sums.next().expect("infinite iterator")?;
            inner += &(&s * &power);
            power *= x;
        }
        let s_l = sums.next().expect("infinite iterator")?;
        let rhs = s_l * &power + (Rational::one() - x) * inner;
        Ok((lhs, rhs))
    }

    /// An enclosure of `F(x)` for `x` in `[0, 1)`: exact when a closed form
    /// is attached, otherwise a certified enclosure of half-width at most
    /// `radius`.
    ///
    /// `fallback_bound` supplies the coefficient bound when the sequence has
    /// none declared.
    pub fn enclose_f(
        &self,
        x: &Rational,
        radius: &Rational,
        fallback_bound: Option<&Rational>,
    ) -> Result<Enclosure> {
        if let Some(v) = self.closed_form(x) {
            return Ok(Enclosure::exact(v?));
        }
        let pt = EvalPoint::tight(x.clone())?;
        let bound = self
            .coeff_bound
            .as_ref()
            .or(fallback_bound)
            .ok_or_else(|| {
                Error::config(format!(
                    "evaluating F for `{}` needs a coefficient bound",
                    self.label
                ))
            })?;
        // Half the radius goes to the tail, half to rounding.
        let half = radius / Rational::from_u64(2);
        if !half.is_positive() {
            return Err(Error::domain(format!(
                "enclosure radius must be > 0, got {radius}"
            )));
        }
        let p = Rational::from_natural(&pt.p);
        let l = to_index(&omega(&(&half / &(bound * &p)), &pt.p)?, "truncation index")?;
        self.enclose_truncated(x, l, bound, &half, &half)
    }

    /// Encloses `F(x)` from `F_l(x)` evaluated on a dyadic grid rounded
    /// downwards. Each rounding loses less than one grid step and later
    /// multiplications by `x` in `[0, 1)` only shrink it, so
    /// `computed <= F_l(x) < computed + (l + 1) step`.
    fn enclose_truncated(
        &self,
        x: &Rational,
        l: u64,
        bound: &Rational,
        tail: &Rational,
        rounding: &Rational,
    ) -> Result<Enclosure> {
        // (l + 1) 2^-k <= rounding
        let steps = Rational::from_u64(l.saturating_add(1));
        let k = ceil_log2(&(&steps / rounding))?.max(0) as u64;
        let (xn, xd) = (x.numer(), x.denom());
        let mut m = BigInt::zero();
        let mut i = l;
        loop {
            let a = self.term_bounded(i, Some(bound))?;
            let (an, ad) = (a.numer(), a.denom());
            // floor((m xn / xd + an / ad) 2^k) with m already scaled by 2^k
            let num = &m * xn * ad + ((an * xd) << k);
            m = num.div_floor(&(xd * ad));
            if i == 0 {
                break;
            }
            i -= 1;
        }
        let scale = BigInt::one() << k;
        let lo = Rational::new(m.clone(), scale.clone())?;
        let hi = Rational::new(m + BigInt::from(l) + BigInt::one(), scale)?;
        Ok(Enclosure {
            lo: lo - tail,
            hi: hi + tail,
        })
    }
}

/// Incremental partial sums; yields `Err` once and then keeps yielding it if
/// a term fails or a bound is violated.
pub struct PartialSums<'a> {
    seq: &'a CoefficientSequence,
    next: u64,
    acc: Rational,
    bound: Option<&'a Rational>,
}

impl Iterator for PartialSums<'_> {
    type Item = Result<Rational>;

    fn next(&mut self) -> Option<Self::Item> {
        let i = self.next;
        let a = match self.seq.term(i) {
            Ok(a) => a,
            Err(e) => return Some(Err(e)),
        };
        if !a.is_zero() {
            self.acc += &a;
        }
        self.next += 1;
        if let Some(b) = self.bound {
            if &self.acc.abs() > b {
                return Some(Err(Error::BoundViolation {
                    what: "|s_i| <= L",
                    index: i,
                    value: format!("{}", self.acc),
                    bound: format!("{b}"),
                }));
            }
        }
        Some(Ok(self.acc.clone()))
    }
}

/// A point `x` together with `p >= 1` such that `0 <= x <= 1 - 1/p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalPoint {
    pub x: Rational,
    pub p: Natural,
}

impl EvalPoint {
    pub fn new(x: Rational, p: Natural) -> Result<Self> {
        if p.is_zero() {
            return Err(Error::domain("evaluation point needs p >= 1"));
        }
        let limit = Rational::one() - Rational::from_natural(&p).recip()?;
        if x.is_negative() || x > limit {
            return Err(Error::domain(format!("x = {x} lies outside [0, {limit}]")));
        }
        Ok(EvalPoint { x, p })
    }

    /// Pairs `x` in `[0, 1)` with the least admissible `p = ceil(1/(1-x))`.
    pub fn tight(x: Rational) -> Result<Self> {
        let p = tight_p(&x)?;
        Ok(EvalPoint { x, p })
    }
}

/// `ceil(1/(1-x))` for `x` in `[0, 1)`.
pub fn tight_p(x: &Rational) -> Result<Natural> {
    if x.is_negative() || x >= &Rational::one() {
        return Err(Error::domain(format!("point {x} lies outside [0, 1)")));
    }
    Ok((Rational::one() - x).recip()?.ceil_natural())
}

/// A closed interval `[lo, hi]` known to contain an exact value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enclosure {
    pub lo: Rational,
    pub hi: Rational,
}

impl Enclosure {
    pub fn exact(v: Rational) -> Self {
        Enclosure {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) * Rational::frac(1, 2)
    }
}

/// An indexed family of points `x_m` in `[0, 1)`.
#[derive(Clone)]
pub enum PointFamily {
    /// `v_m = 1 - 1/m`, defined for `m >= 1`.
    V,
    /// `x_m = 1 - 2^{-m}`.
    Dyadic,
    /// `x_m = values[m]`, the last value repeating past the end.
    Explicit(Vec<Rational>),
    Custom {
        label: String,
        first: u64,
        f: Arc<dyn Fn(u64) -> Result<Rational> + Send + Sync>,
    },
}

impl fmt::Debug for PointFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

impl PointFamily {
    /// Least index at which the family is defined.
    pub fn first_index(&self) -> u64 {
        match self {
            PointFamily::V => 1,
            PointFamily::Custom { first, .. } => *first,
            _ => 0,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            PointFamily::V => String::from("v(m)=1-1/m"),
            PointFamily::Dyadic => String::from("x(m)=1-2^-m"),
            PointFamily::Explicit(v) => format!(
                "explicit[{}]",
                v.iter()
                    .map(|x| format!("{x}"))
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            PointFamily::Custom { label, .. } => label.clone(),
        }
    }

    /// `x_m`, guaranteed to lie in `[0, 1)`.
    pub fn point(&self, m: u64) -> Result<Rational> {
        let x = match self {
            PointFamily::V => {
                if m == 0 {
                    return Err(Error::config(
                        "v_0 = 1 - 1/0 is undefined; windows over v-points must start at 1",
                    ));
                }
                Rational::one() - Rational::from_u64(m).recip()?
            }
            PointFamily::Dyadic => Rational::one() - Rational::frac(1, 2).pow(m),
            PointFamily::Explicit(v) => {
                let last = v
                    .len()
                    .checked_sub(1)
                    .ok_or_else(|| Error::config("empty explicit point list"))?;
                let idx = usize::try_from(m).map_or(last, |i| i.min(last));
                v[idx].clone()
            }
            PointFamily::Custom { first, f, .. } => {
                if m < *first {
                    return Err(Error::config(format!(
                        "point family undefined below index {first}"
                    )));
                }
                f(m)?
            }
        };
        if x.is_negative() || x >= Rational::one() {
            return Err(Error::config(format!("x_{m} = {x} lies outside [0, 1)")));
        }
        Ok(x)
    }
}
