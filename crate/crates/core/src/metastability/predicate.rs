use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::String;

use super::window::Window;
use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::series::{CoefficientSequence, Enclosure, PointFamily};

/// How predicates that mention `F` evaluate it.
///
/// A closed form is used when the sequence carries one. Otherwise `F(x_m)` is
/// enclosed by a certified truncation of half-width `eps / margin_divisor`,
/// and an inconclusive comparison is retried with the width divided by 16, up
/// to `refinements` times. A comparison that is still inconclusive is reported
/// as [`Witness::Undecided`] and counts as a failure, so every `true` verdict
/// is a statement about the exact `F`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FEval {
    pub fallback_bound: Option<Rational>,
    pub margin_divisor: u64,
    pub refinements: u32,
}

impl Default for FEval {
    fn default() -> Self {
        FEval {
            fallback_bound: None,
            margin_divisor: 8,
            refinements: 6,
        }
    }
}

impl FEval {
    pub fn with_fallback_bound(bound: Rational) -> Self {
        FEval {
            fallback_bound: Some(bound),
            ..FEval::default()
        }
    }
}

/// A property of a finite window, decidable with exact arithmetic.
#[derive(Clone, Debug)]
pub enum WindowPredicate {
    /// `|s_m - s_n| <= eps` for all `m, n` in the window.
    CauchyOfPartialSums {
        seq: CoefficientSequence,
        eps: Rational,
    },
    /// `|F(x_m) - F(x_n)| <= eps` for all `m, n` in the window.
    CauchyOfF {
        seq: CoefficientSequence,
        eps: Rational,
        points: PointFamily,
        f_eval: FEval,
    },
    /// `|F(x_m) - s_n| <= eps` for all `m, n` in the window.
    JointAbel {
        seq: CoefficientSequence,
        eps: Rational,
        points: PointFamily,
        f_eval: FEval,
    },
    /// `i |a_i| <= eps` for all `i` in the window.
    SmallTailCoeff {
        seq: CoefficientSequence,
        eps: Rational,
    },
    /// `1 - delta <= x_m` for all `m` in the window.
    PointsNear1 {
        points: PointFamily,
        delta: Rational,
    },
}

impl WindowPredicate {
    pub fn cauchy_partial_sums(seq: CoefficientSequence, eps: Rational) -> Self {
        WindowPredicate::CauchyOfPartialSums { seq, eps }
    }

    pub fn cauchy_f(seq: CoefficientSequence, eps: Rational, points: PointFamily) -> Self {
        WindowPredicate::CauchyOfF {
            seq,
            eps,
            points,
            f_eval: FEval::default(),
        }
    }

    pub fn joint_abel(seq: CoefficientSequence, eps: Rational, points: PointFamily) -> Self {
        WindowPredicate::JointAbel {
            seq,
            eps,
            points,
            f_eval: FEval::default(),
        }
    }

    pub fn small_tail(seq: CoefficientSequence, eps: Rational) -> Self {
        WindowPredicate::SmallTailCoeff { seq, eps }
    }

    pub fn points_near_one(points: PointFamily, delta: Rational) -> Self {
        WindowPredicate::PointsNear1 { points, delta }
    }

    /// The tolerance the predicate compares against.
    pub fn eps(&self) -> &Rational {
        match self {
            WindowPredicate::CauchyOfPartialSums { eps, .. }
            | WindowPredicate::CauchyOfF { eps, .. }
            | WindowPredicate::JointAbel { eps, .. }
            | WindowPredicate::SmallTailCoeff { eps, .. } => eps,
            WindowPredicate::PointsNear1 { delta, .. } => delta,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            WindowPredicate::CauchyOfPartialSums { seq, eps } => {
                format!("cauchy_partial_sums(seq={}, eps={eps})", seq.label())
            }
            WindowPredicate::CauchyOfF {
                seq, eps, points, ..
            } => format!(
                "cauchy_f(seq={}, eps={eps}, points={})",
                seq.label(),
                points.describe()
            ),
            WindowPredicate::JointAbel {
                seq, eps, points, ..
            } => format!(
                "joint_abel(seq={}, eps={eps}, points={})",
                seq.label(),
                points.describe()
            ),
            WindowPredicate::SmallTailCoeff { seq, eps } => {
                format!("small_tail(seq={}, eps={eps})", seq.label())
            }
            WindowPredicate::PointsNear1 { points, delta } => {
                format!(
                    "points_near_one(points={}, delta={delta})",
                    points.describe()
                )
            }
        }
    }

    pub fn sequence(&self) -> Option<&CoefficientSequence> {
        match self {
            WindowPredicate::CauchyOfPartialSums { seq, .. }
            | WindowPredicate::CauchyOfF { seq, .. }
            | WindowPredicate::JointAbel { seq, .. }
            | WindowPredicate::SmallTailCoeff { seq, .. } => Some(seq),
            WindowPredicate::PointsNear1 { .. } => None,
        }
    }
}

/// A concrete reason a window check failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// `|s_i - s_n| = gap > limit`.
    PartialSums {
        i: u64,
        n: u64,
        gap: Rational,
        limit: Rational,
    },
    /// `|F(x_m) - F(x_n)| >= at_least > limit`.
    FValues {
        m: u64,
        n: u64,
        at_least: Rational,
        limit: Rational,
    },
    /// `|F(x_m) - s_n| >= at_least > limit`.
    Joint {
        m: u64,
        n: u64,
        at_least: Rational,
        limit: Rational,
    },
    /// `i |a_i| = value > limit`.
    TailTerm {
        i: u64,
        value: Rational,
        limit: Rational,
    },
    /// `x_m < floor`.
    PointBelow {
        m: u64,
        x: Rational,
        floor: Rational,
    },
    /// `x_m > ceiling`.
    PointAbove {
        m: u64,
        x: Rational,
        ceiling: Rational,
    },
    /// Certified evaluation could not separate the comparison at `(m, n)`.
    Undecided { m: u64, n: u64 },
}

/// Outcome of checking one window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowCheck {
    pub holds: bool,
    /// Points or ordered pairs examined.
    pub checked: u64,
    pub witness: Option<Witness>,
}

impl WindowCheck {
    fn pass(checked: u64) -> Self {
        WindowCheck {
            holds: true,
            checked,
            witness: None,
        }
    }

    fn fail(checked: u64, witness: Witness) -> Self {
        WindowCheck {
            holds: false,
            checked,
            witness: Some(witness),
        }
    }
}

/// `true` iff `pred` holds on every point or pair of `w`; vacuous on an empty
/// window.
pub fn holds_on(pred: &WindowPredicate, w: Window) -> Result<bool> {
    Ok(check_on(pred, w)?.holds)
}

/// [`holds_on`] with diagnostics.
pub fn check_on(pred: &WindowPredicate, w: Window) -> Result<WindowCheck> {
    WindowEvaluator::new(pred).check(w)
}

/// Checks a predicate on a stream of windows, reusing partial sums and `F`
/// enclosures between calls. Windows whose lower end never decreases are the
/// cheap case; a smaller `lo` restarts the partial-sum stream.
pub struct WindowEvaluator<'p> {
    pred: &'p WindowPredicate,
    sum_bound: Option<Rational>,
    coeff_bound: Option<Rational>,
    sums: VecDeque<Rational>,
    base: u64,
    next: u64,
    acc: Rational,
    enclosures: BTreeMap<u64, (u32, Enclosure)>,
}

impl<'p> WindowEvaluator<'p> {
    /// Partial sums are checked against the sequence's declared partial-sum
    /// bound, terms against its coefficient bound.
    pub fn new(pred: &'p WindowPredicate) -> Self {
        let seq = pred.sequence();
        WindowEvaluator {
            pred,
            sum_bound: seq.and_then(|s| s.partial_sum_bound().cloned()),
            coeff_bound: seq.and_then(|s| s.coeff_bound().cloned()),
            sums: VecDeque::new(),
            base: 0,
            next: 0,
            acc: Rational::zero(),
            enclosures: BTreeMap::new(),
        }
    }

    /// Overrides the bound every partial sum is checked against.
    pub fn with_sum_bound(mut self, bound: Option<Rational>) -> Self {
        self.sum_bound = bound;
        self
    }

    /// Overrides the bound every coefficient is checked against.
    pub fn with_coeff_bound(mut self, bound: Option<Rational>) -> Self {
        self.coeff_bound = bound;
        self
    }

    pub fn check(&mut self, w: Window) -> Result<WindowCheck> {
        if w.is_empty() {
            return Ok(WindowCheck::pass(0));
        }
        let pred: &'p WindowPredicate = self.pred;
        match pred {
            WindowPredicate::CauchyOfPartialSums { eps, .. } => self.check_sum_spread(w, eps),
            WindowPredicate::CauchyOfF {
                eps,
                points,
                f_eval,
                ..
            } => self.check_f_spread(w, eps, points, f_eval),
            WindowPredicate::JointAbel {
                eps,
                points,
                f_eval,
                ..
            } => self.check_joint(w, eps, points, f_eval),
            WindowPredicate::SmallTailCoeff { seq, eps } => self.check_tail(w, seq, eps),
            WindowPredicate::PointsNear1 { points, delta } => check_points(w, points, delta),
        }
    }

    fn seq(&self) -> &'p CoefficientSequence {
        self.pred.sequence().expect("predicate carries a sequence")
    }

    fn advance(&mut self) -> Result<()> {
        let i = self.next;
        let a = self.seq().term_bounded(i, self.coeff_bound.as_ref())?;
        if !a.is_zero() {
            self.acc += &a;
        }
        if let Some(b) = &self.sum_bound {
            if &self.acc.abs() > b {
                return Err(Error::BoundViolation {
                    what: "|s_i| <= L",
                    index: i,
                    value: format!("{}", self.acc),
                    bound: format!("{b}"),
                });
            }
        }
        self.next += 1;
        Ok(())
    }

    /// Makes `s_lo ..= s_hi` available through [`sum`](Self::sum).
    fn ensure_sums(&mut self, w: Window) -> Result<()> {
        if w.lo < self.base {
            self.sums.clear();
            self.base = 0;
            self.next = 0;
            self.acc = Rational::zero();
        }
        while self.base < w.lo && !self.sums.is_empty() {
            self.sums.pop_front();
            self.base += 1;
        }
        while self.next < w.lo {
            self.advance()?;
            self.base = self.next;
        }
        while self.next <= w.hi {
            self.advance()?;
            self.sums.push_back(self.acc.clone());
        }
        Ok(())
    }

    fn sum(&self, i: u64) -> &Rational {
        &self.sums[(i - self.base) as usize]
    }

    /// Indices of the least and greatest partial sum on `w`.
    fn sum_extremes(&mut self, w: Window) -> Result<(u64, u64)> {
        self.ensure_sums(w)?;
        let (mut imin, mut imax) = (w.lo, w.lo);
        for i in w.iter() {
            if self.sum(i) < self.sum(imin) {
                imin = i;
            }
            if self.sum(i) > self.sum(imax) {
                imax = i;
            }
        }
        Ok((imin, imax))
    }

    fn check_sum_spread(&mut self, w: Window, eps: &Rational) -> Result<WindowCheck> {
        let (imin, imax) = self.sum_extremes(w)?;
        let gap = self.sum(imax) - self.sum(imin);
        if &gap <= eps {
            Ok(WindowCheck::pass(w.pair_count()))
        } else {
            Ok(WindowCheck::fail(
                w.pair_count(),
                Witness::PartialSums {
                    i: imax,
                    n: imin,
                    gap,
                    limit: eps.clone(),
                },
            ))
        }
    }

    fn enclosure(
        &mut self,
        m: u64,
        level: u32,
        eps: &Rational,
        points: &PointFamily,
        f_eval: &FEval,
    ) -> Result<Enclosure> {
        if let Some((have, e)) = self.enclosures.get(&m) {
            if *have >= level {
                return Ok(e.clone());
            }
        }
        let x = points.point(m)?;
        let divisor = Rational::from_u64(f_eval.margin_divisor.max(1))
            * Rational::from_u64(16).pow(level as u64);
        let radius = eps.checked_div(&divisor)?;
        let fallback = f_eval.fallback_bound.as_ref().or(self.coeff_bound.as_ref());
        let e = self.seq().enclose_f(&x, &radius, fallback)?;
        let stored = if e.is_exact() { u32::MAX } else { level };
        self.enclosures.insert(m, (stored, e.clone()));
        Ok(e)
    }

    fn prune_enclosures(&mut self, lo: u64) {
        self.enclosures = self.enclosures.split_off(&lo);
    }

    fn check_f_spread(
        &mut self,
        w: Window,
        eps: &Rational,
        points: &PointFamily,
        f_eval: &FEval,
    ) -> Result<WindowCheck> {
        self.prune_enclosures(w.lo);
        let pairs = w.pair_count();
        let mut undecided = (w.lo, w.lo);
        for level in 0..=f_eval.refinements {
            let first = self.enclosure(w.lo, level, eps, points, f_eval)?;
            let (mut max_hi, mut min_lo) = ((w.lo, first.hi.clone()), (w.lo, first.lo.clone()));
            let (mut max_lo, mut min_hi) = ((w.lo, first.lo.clone()), (w.lo, first.hi.clone()));
            for m in w.iter().skip(1) {
                let e = self.enclosure(m, level, eps, points, f_eval)?;
                if e.hi > max_hi.1 {
                    max_hi = (m, e.hi.clone());
                }
                if e.lo < min_lo.1 {
                    min_lo = (m, e.lo.clone());
                }
                if e.lo > max_lo.1 {
                    max_lo = (m, e.lo.clone());
                }
                if e.hi < min_hi.1 {
                    min_hi = (m, e.hi);
                }
            }
            if &(&max_hi.1 - &min_lo.1) <= eps {
                return Ok(WindowCheck::pass(pairs));
            }
            let sure_gap = &max_lo.1 - &min_hi.1;
            if &sure_gap > eps {
                return Ok(WindowCheck::fail(
                    pairs,
                    Witness::FValues {
                        m: max_lo.0,
                        n: min_hi.0,
                        at_least: sure_gap,
                        limit: eps.clone(),
                    },
                ));
            }
            undecided = (max_hi.0, min_lo.0);
        }
        Ok(WindowCheck::fail(
            pairs,
            Witness::Undecided {
                m: undecided.0,
                n: undecided.1,
            },
        ))
    }

    fn check_joint(
        &mut self,
        w: Window,
        eps: &Rational,
        points: &PointFamily,
        f_eval: &FEval,
    ) -> Result<WindowCheck> {
        self.prune_enclosures(w.lo);
        let (imin, imax) = self.sum_extremes(w)?;
        let s_min = self.sum(imin).clone();
        let s_max = self.sum(imax).clone();
        let floor = &s_max - eps;
        let ceiling = &s_min + eps;
        let pairs = w.pair_count();
        for m in w.iter() {
            let mut decided = false;
            for level in 0..=f_eval.refinements {
                let e = self.enclosure(m, level, eps, points, f_eval)?;
                if e.lo >= floor && e.hi <= ceiling {
                    decided = true;
                    break;
                }
                if e.hi < floor {
                    return Ok(WindowCheck::fail(
                        pairs,
                        Witness::Joint {
                            m,
                            n: imax,
                            at_least: &s_max - &e.hi,
                            limit: eps.clone(),
                        },
                    ));
                }
                if e.lo > ceiling {
                    return Ok(WindowCheck::fail(
                        pairs,
                        Witness::Joint {
                            m,
                            n: imin,
                            at_least: &e.lo - &s_min,
                            limit: eps.clone(),
                        },
                    ));
                }
            }
            if !decided {
                let e = self.enclosure(m, f_eval.refinements, eps, points, f_eval)?;
                let n = if e.lo < floor { imax } else { imin };
                return Ok(WindowCheck::fail(pairs, Witness::Undecided { m, n }));
            }
        }
        Ok(WindowCheck::pass(pairs))
    }

    fn check_tail(
        &mut self,
        w: Window,
        seq: &CoefficientSequence,
        eps: &Rational,
    ) -> Result<WindowCheck> {
        for i in w.iter() {
            let a = seq.term_bounded(i, self.coeff_bound.as_ref())?;
            let value = Rational::from_u64(i) * a.abs();
            if &value > eps {
                return Ok(WindowCheck::fail(
                    i - w.lo + 1,
                    Witness::TailTerm {
                        i,
                        value,
                        limit: eps.clone(),
                    },
                ));
            }
        }
        Ok(WindowCheck::pass(w.len()))
    }
}

fn check_points(w: Window, points: &PointFamily, delta: &Rational) -> Result<WindowCheck> {
    let floor = Rational::one() - delta;
    for m in w.iter() {
        let x = points.point(m)?;
        if x < floor {
            return Ok(WindowCheck::fail(
                m - w.lo + 1,
                Witness::PointBelow { m, x, floor },
            ));
        }
    }
    Ok(WindowCheck::pass(w.len()))
}
