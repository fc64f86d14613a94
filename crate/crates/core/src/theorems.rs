//! Finite Abelian and Tauberian theorems as executable checks.
//!
//! An instance fixes the data of one theorem. Its derived indices (`N`, `p`,
//! `l`) are always recomputed from that data. The premise and the conclusion
//! are checked independently and exactly; only values of `F` go through the
//! certified evaluation of [`FEval`].

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exact::{ceil_index, omega, to_index, Natural, Rational};
use crate::metastability::{
    FEval, GapFunction, Window, WindowCheck, WindowEvaluator, WindowPredicate, Witness,
};
use crate::series::{CoefficientSequence, PointFamily};

/// Which inequality of a theorem a report is about.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Clause {
    /// `|s_i - s_n| <= eps/4` on `[N1; max(N + g(N), l)]`.
    AbelPartialSums,
    /// `1/p <= 1 - x_m <= eps/(8 L N1)` on `[N2; N + g(N)]`.
    AbelPoints,
    /// `|F(x_m) - s_n| <= eps` on `[N; N + g(N)]`.
    AbelConclusion,
    /// `i |a_i| <= eps/8` on `[N1; l]`.
    TauberTail,
    /// `|F(v_m) - F(v_n)| <= eps/4` on `[N2; N + g(N)]`.
    TauberFValues,
    /// `|F(v_m) - s_n| <= eps` on `[N; N + g(N)]`.
    TauberConclusion,
}

impl Clause {
    pub fn as_str(&self) -> &'static str {
        match self {
            Clause::AbelPartialSums => "abel_partial_sums",
            Clause::AbelPoints => "abel_points",
            Clause::AbelConclusion => "abel_conclusion",
            Clause::TauberTail => "tauber_tail",
            Clause::TauberFValues => "tauber_f_values",
            Clause::TauberConclusion => "tauber_conclusion",
        }
    }
}

/// Result of checking one clause on one window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseReport {
    pub clause: Clause,
    pub window: Window,
    pub holds: bool,
    pub checked: u64,
    pub witness: Option<Witness>,
}

impl ClauseReport {
    fn from_check(clause: Clause, window: Window, c: WindowCheck) -> Self {
        ClauseReport {
            clause,
            window,
            holds: c.holds,
            checked: c.checked,
            witness: c.witness,
        }
    }
}

/// Verdict of a premise or conclusion: the conjunction of its clauses.
/// Clauses are checked in order and checking stops at the first failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoremCheck {
    pub holds: bool,
    pub clauses: Vec<ClauseReport>,
}

impl TheoremCheck {
    fn of(clauses: Vec<ClauseReport>) -> Self {
        TheoremCheck {
            holds: clauses.iter().all(|c| c.holds),
            clauses,
        }
    }

    /// The first failing clause, if any.
    pub fn failure(&self) -> Option<&ClauseReport> {
        self.clauses.iter().find(|c| !c.holds)
    }
}

/// Premise and conclusion of one instance, checked side by side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceVerdict {
    pub premise: TheoremCheck,
    pub conclusion: TheoremCheck,
}

impl InstanceVerdict {
    /// Premise true and conclusion false.
    pub fn is_counterexample(&self) -> bool {
        self.premise.holds && !self.conclusion.holds
    }
}

fn require_positive(what: &str, q: &Rational) -> Result<()> {
    if q.is_positive() {
        Ok(())
    } else {
        Err(Error::config(format!("{what} must be positive, got {q}")))
    }
}

/// Data of the finite Abelian theorem.
///
/// `l_bound` bounds every `|s_n|`; `x_m` are the Abel points.
#[derive(Clone, Debug)]
pub struct AbelInstance {
    pub seq: CoefficientSequence,
    pub points: PointFamily,
    pub l_bound: Rational,
    pub eps: Rational,
    pub gap: GapFunction,
    pub n1: u64,
    pub n2: u64,
    pub p: Natural,
}

impl AbelInstance {
    pub fn validate(&self) -> Result<()> {
        require_positive("eps", &self.eps)?;
        require_positive("L", &self.l_bound)?;
        if self.p == Natural::from(0u32) {
            return Err(Error::config("p must be at least 1"));
        }
        if self.n1 == 0 {
            return Err(Error::config("N1 must be at least 1"));
        }
        if self.n2 < self.points.first_index() {
            return Err(Error::config(format!(
                "N2 = {} precedes the first point index {} of {}",
                self.n2,
                self.points.first_index(),
                self.points.describe()
            )));
        }
        Ok(())
    }

    /// `N = max(N1, N2)`.
    pub fn n(&self) -> u64 {
        self.n1.max(self.n2)
    }

    /// `N + g(N)`.
    pub fn window_end(&self) -> Result<u64> {
        Ok(self.gap.offset_window(self.n())?.hi)
    }

    /// `l = omega(eps / (8 L p), p)`.
    pub fn l(&self) -> Result<Natural> {
        let scale = Rational::from_u64(8) * &self.l_bound * Rational::from_natural(&self.p);
        omega(&self.eps.checked_div(&scale)?, &self.p)
    }

    /// `[N; N + g(N)]`.
    pub fn conclusion_window(&self) -> Result<Window> {
        self.gap.offset_window(self.n())
    }

    /// `[N1; max(N + g(N), l)]`.
    pub fn partial_sum_window(&self) -> Result<Window> {
        let l = to_index(&self.l()?, "l")?;
        Ok(Window::new(self.n1, self.window_end()?.max(l)))
    }

    /// `[N2; N + g(N)]`.
    pub fn points_window(&self) -> Result<Window> {
        Ok(Window::new(self.n2, self.window_end()?))
    }

    /// Checks `|s_i - s_n| <= eps/4` on [`partial_sum_window`](Self::partial_sum_window)
    /// and `1/p <= 1 - x_m <= eps/(8 L N1)` on [`points_window`](Self::points_window).
    pub fn premise(&self) -> Result<TheoremCheck> {
        self.validate()?;
        let w = self.partial_sum_window()?;
        let pred = WindowPredicate::cauchy_partial_sums(
            self.seq.clone(),
            &self.eps / Rational::from_u64(4),
        );
        let c = WindowEvaluator::new(&pred)
            .with_sum_bound(Some(self.l_bound.clone()))
            .with_coeff_bound(None)
            .check(w)?;
        let sums = ClauseReport::from_check(Clause::AbelPartialSums, w, c);
        if !sums.holds {
            return Ok(TheoremCheck::of(alloc::vec![sums]));
        }

        let pw = self.points_window()?;
        let ceiling = Rational::one() - Rational::from_natural(&self.p).recip()?;
        let near = (Rational::from_u64(8) * &self.l_bound * Rational::from_u64(self.n1)).recip()?;
        let floor = Rational::one() - &self.eps * &near;
        let mut points = ClauseReport {
            clause: Clause::AbelPoints,
            window: pw,
            holds: true,
            checked: 0,
            witness: None,
        };
        for m in pw.iter() {
            let x = self.points.point(m)?;
            points.checked += 1;
            let witness = if x > ceiling {
                Some(Witness::PointAbove {
                    m,
                    x,
                    ceiling: ceiling.clone(),
                })
            } else if x < floor {
                Some(Witness::PointBelow {
                    m,
                    x,
                    floor: floor.clone(),
                })
            } else {
                None
            };
            if witness.is_some() {
                points.holds = false;
                points.witness = witness;
                break;
            }
        }
        Ok(TheoremCheck::of(alloc::vec![sums, points]))
    }

    /// Checks `|F(x_m) - s_n| <= eps` on `[N; N + g(N)]`. Every coefficient
    /// touched is checked against `2L`, and `F` is certified with that bound
    /// when the sequence has no closed form.
    pub fn conclusion(&self) -> Result<TheoremCheck> {
        self.validate()?;
        let w = self.conclusion_window()?;
        let two_l = Rational::from_u64(2) * &self.l_bound;
        let pred = WindowPredicate::JointAbel {
            seq: self.seq.clone(),
            eps: self.eps.clone(),
            points: self.points.clone(),
            f_eval: FEval::with_fallback_bound(two_l.clone()),
        };
        let c = WindowEvaluator::new(&pred)
            .with_sum_bound(Some(self.l_bound.clone()))
            .with_coeff_bound(Some(two_l))
            .check(w)?;
        Ok(TheoremCheck::of(alloc::vec![ClauseReport::from_check(
            Clause::AbelConclusion,
            w,
            c
        )]))
    }

    pub fn check(&self) -> Result<InstanceVerdict> {
        Ok(InstanceVerdict {
            premise: self.premise()?,
            conclusion: self.conclusion()?,
        })
    }
}

/// Data of the finite Tauberian theorem, with `F` read at `v_n = 1 - 1/n`.
///
/// `l_bound` bounds every `|a_n|`.
#[derive(Clone, Debug)]
pub struct TauberInstance {
    pub seq: CoefficientSequence,
    pub l_bound: Rational,
    pub eps: Rational,
    pub gap: GapFunction,
    pub n1: u64,
    pub n2: u64,
}

impl TauberInstance {
    pub fn validate(&self) -> Result<()> {
        require_positive("eps", &self.eps)?;
        require_positive("L", &self.l_bound)?;
        if self.n2 == 0 {
            return Err(Error::config(
                "N2 must be at least 1: v_0 = 1 - 1/0 is undefined",
            ));
        }
        Ok(())
    }

    /// `ceil(2 L N1^2 / eps)`.
    pub fn tail_index(&self) -> Result<u64> {
        let n1 = Rational::from_u64(self.n1);
        let q = (Rational::from_u64(2) * &self.l_bound * &n1 * &n1).checked_div(&self.eps)?;
        to_index(&ceil_index(&q)?, "2 L N1^2 / eps")
    }

    /// `N = max(ceil(2 L N1^2 / eps), N2)`.
    pub fn n(&self) -> Result<u64> {
        Ok(self.tail_index()?.max(self.n2))
    }

    /// `p = N + g(N)`.
    pub fn p(&self) -> Result<u64> {
        Ok(self.gap.offset_window(self.n()?)?.hi)
    }

    /// `l = omega(eps / (4 L p), p)`.
    pub fn l(&self) -> Result<Natural> {
        let p = self.p()?;
        let scale = Rational::from_u64(4) * &self.l_bound * Rational::from_u64(p);
        omega(&self.eps.checked_div(&scale)?, &Natural::from(p))
    }

    pub fn conclusion_window(&self) -> Result<Window> {
        Ok(Window::new(self.n()?, self.p()?))
    }

    /// `[N1; l]`.
    pub fn tail_window(&self) -> Result<Window> {
        Ok(Window::new(self.n1, to_index(&self.l()?, "l")?))
    }

    /// `[N2; N + g(N)]`.
    pub fn f_window(&self) -> Result<Window> {
        Ok(Window::new(self.n2, self.p()?))
    }

    fn f_eval(&self) -> FEval {
        FEval::with_fallback_bound(self.l_bound.clone())
    }

    /// Checks `i |a_i| <= eps/8` on `[N1; l]` and `|F(v_m) - F(v_n)| <= eps/4`
    /// on `[N2; N + g(N)]`.
    pub fn premise(&self) -> Result<TheoremCheck> {
        self.validate()?;
        let tw = self.tail_window()?;
        let tail = WindowPredicate::small_tail(self.seq.clone(), &self.eps / Rational::from_u64(8));
        let c = WindowEvaluator::new(&tail)
            .with_coeff_bound(Some(self.l_bound.clone()))
            .check(tw)?;
        let tail_report = ClauseReport::from_check(Clause::TauberTail, tw, c);
        if !tail_report.holds {
            return Ok(TheoremCheck::of(alloc::vec![tail_report]));
        }

        let fw = self.f_window()?;
        let fpred = WindowPredicate::CauchyOfF {
            seq: self.seq.clone(),
            eps: &self.eps / Rational::from_u64(4),
            points: PointFamily::V,
            f_eval: self.f_eval(),
        };
        let c = WindowEvaluator::new(&fpred)
            .with_sum_bound(None)
            .with_coeff_bound(Some(self.l_bound.clone()))
            .check(fw)?;
        let f_report = ClauseReport::from_check(Clause::TauberFValues, fw, c);
        Ok(TheoremCheck::of(alloc::vec![tail_report, f_report]))
    }

    /// Checks `|F(v_m) - s_n| <= eps` on `[N; N + g(N)]`.
    pub fn conclusion(&self) -> Result<TheoremCheck> {
        self.validate()?;
        let w = self.conclusion_window()?;
        let pred = WindowPredicate::JointAbel {
            seq: self.seq.clone(),
            eps: self.eps.clone(),
            points: PointFamily::V,
            f_eval: self.f_eval(),
        };
        let c = WindowEvaluator::new(&pred)
            .with_sum_bound(None)
            .with_coeff_bound(Some(self.l_bound.clone()))
            .check(w)?;
        Ok(TheoremCheck::of(alloc::vec![ClauseReport::from_check(
            Clause::TauberConclusion,
            w,
            c
        )]))
    }

    pub fn check(&self) -> Result<InstanceVerdict> {
        Ok(InstanceVerdict {
            premise: self.premise()?,
            conclusion: self.conclusion()?,
        })
    }
}

pub fn abel_premise_holds(inst: &AbelInstance) -> Result<TheoremCheck> {
    inst.premise()
}

pub fn abel_conclusion_holds(inst: &AbelInstance) -> Result<TheoremCheck> {
    inst.conclusion()
}

pub fn tauber_premise_holds(inst: &TauberInstance) -> Result<TheoremCheck> {
    inst.premise()
}

pub fn tauber_conclusion_holds(inst: &TauberInstance) -> Result<TheoremCheck> {
    inst.conclusion()
}

fn guard(theorem: &str, v: InstanceVerdict) -> Result<InstanceVerdict> {
    if v.is_counterexample() {
        let detail: String = match v.conclusion.failure() {
            Some(r) => format!("{} on {}: {:?}", r.clause.as_str(), r.window, r.witness),
            None => String::new(),
        };
        return Err(Error::Unsound(format!(
            "{theorem}: premise holds but conclusion fails ({detail})"
        )));
    }
    Ok(v)
}

/// Checks an Abel instance and turns a premise-true, conclusion-false outcome
/// into [`Error::Unsound`].
pub fn verify_abel(inst: &AbelInstance) -> Result<InstanceVerdict> {
    guard("abel", inst.check()?)
}

/// Tauberian counterpart of [`verify_abel`].
pub fn verify_tauber(inst: &TauberInstance) -> Result<InstanceVerdict> {
    guard("tauber", inst.check()?)
}
