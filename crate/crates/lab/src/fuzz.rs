//! Seeded fuzz suites. Instances are drawn sequentially from a ChaCha stream,
//! so a seed fixes the whole suite; evaluation runs in parallel and results
//! are collected in draw order.
//!
//! Every failure is reported as the scenario that reproduces it.

use std::str::FromStr;

use metastab_core::metastability::{
    least_metastable_n, least_metastable_n_with, SearchOptions, WindowPredicate,
};
use metastab_core::rate::{gamma_bound, monotone_metastability_bound, ResourceLimits};
use metastab_core::specker::{check_identity_31, check_identity_32, check_tauber_condition_32};
use metastab_core::theorems::{verify_abel, verify_tauber, AbelInstance, TauberInstance};
use metastab_core::{Error, Natural, PointFamily, Rational, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::descriptor::{BaseDesc, GapDesc, PointsDesc, SequenceDesc};
use crate::scenario::{Command, Scenario};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Abel,
    Tauber,
    Gamma,
    Monotone,
    Specker,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Abel,
        Suite::Tauber,
        Suite::Gamma,
        Suite::Monotone,
        Suite::Specker,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Abel => "abel",
            Suite::Tauber => "tauber",
            Suite::Gamma => "gamma",
            Suite::Monotone => "monotone",
            Suite::Specker => "specker",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown fuzz suite {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FuzzSummary {
    pub suite: Suite,
    pub seed: u64,
    /// Instances the suite asked for.
    pub target: usize,
    pub drawn: usize,
    /// Instances that counted: premise true, bound small enough, and so on.
    pub accepted: usize,
    pub passed: usize,
    pub failures: Vec<String>,
}

impl FuzzSummary {
    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.accepted >= self.target && self.passed == self.accepted
    }
}

/// What one drawn instance amounted to.
enum Trial {
    /// Outside the suite's scope; not counted.
    Skipped,
    Passed,
    Failed(String),
}

fn describe(cmd: Command) -> String {
    serde_json::to_string(&Scenario::new(cmd)).unwrap_or_else(|e| format!("<unprintable: {e}>"))
}

fn frac(
    rng: &mut ChaCha8Rng,
    num: std::ops::RangeInclusive<i64>,
    den: std::ops::RangeInclusive<i64>,
) -> Rational {
    Rational::frac(rng.gen_range(num), rng.gen_range(den))
}

fn signed_sequence(rng: &mut ChaCha8Rng) -> SequenceDesc {
    if rng.gen_bool(0.5) {
        let len = rng.gen_range(1..=7);
        SequenceDesc::Finite {
            values: (0..len).map(|_| frac(rng, -6..=6, 1..=6)).collect(),
        }
    } else {
        let (n, d) = *[(1, 2), (1, 3), (-1, 2), (2, 3), (-1, 3), (1, 4), (-1, 4)]
            .choose(rng)
            .unwrap();
        SequenceDesc::Geometric {
            r: Rational::frac(n, d),
        }
    }
}

fn positive_sequence(rng: &mut ChaCha8Rng) -> SequenceDesc {
    if rng.gen_bool(0.5) {
        let len = rng.gen_range(1..=6);
        SequenceDesc::Finite {
            values: (0..len).map(|_| frac(rng, 0..=4, 1..=6)).collect(),
        }
    } else {
        let (n, d) = *[(1, 2), (1, 3), (1, 4), (2, 3), (1, 5)]
            .choose(rng)
            .unwrap();
        SequenceDesc::Geometric {
            r: Rational::frac(n, d),
        }
    }
}

/// A monotone expression gap.
fn gap(rng: &mut ChaCha8Rng) -> GapDesc {
    match rng.gen_range(0..5) {
        0 => GapDesc::Constant {
            c: rng.gen_range(0..6),
        },
        1 => GapDesc::Linear {
            a: rng.gen_range(0..3),
            b: rng.gen_range(0..4),
        },
        2 => GapDesc::Max {
            left: Box::new(GapDesc::Identity {}),
            right: Box::new(GapDesc::Constant {
                c: rng.gen_range(0..4),
            }),
        },
        3 => GapDesc::Polynomial {
            coeffs: vec![rng.gen_range(0..3), rng.gen_range(0..2)],
        },
        _ => GapDesc::Compose {
            outer: Box::new(GapDesc::Linear {
                a: 1,
                b: rng.gen_range(0..3),
            }),
            inner: Box::new(GapDesc::Constant {
                c: rng.gen_range(0..3),
            }),
        },
    }
}

fn pick(rng: &mut ChaCha8Rng, choices: &[(i64, i64)]) -> Rational {
    let (n, d) = *choices.choose(rng).unwrap();
    Rational::frac(n, d)
}

fn to_u64(n: &Natural) -> u64 {
    u64::try_from(n).unwrap_or(u64::MAX)
}

/// Least `n >= 1` from which `sup_{i >= n} |s_i - s_n| <= target` is
/// guaranteed: the support length for finite sequences, a geometric tail
/// bound otherwise.
fn settling_index(seq: &SequenceDesc, target: &Rational) -> u64 {
    match seq {
        SequenceDesc::Finite { values } => (values.len() as u64).max(1),
        SequenceDesc::Geometric { r } => {
            let q = r.abs();
            let scale = Rational::one() - &q;
            let mut n = 1;
            while q.pow(n) > target * &scale {
                n += 1;
            }
            n
        }
        _ => 1,
    }
}

/// Least `n >= 1` with `i |a_i| <= target` for every `i >= n`.
fn tail_index(seq: &SequenceDesc, target: &Rational) -> u64 {
    match seq {
        SequenceDesc::Finite { values } => (values.len() as u64).max(1),
        SequenceDesc::Geometric { r } => {
            // i q^i decreases once i >= q / (1 - q)
            let q = r.abs();
            let turn = (&q / (Rational::one() - &q)).ceil_natural();
            let mut n = to_u64(&turn).max(1);
            while &(Rational::from_u64(n) * q.pow(n)) > target {
                n += 1;
            }
            n
        }
        _ => 1,
    }
}

fn draw_abel(rng: &mut ChaCha8Rng) -> Result<Command> {
    let sequence = signed_sequence(rng);
    let seq = sequence.build()?;
    let l = seq
        .partial_sum_bound()
        .cloned()
        .unwrap_or_else(Rational::one);
    let eps = pick(rng, &[(1, 10), (1, 4), (1, 2), (1, 1), (2, 1)]);
    let gap = gap(rng);
    let settle = settling_index(&sequence, &(&eps / Rational::from_u64(8)));
    // mostly at or past the settling index, sometimes before it
    let n1 = settle.saturating_sub(rng.gen_range(0..2)).max(1) + rng.gen_range(0..3);
    let n2 = to_u64(&(Rational::from_u64(8) * &l * Rational::from_u64(n1) / &eps).ceil_natural())
        + rng.gen_range(0..4);
    let n = n1.max(n2);
    let p = gap.build().offset_window(n)?.hi + rng.gen_range(0..4);
    Ok(Command::CheckAbel {
        sequence,
        points: PointsDesc::V {},
        l,
        eps,
        gap,
        n1,
        n2,
        p,
    })
}

fn abel_instance(cmd: &Command) -> Result<AbelInstance> {
    let Command::CheckAbel {
        sequence,
        points,
        l,
        eps,
        gap,
        n1,
        n2,
        p,
    } = cmd
    else {
        unreachable!("abel suite draws check-abel scenarios")
    };
    Ok(AbelInstance {
        seq: sequence.build()?,
        points: points.build(),
        l_bound: l.clone(),
        eps: eps.clone(),
        gap: gap.build(),
        n1: *n1,
        n2: *n2,
        p: Natural::from(*p),
    })
}

const ABEL_MAX_WINDOW: u64 = 5000;

fn run_abel(cmd: &Command) -> Result<Trial> {
    let inst = abel_instance(cmd)?;
    if inst.partial_sum_window()?.hi > ABEL_MAX_WINDOW {
        return Ok(Trial::Skipped);
    }
    let v = verify_abel(&inst)?;
    Ok(if !v.premise.holds {
        Trial::Skipped
    } else if v.conclusion.holds {
        Trial::Passed
    } else {
        Trial::Failed(format!("conclusion fails: {}", describe(cmd.clone())))
    })
}

fn draw_tauber(rng: &mut ChaCha8Rng) -> Result<Command> {
    let sequence = signed_sequence(rng);
    let seq = sequence.build()?;
    let l = seq.coeff_bound().cloned().unwrap_or_else(Rational::one);
    let eps = pick(rng, &[(1, 4), (1, 2), (1, 1), (2, 1), (4, 1)]);
    let gap = gap(rng);
    let n1 = tail_index(&sequence, &(&eps / Rational::from_u64(8)))
        .saturating_sub(rng.gen_range(0..2))
        + rng.gen_range(0..2);
    let a = Rational::from_u64(n1);
    let c = to_u64(&(Rational::from_u64(2) * &l * &a * &a / &eps).ceil_natural());
    let n2 = match rng.gen_range(0..3) {
        0 => c.max(1),
        1 => (c / 2).max(1),
        _ => c + rng.gen_range(1..20),
    };
    Ok(Command::CheckTauber {
        sequence,
        l,
        eps,
        gap,
        n1,
        n2,
    })
}

const TAUBER_MAX_WINDOW: u64 = 4000;

fn run_tauber(cmd: &Command) -> Result<Trial> {
    let Command::CheckTauber {
        sequence,
        l,
        eps,
        gap,
        n1,
        n2,
    } = cmd
    else {
        unreachable!("tauber suite draws check-tauber scenarios")
    };
    let inst = TauberInstance {
        seq: sequence.build()?,
        l_bound: l.clone(),
        eps: eps.clone(),
        gap: gap.build(),
        n1: *n1,
        n2: *n2,
    };
    if inst.tail_window()?.hi > TAUBER_MAX_WINDOW {
        return Ok(Trial::Skipped);
    }
    let v = verify_tauber(&inst)?;
    Ok(if !v.premise.holds {
        Trial::Skipped
    } else if v.conclusion.holds {
        Trial::Passed
    } else {
        Trial::Failed(format!("conclusion fails: {}", describe(cmd.clone())))
    })
}

/// Largest bound the gamma suite brute-forces against.
pub const GAMMA_LIMIT: u64 = 1_000_000;

fn draw_gamma(rng: &mut ChaCha8Rng) -> Result<Command> {
    let sequence = positive_sequence(rng);
    let l = sequence
        .build()?
        .partial_sum_bound()
        .cloned()
        .unwrap_or_else(Rational::one);
    // ceil(4L/eps) iterations must stay small for the bound to fit
    let eps = &l * pick(rng, &[(4, 1), (3, 1), (2, 1), (3, 2), (4, 3)]);
    Ok(Command::Gamma {
        l,
        eps,
        gap: gap(rng),
        sequence: Some(sequence),
    })
}

fn run_gamma(cmd: &Command) -> Result<Trial> {
    let Command::Gamma {
        l,
        eps,
        gap,
        sequence: Some(sequence),
    } = cmd
    else {
        unreachable!("gamma suite draws gamma scenarios with a sequence")
    };
    let g = gap.build();
    let bound = match gamma_bound(eps, &g, l, &ResourceLimits::default()) {
        Ok(b) => b.gamma,
        Err(e) if e.is_exhaustion() => return Ok(Trial::Skipped),
        Err(e) => return Err(e),
    };
    if bound > Natural::from(GAMMA_LIMIT) {
        return Ok(Trial::Skipped);
    }
    let pred = WindowPredicate::joint_abel(sequence.build()?, eps.clone(), PointFamily::V);
    let found = least_metastable_n_with(
        &pred,
        &g,
        SearchOptions::offset(to_u64(&bound)).starting_at(1),
    )?
    .found();
    Ok(match found {
        Some(_) => Trial::Passed,
        None => Trial::Failed(format!("no N <= {bound}: {}", describe(cmd.clone()))),
    })
}

fn draw_monotone(rng: &mut ChaCha8Rng) -> Result<(Command, Rational)> {
    // increasing partial sums; the spread is sup s - s_0
    let (sequence, spread) = if rng.gen_bool(0.5) {
        let len = rng.gen_range(1..=14);
        let values: Vec<Rational> = (0..len).map(|_| frac(rng, 0..=5, 1..=6)).collect();
        let spread = values
            .iter()
            .skip(1)
            .fold(Rational::zero(), |acc, v| acc + v);
        (SequenceDesc::Finite { values }, spread)
    } else {
        let r = pick(rng, &[(1, 2), (2, 3), (3, 4), (1, 5)]);
        let spread = &r / (Rational::one() - &r);
        (SequenceDesc::Geometric { r }, spread)
    };
    let spread = if spread.is_positive() {
        spread
    } else {
        Rational::one()
    };
    let eps = Rational::frac(1, rng.gen_range(1..=30));
    let cmd = Command::SearchN {
        sequence,
        predicate: crate::scenario::PredicateDesc::PartialSums {},
        eps,
        gap: gap(rng),
        convention: metastab_core::metastability::WindowConvention::Offset,
        from: 0,
        bound: None,
    };
    Ok((cmd, spread))
}

const MONOTONE_SEARCH_CAP: u64 = 20_000;

fn run_monotone(cmd: &Command, spread: &Rational) -> Result<Trial> {
    let Command::SearchN {
        sequence, eps, gap, ..
    } = cmd
    else {
        unreachable!("monotone suite draws search-n scenarios")
    };
    let g = gap.build();
    // f'(n) = n + g(n) as an absolute endpoint
    let bound = match monotone_metastability_bound(
        eps,
        |n| Ok(n + g.eval_big(n)?),
        spread,
        &ResourceLimits::default(),
    ) {
        Ok(b) => b,
        Err(e) if e.is_exhaustion() => return Ok(Trial::Skipped),
        Err(e) => return Err(e),
    };
    let reach = to_u64(&bound).min(MONOTONE_SEARCH_CAP);
    let pred = WindowPredicate::cauchy_partial_sums(sequence.build()?, eps.clone());
    Ok(match least_metastable_n(&pred, &g, reach)?.found() {
        Some(n) if Natural::from(n) <= bound => Trial::Passed,
        Some(n) => Trial::Failed(format!("N = {n} above {bound}: {}", describe(cmd.clone()))),
        None if Natural::from(reach) >= bound => {
            Trial::Failed(format!("no N <= {bound}: {}", describe(cmd.clone())))
        }
        None => Trial::Skipped,
    })
}

fn draw_specker(rng: &mut ChaCha8Rng) -> Command {
    let mut q = Rational::int(rng.gen_range(-3..=3));
    let len = rng.gen_range(1..=14);
    let mut values = vec![q.clone()];
    for _ in 0..len {
        q = q + frac(rng, 0..=4, 1..=9);
        values.push(q.clone());
    }
    Command::Specker {
        base: BaseDesc::Table { values },
        n_max: 64,
        k_max: 10,
        tail_max: 200,
    }
}

fn run_specker(cmd: &Command) -> Result<Trial> {
    let Command::Specker {
        base,
        n_max,
        k_max,
        tail_max,
    } = cmd
    else {
        unreachable!("specker suite draws specker scenarios")
    };
    let b = base.build()?;
    let reports = [
        check_identity_31(&b, *n_max)?,
        check_identity_32(&b, *k_max)?,
        check_tauber_condition_32(&b, *tail_max)?,
    ];
    Ok(match reports.iter().find(|r| !r.holds()) {
        None => Trial::Passed,
        Some(r) => Trial::Failed(format!(
            "{} fails at {:?}: {}",
            r.identity,
            r.violation,
            describe(cmd.clone())
        )),
    })
}

enum Drawn {
    Plain(Command),
    WithSpread(Command, Rational),
}

fn draw(suite: Suite, rng: &mut ChaCha8Rng) -> Result<Drawn> {
    Ok(match suite {
        Suite::Abel => Drawn::Plain(draw_abel(rng)?),
        Suite::Tauber => Drawn::Plain(draw_tauber(rng)?),
        Suite::Gamma => Drawn::Plain(draw_gamma(rng)?),
        Suite::Monotone => {
            let (c, s) = draw_monotone(rng)?;
            Drawn::WithSpread(c, s)
        }
        Suite::Specker => Drawn::Plain(draw_specker(rng)),
    })
}

fn trial(suite: Suite, d: &Drawn) -> Trial {
    let r = match (suite, d) {
        (Suite::Abel, Drawn::Plain(c)) => run_abel(c),
        (Suite::Tauber, Drawn::Plain(c)) => run_tauber(c),
        (Suite::Gamma, Drawn::Plain(c)) => run_gamma(c),
        (Suite::Monotone, Drawn::WithSpread(c, s)) => run_monotone(c, s),
        (Suite::Specker, Drawn::Plain(c)) => run_specker(c),
        _ => unreachable!("draw and trial agree on the suite"),
    };
    r.unwrap_or_else(|e| {
        let cmd = match d {
            Drawn::Plain(c) | Drawn::WithSpread(c, _) => c.clone(),
        };
        Trial::Failed(format!("error {e}: {}", describe(cmd)))
    })
}

/// Draws in batches until `target` instances are accepted or `max_draws`
/// instances have been drawn.
pub fn run_suite(suite: Suite, seed: u64, target: usize, max_draws: usize) -> FuzzSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = FuzzSummary {
        suite,
        seed,
        target,
        drawn: 0,
        accepted: 0,
        passed: 0,
        failures: Vec::new(),
    };
    while summary.accepted < target && summary.drawn < max_draws {
        let batch = (target - summary.accepted)
            .max(8)
            .min(max_draws - summary.drawn);
        let mut drawn = Vec::with_capacity(batch);
        for _ in 0..batch {
            match draw(suite, &mut rng) {
                Ok(d) => drawn.push(d),
                Err(e) => summary.failures.push(format!("draw failed: {e}")),
            }
        }
        summary.drawn += batch;
        let trials: Vec<Trial> = drawn.par_iter().map(|d| trial(suite, d)).collect();
        for t in trials {
            match t {
                Trial::Skipped => {}
                Trial::Passed => {
                    summary.accepted += 1;
                    summary.passed += 1;
                }
                Trial::Failed(why) => {
                    summary.accepted += 1;
                    summary.failures.push(why);
                }
            }
        }
    }
    summary
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_fix_the_suite() {
        let a = run_suite(Suite::Specker, 7, 5, 50);
        let b = run_suite(Suite::Specker, 7, 5, 50);
        assert_eq!(a, b);
        assert!(a.ok(), "{a:?}");
    }

    #[test]
    fn helpers() {
        let g = SequenceDesc::Geometric {
            r: Rational::frac(1, 2),
        };
        // 2^-n / (1/2) <= 1/8 from n = 4
        assert_eq!(settling_index(&g, &Rational::frac(1, 8)), 4);
        // n 2^-n <= 1/4 from n = 4 (4/16), while 3/8 > 1/4
        assert_eq!(tail_index(&g, &Rational::frac(1, 4)), 4);
        assert_eq!("tauber".parse::<Suite>().unwrap(), Suite::Tauber);
    }
}
