//! Window claims: a predicate, a window and the verdict a run reported for
//! it. Replaying a claim rebuilds the predicate from its descriptors and
//! evaluates the window from scratch.

use metastab_core::metastability::{check_on, FEval, Window, WindowPredicate};
use metastab_core::{Rational, Result};
use serde::{Deserialize, Serialize};

use crate::descriptor::{PointsDesc, SequenceDesc};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClaimPredicate {
    PartialSums {
        sequence: SequenceDesc,
        eps: Rational,
    },
    FValues {
        sequence: SequenceDesc,
        eps: Rational,
        points: PointsDesc,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        f_bound: Option<Rational>,
    },
    JointAbel {
        sequence: SequenceDesc,
        eps: Rational,
        points: PointsDesc,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        f_bound: Option<Rational>,
    },
    SmallTail {
        sequence: SequenceDesc,
        eps: Rational,
    },
    /// `floor <= x_m <= ceiling` for every `m` in the window.
    PointsBetween {
        points: PointsDesc,
        floor: Rational,
        ceiling: Rational,
    },
}

fn f_eval(bound: &Option<Rational>) -> FEval {
    match bound {
        Some(b) => FEval::with_fallback_bound(b.clone()),
        None => FEval::default(),
    }
}

impl ClaimPredicate {
    /// Evaluates the predicate on `w` without any state from the original run.
    pub fn evaluate(&self, w: Window) -> Result<bool> {
        let pred = match self {
            ClaimPredicate::PartialSums { sequence, eps } => {
                WindowPredicate::cauchy_partial_sums(sequence.build()?, eps.clone())
            }
            ClaimPredicate::FValues {
                sequence,
                eps,
                points,
                f_bound,
            } => WindowPredicate::CauchyOfF {
                seq: sequence.build()?,
                eps: eps.clone(),
                points: points.build(),
                f_eval: f_eval(f_bound),
            },
            ClaimPredicate::JointAbel {
                sequence,
                eps,
                points,
                f_bound,
            } => WindowPredicate::JointAbel {
                seq: sequence.build()?,
                eps: eps.clone(),
                points: points.build(),
                f_eval: f_eval(f_bound),
            },
            ClaimPredicate::SmallTail { sequence, eps } => {
                WindowPredicate::small_tail(sequence.build()?, eps.clone())
            }
            ClaimPredicate::PointsBetween {
                points,
                floor,
                ceiling,
            } => {
                let family = points.build();
                for m in w.iter() {
                    let x = family.point(m)?;
                    if &x < floor || &x > ceiling {
                        return Ok(false);
                    }
                }
                return Ok(true);
            }
        };
        Ok(check_on(&pred, w)?.holds)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Claim {
    pub label: String,
    pub predicate: ClaimPredicate,
    pub window: Window,
    pub holds: bool,
}

impl Claim {
    /// `Ok(None)` when the replay agrees, otherwise a description of the
    /// disagreement.
    pub fn replay(&self) -> Result<Option<String>> {
        let got = self.predicate.evaluate(self.window)?;
        Ok((got != self.holds).then(|| {
            format!(
                "claim `{}` on {}: recorded {}, replay gives {}",
                self.label, self.window, self.holds, got
            )
        }))
    }
}
