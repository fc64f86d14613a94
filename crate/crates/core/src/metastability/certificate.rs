use alloc::string::String;

use super::gap::GapFunction;
use super::predicate::WindowPredicate;
use super::search::SearchOutcome;
use super::window::Window;
use crate::exact::{Natural, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Verdict {
    Pass,
    Fail,
    /// A search cap or resource limit ran out before a witness was found.
    Exhausted,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Exhausted => "exhausted",
        }
    }
}

/// Record of one verified check, complete enough to re-run it.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Certificate {
    pub predicate: String,
    pub eps: Rational,
    pub gap: String,
    #[cfg_attr(feature = "serde", serde(with = "natural_text"))]
    pub found_n: Option<Natural>,
    pub window: Option<Window>,
    pub checked_pairs: u64,
    #[cfg_attr(feature = "serde", serde(with = "natural_text"))]
    pub bound_claimed: Option<Natural>,
    pub verdict: Verdict,
}

impl Certificate {
    /// Certificate for a least-`N` search; `bound` is the claimed upper bound
    /// on `N`, when there is one, and a found `N` above it fails.
    pub fn for_search(
        pred: &WindowPredicate,
        g: &GapFunction,
        outcome: &SearchOutcome,
        bound: Option<Natural>,
    ) -> Self {
        let (found_n, window, checked, verdict) = match outcome {
            SearchOutcome::Found { n, window, checked } => {
                let within = bound.as_ref().is_none_or(|b| &Natural::from(*n) <= b);
                (
                    Some(Natural::from(*n)),
                    Some(*window),
                    *checked,
                    if within { Verdict::Pass } else { Verdict::Fail },
                )
            }
            SearchOutcome::NotFoundBelowCap { .. } => (None, None, 0, Verdict::Exhausted),
        };
        Certificate {
            predicate: pred.describe(),
            eps: pred.eps().clone(),
            gap: alloc::format!("{g}"),
            found_n,
            window,
            checked_pairs: checked,
            bound_claimed: bound,
            verdict,
        }
    }
}

#[cfg(feature = "serde")]
mod natural_text {
    use alloc::string::String;

    use serde::{Deserialize, Deserializer, Serializer};

    use crate::exact::Natural;

    pub fn serialize<S: Serializer>(v: &Option<Natural>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(n) => s.collect_str(n),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Natural>, D::Error> {
        let text = Option::<String>::deserialize(d)?;
        text.map(|t| t.parse::<Natural>().map_err(serde::de::Error::custom))
            .transpose()
    }
}
