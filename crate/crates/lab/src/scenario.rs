//! Scenario files: one JSON object, or an array of them, each naming a
//! command and its inputs.

use std::path::Path;

use metastab_core::metastability::{GapFunction, WindowConvention, WindowPredicate};
use metastab_core::rate::ResourceLimits;
use metastab_core::{Error, Rational, Result};
use serde::{Deserialize, Serialize};

use crate::descriptor::{nat, BaseDesc, GapDesc, PointsDesc, SequenceDesc};

pub const DEFAULT_CAP: u64 = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PredicateDesc {
    /// `|s_m - s_n| <= eps`
    PartialSums {},
    /// `|F(x_m) - F(x_n)| <= eps`
    FValues {
        #[serde(default)]
        points: PointsDesc,
    },
    /// `|F(x_m) - s_n| <= eps`
    JointAbel {
        #[serde(default)]
        points: PointsDesc,
    },
    /// `i |a_i| <= eps`
    SmallTail {},
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub struct Limits {
    #[serde(with = "nat")]
    pub max_iterations: u64,
    #[serde(with = "nat")]
    pub max_bits: u64,
}

impl From<&Limits> for ResourceLimits {
    fn from(l: &Limits) -> Self {
        ResourceLimits {
            max_iterations: l.max_iterations,
            max_bits: l.max_bits,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Command {
    CheckAbel {
        sequence: SequenceDesc,
        #[serde(default)]
        points: PointsDesc,
        #[serde(rename = "L")]
        l: Rational,
        eps: Rational,
        gap: GapDesc,
        #[serde(with = "nat")]
        n1: u64,
        #[serde(with = "nat")]
        n2: u64,
        #[serde(with = "nat")]
        p: u64,
    },
    CheckTauber {
        sequence: SequenceDesc,
        #[serde(rename = "L")]
        l: Rational,
        eps: Rational,
        gap: GapDesc,
        #[serde(with = "nat")]
        n1: u64,
        #[serde(with = "nat")]
        n2: u64,
    },
    AbelRate {
        sequence: SequenceDesc,
        #[serde(default)]
        points: PointsDesc,
        #[serde(rename = "L")]
        l: Rational,
        eps: Rational,
        gap: GapDesc,
    },
    TauberRate {
        sequence: SequenceDesc,
        #[serde(rename = "L")]
        l: Rational,
        eps: Rational,
        gap: GapDesc,
    },
    /// The closed-form bound; with a sequence, also the least `N >= 1` it
    /// should dominate.
    Gamma {
        #[serde(rename = "L")]
        l: Rational,
        eps: Rational,
        gap: GapDesc,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sequence: Option<SequenceDesc>,
    },
    Specker {
        base: BaseDesc,
        #[serde(with = "nat", default = "default_n_max")]
        n_max: u64,
        #[serde(default = "default_k_max")]
        k_max: u32,
        #[serde(with = "nat", default = "default_tail_max")]
        tail_max: u64,
    },
    SearchN {
        sequence: SequenceDesc,
        predicate: PredicateDesc,
        eps: Rational,
        gap: GapDesc,
        #[serde(default = "default_convention")]
        convention: WindowConvention,
        #[serde(with = "nat", default)]
        from: u64,
        #[serde(with = "nat::option", default, skip_serializing_if = "Option::is_none")]
        bound: Option<u64>,
    },
}

fn default_n_max() -> u64 {
    64
}

fn default_k_max() -> u32 {
    10
}

fn default_tail_max() -> u64 {
    200
}

fn default_convention() -> WindowConvention {
    WindowConvention::Offset
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CheckAbel { .. } => "check-abel",
            Command::CheckTauber { .. } => "check-tauber",
            Command::AbelRate { .. } => "abel-rate",
            Command::TauberRate { .. } => "tauber-rate",
            Command::Gamma { .. } => "gamma",
            Command::Specker { .. } => "specker",
            Command::SearchN { .. } => "search-n",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub command: Command,
    #[serde(with = "nat::option", default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limits: Option<Limits>,
}

impl Scenario {
    pub fn new(command: Command) -> Self {
        Scenario {
            name: None,
            command,
            cap: None,
            limits: None,
        }
    }

    pub fn cap_or(&self, default: u64) -> u64 {
        self.cap.unwrap_or(default)
    }

    pub fn resource_limits(&self) -> ResourceLimits {
        self.limits
            .as_ref()
            .map(ResourceLimits::from)
            .unwrap_or_default()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    Many(Vec<serde_json::Value>),
    One(serde_json::Value),
}

/// Parses a scenario file; errors name the offending entry.
pub fn parse_scenarios(text: &str) -> Result<Vec<Scenario>> {
    let raw: OneOrMany =
        serde_json::from_str(text).map_err(|e| Error::config(format!("scenario file: {e}")))?;
    let values = match raw {
        OneOrMany::Many(v) => v,
        OneOrMany::One(v) => vec![v],
    };
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            serde_json::from_value(v).map_err(|e| Error::config(format!("scenario #{i}: {e}")))
        })
        .collect()
}

pub fn load_scenarios(path: &Path) -> Result<Vec<Scenario>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
    parse_scenarios(&text)
}

/// Builds the window predicate a `search-n` scenario names.
pub fn build_predicate(
    sequence: &SequenceDesc,
    predicate: &PredicateDesc,
    eps: &Rational,
) -> Result<WindowPredicate> {
    let seq = sequence.build()?;
    Ok(match predicate {
        PredicateDesc::PartialSums {} => WindowPredicate::cauchy_partial_sums(seq, eps.clone()),
        PredicateDesc::FValues { points } => {
            WindowPredicate::cauchy_f(seq, eps.clone(), points.build())
        }
        PredicateDesc::JointAbel { points } => {
            WindowPredicate::joint_abel(seq, eps.clone(), points.build())
        }
        PredicateDesc::SmallTail {} => WindowPredicate::small_tail(seq, eps.clone()),
    })
}

pub fn build_gap(gap: &GapDesc) -> GapFunction {
    gap.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_example_parses() {
        let s = parse_scenarios(
            r#"{"command":"gamma","L":"1","eps":"4","gap":{"kind":"constant","c":0}}"#,
        )
        .unwrap();
        assert_eq!(s.len(), 1);
        assert!(matches!(s[0].command, Command::Gamma { .. }));
    }

    #[test]
    fn batches_and_errors_name_the_entry() {
        let text =
            r#"[{"command":"specker","base":{"kind":"dyadic_approach"}},{"command":"nope"}]"#;
        let err = parse_scenarios(text).unwrap_err();
        assert!(
            matches!(&err, Error::Config(m) if m.starts_with("scenario #1")),
            "{err}"
        );
        let ok = parse_scenarios(
            r#"[{"command":"specker","base":{"kind":"dyadic_approach"},"cap":"10"}]"#,
        )
        .unwrap();
        assert_eq!(ok[0].cap, Some(10));
    }

    #[test]
    fn scenarios_round_trip() {
        let text = r#"{"name":"z","command":"check-abel","sequence":{"kind":"zero"},"points":{"kind":"v"},"L":"1","eps":"1/2","gap":{"kind":"identity"},"n1":"1","n2":"16","p":"32"}"#;
        let s = parse_scenarios(text).unwrap();
        assert_eq!(serde_json::to_string(&s[0]).unwrap(), text);
    }
}
