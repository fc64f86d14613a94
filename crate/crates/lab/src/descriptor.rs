//! Serializable descriptions of sequences, gap functions and point families.
//!
//! Rationals are written as strings `"a"` or `"a/b"`. Indices accept either
//! a JSON number or a decimal string and are written back as strings.

use metastab_core::metastability::GapFunction;
use metastab_core::specker::{transform_31, transform_32, BaseSequence};
use metastab_core::{CoefficientSequence, PointFamily, Rational, Result};
use serde::{Deserialize, Serialize};

/// `u64` read from a number or a decimal string, written as a string.
pub mod nat {
    use serde::{de, Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Text {
        Num(u64),
        Str(String),
    }

    fn parse<E: de::Error>(t: Text) -> Result<u64, E> {
        match t {
            Text::Num(n) => Ok(n),
            Text::Str(s) => s
                .trim()
                .parse()
                .map_err(|_| E::custom(format!("expected a natural number, got {s:?}"))),
        }
    }

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        parse(Text::deserialize(d)?)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<u64>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(n) => s.collect_str(n),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u64>, D::Error> {
            Option::<Text>::deserialize(d)?.map(parse).transpose()
        }
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[u64], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for n in v {
                seq.serialize_element(&n.to_string())?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u64>, D::Error> {
            Vec::<Text>::deserialize(d)?
                .into_iter()
                .map(parse)
                .collect()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaseDesc {
    DyadicApproach {},
    RationalApproach {},
    Table { values: Vec<Rational> },
}

impl BaseDesc {
    pub fn build(&self) -> Result<BaseSequence> {
        match self {
            BaseDesc::DyadicApproach {} => Ok(BaseSequence::dyadic_approach()),
            BaseDesc::RationalApproach {} => Ok(BaseSequence::rational_approach()),
            BaseDesc::Table { values } => BaseSequence::table(values.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceDesc {
    Zero {},
    Constant { c: Rational },
    Geometric { r: Rational },
    AlternatingHarmonic {},
    Power { k: u32 },
    Finite { values: Vec<Rational> },
    Specker31 { base: BaseDesc },
    Specker32 { base: BaseDesc },
}

impl SequenceDesc {
    pub fn build(&self) -> Result<CoefficientSequence> {
        Ok(match self {
            SequenceDesc::Zero {} => CoefficientSequence::zero(),
            SequenceDesc::Constant { c } => CoefficientSequence::constant(c.clone()),
            SequenceDesc::Geometric { r } => CoefficientSequence::geometric(r.clone()),
            SequenceDesc::AlternatingHarmonic {} => CoefficientSequence::alternating_harmonic(),
            SequenceDesc::Power { k } => CoefficientSequence::power(*k),
            SequenceDesc::Finite { values } => CoefficientSequence::finite(values.clone()),
            SequenceDesc::Specker31 { base } => transform_31(&base.build()?)?,
            SequenceDesc::Specker32 { base } => transform_32(&base.build()?)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GapDesc {
    Constant {
        #[serde(with = "nat")]
        c: u64,
    },
    /// `a n + b`
    Linear {
        #[serde(with = "nat")]
        a: u64,
        #[serde(with = "nat")]
        b: u64,
    },
    Identity {},
    /// `c0 + c1 n + c2 n^2 + ...`
    Polynomial {
        #[serde(with = "nat::vec")]
        coeffs: Vec<u64>,
    },
    Compose {
        outer: Box<GapDesc>,
        inner: Box<GapDesc>,
    },
    Max {
        left: Box<GapDesc>,
        right: Box<GapDesc>,
    },
    Table {
        #[serde(with = "nat::vec")]
        values: Vec<u64>,
        #[serde(with = "nat", default)]
        default: u64,
    },
}

impl GapDesc {
    pub fn build(&self) -> GapFunction {
        match self {
            GapDesc::Constant { c } => GapFunction::constant(*c),
            GapDesc::Linear { a, b } => GapFunction::linear(*a, *b),
            GapDesc::Identity {} => GapFunction::identity(),
            GapDesc::Polynomial { coeffs } => GapFunction::Polynomial(coeffs.clone()),
            GapDesc::Compose { outer, inner } => GapFunction::compose(outer.build(), inner.build()),
            GapDesc::Max { left, right } => GapFunction::max(left.build(), right.build()),
            GapDesc::Table { values, default } => GapFunction::Table {
                values: values.clone(),
                default: *default,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PointsDesc {
    /// `v_m = 1 - 1/m`
    V {},
    /// `x_m = 1 - 2^-m`
    Dyadic {},
    Explicit {
        values: Vec<Rational>,
    },
}

impl Default for PointsDesc {
    fn default() -> Self {
        PointsDesc::V {}
    }
}

impl PointsDesc {
    pub fn build(&self) -> PointFamily {
        match self {
            PointsDesc::V {} => PointFamily::V,
            PointsDesc::Dyadic {} => PointFamily::Dyadic,
            PointsDesc::Explicit { values } => PointFamily::Explicit(values.clone()),
        }
    }
}
