use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use num_traits::ToPrimitive;

use super::window::Window;
use crate::error::{Error, Result};
use crate::exact::Natural;

/// A total map `g: N -> N`.
///
/// Every variant except `Opaque` is a closed expression that can be written
/// to a scenario file. Expression gaps built from `Constant`, `Linear`,
/// `Polynomial`, `Compose` and `Max` are monotone non-decreasing.
#[derive(Clone)]
pub enum GapFunction {
    Constant(u64),
    /// `a*n + b`
    Linear {
        a: u64,
        b: u64,
    },
    /// `c0 + c1*n + c2*n^2 + ...`
    Polynomial(Vec<u64>),
    /// `outer(inner(n))`
    Compose {
        outer: Box<GapFunction>,
        inner: Box<GapFunction>,
    },
    Max(Box<GapFunction>, Box<GapFunction>),
    /// `values[n]` for `n < len`, `default` afterwards.
    Table {
        values: Vec<u64>,
        default: u64,
    },
    Opaque {
        label: String,
        f: Arc<dyn Fn(u64) -> u64 + Send + Sync>,
    },
}

fn overflow(g: &GapFunction, n: u64) -> Error {
    Error::resource(format!("gap {g} overflows u64 at n = {n}"))
}

impl GapFunction {
    pub fn constant(c: u64) -> Self {
        GapFunction::Constant(c)
    }

    pub fn linear(a: u64, b: u64) -> Self {
        GapFunction::Linear { a, b }
    }

    pub fn identity() -> Self {
        GapFunction::Linear { a: 1, b: 0 }
    }

    pub fn compose(outer: GapFunction, inner: GapFunction) -> Self {
        GapFunction::Compose {
            outer: Box::new(outer),
            inner: Box::new(inner),
        }
    }

    pub fn max(left: GapFunction, right: GapFunction) -> Self {
        GapFunction::Max(Box::new(left), Box::new(right))
    }

    pub fn opaque<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(u64) -> u64 + Send + Sync + 'static,
    {
        GapFunction::Opaque {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    /// True when the gap is a closed, serializable expression.
    pub fn is_expression(&self) -> bool {
        match self {
            GapFunction::Opaque { .. } => false,
            GapFunction::Compose { outer, inner } => outer.is_expression() && inner.is_expression(),
            GapFunction::Max(l, r) => l.is_expression() && r.is_expression(),
            _ => true,
        }
    }

    /// True when monotonicity follows from the shape of the expression.
    pub fn is_structurally_monotone(&self) -> bool {
        match self {
            GapFunction::Constant(_) | GapFunction::Linear { .. } | GapFunction::Polynomial(_) => {
                true
            }
            GapFunction::Compose { outer, inner } => {
                outer.is_structurally_monotone() && inner.is_structurally_monotone()
            }
            GapFunction::Max(l, r) => l.is_structurally_monotone() && r.is_structurally_monotone(),
            GapFunction::Table { .. } | GapFunction::Opaque { .. } => false,
        }
    }

    pub fn eval(&self, n: u64) -> Result<u64> {
        match self {
            GapFunction::Constant(c) => Ok(*c),
            GapFunction::Linear { a, b } => a
                .checked_mul(n)
                .and_then(|v| v.checked_add(*b))
                .ok_or_else(|| overflow(self, n)),
            GapFunction::Polynomial(coeffs) => {
                let mut acc: u64 = 0;
                for c in coeffs.iter().rev() {
                    acc = acc
                        .checked_mul(n)
                        .and_then(|v| v.checked_add(*c))
                        .ok_or_else(|| overflow(self, n))?;
                }
                Ok(acc)
            }
            GapFunction::Compose { outer, inner } => outer.eval(inner.eval(n)?),
            GapFunction::Max(l, r) => Ok(l.eval(n)?.max(r.eval(n)?)),
            GapFunction::Table { values, default } => Ok(usize::try_from(n)
                .ok()
                .and_then(|i| values.get(i).copied())
                .unwrap_or(*default)),
            GapFunction::Opaque { f, .. } => Ok(f(n)),
        }
    }

    /// Arbitrary-precision evaluation, used by bound formulas whose
    /// arguments outgrow machine words.
    pub fn eval_big(&self, n: &Natural) -> Result<Natural> {
        match self {
            GapFunction::Constant(c) => Ok(Natural::from(*c)),
            GapFunction::Linear { a, b } => Ok(n * Natural::from(*a) + Natural::from(*b)),
            GapFunction::Polynomial(coeffs) => {
                let mut acc = Natural::default();
                for c in coeffs.iter().rev() {
                    acc = acc * n + Natural::from(*c);
                }
                Ok(acc)
            }
            GapFunction::Compose { outer, inner } => outer.eval_big(&inner.eval_big(n)?),
            GapFunction::Max(l, r) => Ok(l.eval_big(n)?.max(r.eval_big(n)?)),
            GapFunction::Table { values, default } => Ok(Natural::from(
                n.to_usize()
                    .and_then(|i| values.get(i).copied())
                    .unwrap_or(*default),
            )),
            GapFunction::Opaque { f, label } => {
                let small = n.to_u64().ok_or_else(|| {
                    Error::resource(format!("opaque gap `{label}` cannot take argument {n}"))
                })?;
                Ok(Natural::from(f(small)))
            }
        }
    }

    /// `[n; n + g(n)]`, the window of the metastability statement.
    pub fn offset_window(&self, n: u64) -> Result<Window> {
        let hi = n
            .checked_add(self.eval(n)?)
            .ok_or_else(|| overflow(self, n))?;
        Ok(Window::new(n, hi))
    }

    /// `[n; g(n)]`, the window form used when `g` already returns an endpoint.
    pub fn absolute_window(&self, n: u64) -> Result<Window> {
        Ok(Window::new(n, self.eval(n)?))
    }

    /// `n + g(n)`.
    pub fn tilde(&self, n: u64) -> Result<u64> {
        n.checked_add(self.eval(n)?)
            .ok_or_else(|| overflow(self, n))
    }
}

impl fmt::Display for GapFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GapFunction::Constant(c) => write!(f, "{c}"),
            GapFunction::Linear { a, b } => write!(f, "{a}n+{b}"),
            GapFunction::Polynomial(c) => {
                write!(f, "poly[")?;
                for (i, v) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "]")
            }
            GapFunction::Compose { outer, inner } => write!(f, "compose({outer},{inner})"),
            GapFunction::Max(l, r) => write!(f, "max({l},{r})"),
            GapFunction::Table { values, default } => {
                write!(f, "table[")?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, ";{default}]")
            }
            GapFunction::Opaque { label, .. } => write!(f, "opaque({label})"),
        }
    }
}

impl fmt::Debug for GapFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn expression_values() {
        assert_eq!(GapFunction::linear(2, 3).eval(5).unwrap(), 13);
        assert_eq!(GapFunction::Polynomial(vec![1, 0, 2]).eval(3).unwrap(), 19);
        let c = GapFunction::compose(GapFunction::linear(2, 0), GapFunction::linear(1, 1));
        assert_eq!(c.eval(4).unwrap(), 10);
        let m = GapFunction::max(GapFunction::constant(7), GapFunction::identity());
        assert_eq!(m.eval(3).unwrap(), 7);
        assert_eq!(m.eval(9).unwrap(), 9);
        let t = GapFunction::Table {
            values: vec![4, 1],
            default: 9,
        };
        assert_eq!(
            (t.eval(0).unwrap(), t.eval(1).unwrap(), t.eval(2).unwrap()),
            (4, 1, 9)
        );
    }

    #[test]
    fn big_and_small_agree() {
        let gaps = [
            GapFunction::linear(3, 1),
            GapFunction::Polynomial(vec![2, 1, 1]),
            GapFunction::compose(
                GapFunction::linear(2, 0),
                GapFunction::max(GapFunction::constant(5), GapFunction::identity()),
            ),
            GapFunction::Table {
                values: vec![0, 7, 3],
                default: 2,
            },
        ];
        for g in &gaps {
            for n in 0..40u64 {
                assert_eq!(
                    g.eval_big(&Natural::from(n)).unwrap(),
                    Natural::from(g.eval(n).unwrap())
                );
            }
        }
    }

    #[test]
    fn overflow_is_a_resource_error() {
        let g = GapFunction::linear(u64::MAX, 1);
        assert!(matches!(g.eval(2), Err(Error::Resource(_))));
        assert!(g.eval_big(&Natural::from(2u32)).is_ok());
    }

    #[test]
    fn windows() {
        let g = GapFunction::linear(2, 0);
        assert_eq!(g.offset_window(5).unwrap(), Window::new(5, 15));
        assert_eq!(g.absolute_window(5).unwrap(), Window::new(5, 10));
        assert!(GapFunction::constant(2)
            .absolute_window(5)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn display() {
        let g = GapFunction::max(
            GapFunction::linear(2, 0),
            GapFunction::Polynomial(vec![1, 2]),
        );
        assert_eq!(g.to_string(), "max(2n+0,poly[1,2])");
        assert!(g.is_expression() && g.is_structurally_monotone());
        assert!(!GapFunction::opaque("sq", |n| n * n).is_expression());
    }
}
