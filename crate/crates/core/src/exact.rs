//! Exact scalars and the tail-exponent function `omega`.
//!
//! `Rational` is a canonical-form arbitrary-precision fraction. Every index
//! that comes out of a bound formula is a [`Natural`]; loops that actually
//! enumerate a window convert to `u64` through [`to_index`], which fails with
//! a resource error instead of truncating.

use core::fmt;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use core::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision non-negative integer.
pub type Natural = BigUint;

/// Exact rational number, always stored in lowest terms with a positive
/// denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(Error::domain("rational with zero denominator"));
        }
        Ok(Rational(BigRational::new(numer.into(), denom)))
    }

    /// `n/d` for machine integers; panics on `d == 0`.
    pub fn frac(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn int(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_natural(n: &Natural) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n.clone())))
    }

    pub fn from_u64(n: u64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::domain("reciprocal of zero"));
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::domain("division by zero"));
        }
        Ok(Rational(&self.0 / &rhs.0))
    }

    /// `self^k` by repeated squaring.
    pub fn pow(&self, mut k: u64) -> Self {
        let mut base = self.0.clone();
        let mut acc = BigRational::one();
        while k > 0 {
            if k & 1 == 1 {
                acc *= &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        Rational(acc)
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    /// Ceiling as a natural number; negative values clamp to zero.
    pub fn ceil_natural(&self) -> Natural {
        self.ceil().to_biguint().unwrap_or_default()
    }

    pub fn max(self, other: Rational) -> Rational {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Rational) -> Rational {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn as_big_rational(&self) -> &BigRational {
        &self.0
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::int(n)
    }
}

impl From<u64> for Rational {
    fn from(n: u64) -> Self {
        Rational::from_u64(n)
    }
}

impl From<&Natural> for Rational {
    fn from(n: &Natural) -> Self {
        Rational::from_natural(n)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $tr<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl<'a> $tr<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
        impl<'a, 'b> $tr<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
// Division panics on a zero divisor, like the integer types; use
// `checked_div` when the divisor is data.
forward_binop!(Div, div);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        self.0 *= &rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl fmt::Display for Rational {
    /// `a` for integers, `a/b` otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `a` or `a/b`; the sign belongs on the numerator.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::domain(alloc::format!("malformed rational `{s}`"));
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), Some(d.trim())),
            None => (s, None),
        };
        let numer = BigInt::from_str(num).map_err(|_| bad())?;
        let denom = match den {
            Some(d) => {
                if d.starts_with(['+', '-']) {
                    return Err(bad());
                }
                BigInt::from_str(d).map_err(|_| bad())?
            }
            None => BigInt::one(),
        };
        Rational::new(numer, denom)
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for Rational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let s = <alloc::string::String as serde::Deserialize>::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Converts a bound-derived natural into a loop index.
pub fn to_index(n: &Natural, what: &str) -> Result<u64> {
    n.to_u64()
        .ok_or_else(|| Error::resource(alloc::format!("{what} = {n} exceeds the u64 index range")))
}

/// Least `k` with `2^k >= q`, for `q > 0`.
pub fn ceil_log2(q: &Rational) -> Result<i64> {
    if !q.is_positive() {
        return Err(Error::domain(alloc::format!(
            "ceil_log2 of non-positive {q}"
        )));
    }
    let n = q.numer().magnitude();
    let d = q.denom().magnitude();
    // n <= d * 2^k
    let fits = |k: i64| -> bool {
        if k >= 0 {
            n <= &(d << (k as u64))
        } else {
            &(n << ((-k) as u64)) <= d
        }
    };
    let mut k = n.bits() as i64 - d.bits() as i64;
    while !fits(k) {
        k += 1;
    }
    while fits(k - 1) {
        k -= 1;
    }
    Ok(k)
}

/// The tail exponent `omega(eps, p) = p * max(1, ceil_log2(1/eps))`.
///
/// For every `x` in `[0, 1 - 1/p]` and every `l >= omega(eps, p)` this gives
/// `x^l <= eps`, and `omega(eps, p) >= p`. Base 2 replaces the natural log:
/// `log2(1/eps) >= ln(1/eps)` whenever `eps <= 1`, and `(1 - 1/p)^(p*k) <=
/// e^(-k) <= 2^(-k)`.
pub fn omega(eps: &Rational, p: &Natural) -> Result<Natural> {
    if !eps.is_positive() {
        return Err(Error::domain(alloc::format!(
            "omega needs eps > 0, got {eps}"
        )));
    }
    if p.is_zero() {
        return Err(Error::domain("omega needs p >= 1"));
    }
    let k = ceil_log2(&eps.recip()?)?.max(1) as u64;
    Ok(p * Natural::from(k))
}

/// `omega` for machine-sized `p`.
pub fn omega_u64(eps: &Rational, p: u64) -> Result<Natural> {
    omega(eps, &Natural::from(p))
}

/// Ceiling of a non-negative rational as a natural, as used for index-valued
/// quantities such as `2 L N1^2 / eps`.
pub fn ceil_index(q: &Rational) -> Result<Natural> {
    if q.is_negative() {
        return Err(Error::domain(alloc::format!(
            "index expression {q} is negative"
        )));
    }
    Ok(q.ceil_natural())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_form() {
        let r = Rational::new(6, -4).unwrap();
        assert_eq!(format!("{r}"), "-3/2");
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(2));
        assert_eq!(format!("{}", q("10/5")), "2");
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!("".parse::<Rational>().is_err());
        assert!("1/0".parse::<Rational>().is_err());
        assert!("1/-2".parse::<Rational>().is_err());
        assert!("a/b".parse::<Rational>().is_err());
        assert_eq!(q("-7"), Rational::int(-7));
        assert_eq!(q(" 3 / 9 "), Rational::frac(1, 3));
    }

    #[test]
    fn pow_matches_repeated_product() {
        let x = Rational::frac(3, 4);
        let mut acc = Rational::one();
        for k in 0..20u64 {
            assert_eq!(x.pow(k), acc);
            acc = &acc * &x;
        }
        assert_eq!(x.pow(16), Rational::new(43046721, 4294967296i64).unwrap());
    }

    #[test]
    fn ceil_log2_examples() {
        assert_eq!(ceil_log2(&Rational::one()).unwrap(), 0);
        assert_eq!(ceil_log2(&Rational::int(10)).unwrap(), 4);
        assert_eq!(ceil_log2(&Rational::frac(1, 3)).unwrap(), -1);
        assert_eq!(ceil_log2(&Rational::int(8)).unwrap(), 3);
        assert_eq!(ceil_log2(&Rational::frac(1, 4)).unwrap(), -2);
        assert!(ceil_log2(&Rational::zero()).is_err());
        assert!(ceil_log2(&Rational::int(-1)).is_err());
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega_u64(&Rational::one(), 5).unwrap(), Natural::from(5u32));
        assert_eq!(
            omega_u64(&Rational::frac(1, 2), 2).unwrap(),
            Natural::from(2u32)
        );
        assert_eq!(
            omega_u64(&Rational::frac(1, 10), 4).unwrap(),
            Natural::from(16u32)
        );
        // eps > 1 still yields omega >= p
        assert_eq!(
            omega_u64(&Rational::int(7), 3).unwrap(),
            Natural::from(3u32)
        );
        assert!(omega_u64(&Rational::zero(), 3).is_err());
        assert!(omega_u64(&Rational::one(), 0).is_err());
    }

    #[test]
    fn to_index_overflow_is_resource_error() {
        let big = Natural::from(u64::MAX) + 1u32;
        assert!(matches!(to_index(&big, "l"), Err(Error::Resource(_))));
    }
}
