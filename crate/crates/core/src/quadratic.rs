//! Exact arithmetic in the real quadratic field Q[√5].
//!
//! Every value is `a + b·√5` with `a`, `b` arbitrary-precision rationals.
//! Comparison is exact: the sign of `a + b√5` is decided by comparing `a²`
//! against `5b²` when `a` and `b` disagree in sign. The same type doubles as
//! the distance type of both concrete systems (shift distances are dyadic
//! rationals with `b = 0`).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::ParseError;

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct QuadraticNumber {
    a: BigRational,
    b: BigRational,
}

/// Distances are exact elements of Q[√5].
pub type Distance = QuadraticNumber;

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl QuadraticNumber {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        QuadraticNumber { a, b }
    }

    pub fn from_ratio(a: BigRational) -> Self {
        QuadraticNumber { a, b: BigRational::zero() }
    }

    /// `n / d` as an element with no √5 part.
    pub fn frac(n: i64, d: i64) -> Self {
        Self::from_ratio(ratio(n, d))
    }

    pub fn integer(n: i64) -> Self {
        Self::frac(n, 1)
    }

    /// `(a_n/a_d) + (b_n/b_d)·√5`.
    pub fn from_parts(a_n: i64, a_d: i64, b_n: i64, b_d: i64) -> Self {
        QuadraticNumber { a: ratio(a_n, a_d), b: ratio(b_n, b_d) }
    }

    pub fn sqrt5() -> Self {
        Self::from_parts(0, 1, 1, 1)
    }

    /// `2^exp` for any integer exponent.
    pub fn pow2(exp: i64) -> Self {
        let p = BigInt::one() << exp.unsigned_abs();
        if exp >= 0 {
            Self::from_ratio(BigRational::from_integer(p))
        } else {
            Self::from_ratio(BigRational::new(BigInt::one(), p))
        }
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn sqrt5_part(&self) -> &BigRational {
        &self.b
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&BigRational::zero());
        let sb = self.b.cmp(&BigRational::zero());
        match (sa, sb) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (s, t) if s == t => s,
            (sa, _) => {
                // opposite signs: |a| vs |b|√5
                let a2 = &self.a * &self.a;
                let b2 = &self.b * &self.b * BigRational::from_integer(BigInt::from(5));
                match a2.cmp(&b2) {
                    Ordering::Greater => sa,
                    Ordering::Less => sa.reverse(),
                    Ordering::Equal => Ordering::Equal,
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Galois conjugate `a − b√5`.
    pub fn conjugate(&self) -> Self {
        QuadraticNumber { a: self.a.clone(), b: -&self.b }
    }

    /// Field norm `a² − 5b²`.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - &self.b * &self.b * BigRational::from_integer(BigInt::from(5))
    }

    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        let c = self.conjugate();
        Some(QuadraticNumber { a: c.a / &n, b: c.b / n })
    }

    /// Exact floor. Writes the value as `(p + q√5)/den` over integers and
    /// uses `floor(q√5) = ±isqrt(5q²)` (√5 is irrational, so `q√5` is never an
    /// integer unless `q = 0`).
    pub fn floor(&self) -> BigInt {
        let den = self.a.denom().lcm(self.b.denom());
        let p = self.a.numer() * (&den / self.a.denom());
        let q = self.b.numer() * (&den / self.b.denom());
        let floor_q_sqrt5 = if q.is_zero() {
            BigInt::zero()
        } else {
            let s = (&q * &q * BigInt::from(5)).sqrt();
            if q.is_positive() {
                s
            } else {
                -s - BigInt::one()
            }
        };
        (p + floor_q_sqrt5).div_floor(&den)
    }

    /// Representative in `[0, 1)`.
    pub fn fract(&self) -> Self {
        let f = self.floor();
        QuadraticNumber { a: &self.a - BigRational::from_integer(f), b: self.b.clone() }
    }

    /// Representative of the class mod 1 in `(−1/2, 1/2]`.
    pub fn centered_mod_one(&self) -> Self {
        let f = self.fract();
        if f > Self::frac(1, 2) {
            f - Self::integer(1)
        } else {
            f
        }
    }

    pub fn pow(&self, exp: i64) -> Self {
        let base = if exp < 0 {
            self.recip().expect("negative power of zero")
        } else {
            self.clone()
        };
        let mut result = Self::integer(1);
        let mut acc = base;
        let mut e = exp.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &acc;
            }
            acc = &acc * &acc;
            e >>= 1;
        }
        result
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * 5f64.sqrt()
    }

    /// Exact text form `a/b+c/d*s5`; both fractions always carry a denominator.
    pub fn to_token(&self) -> String {
        format!(
            "{}/{}+{}/{}*s5",
            self.a.numer(),
            self.a.denom(),
            self.b.numer(),
            self.b.denom()
        )
    }

    /// Plain `n/d` rendering, only meaningful for rational values.
    pub fn to_fraction_string(&self) -> String {
        debug_assert!(self.is_rational());
        format!("{}/{}", self.a.numer(), self.a.denom())
    }
}

fn parse_ratio(s: &str) -> Result<BigRational, ParseError> {
    let s = s.trim();
    let bad = || ParseError::Number(s.to_string());
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

impl FromStr for QuadraticNumber {
    type Err = ParseError;

    /// Accepts `a/b+c/d*s5`, plain rationals `n/d`, and powers of two `2^-k`.
    fn from_str(s: &str) -> Result<Self, ParseError> {
        let s = s.trim();
        if let Some(exp) = s.strip_prefix("2^") {
            let e: i64 = exp.parse().map_err(|_| ParseError::Number(s.to_string()))?;
            return Ok(Self::pow2(e));
        }
        match s.strip_suffix("*s5") {
            Some(body) => {
                let (a, b) = body
                    .rsplit_once('+')
                    .ok_or_else(|| ParseError::Number(s.to_string()))?;
                Ok(QuadraticNumber { a: parse_ratio(a)?, b: parse_ratio(b)? })
            }
            None => Ok(Self::from_ratio(parse_ratio(s)?)),
        }
    }
}

impl fmt::Display for QuadraticNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            write!(f, "{}", self.to_fraction_string())
        } else {
            write!(f, "{}", self.to_token())
        }
    }
}

impl PartialOrd for QuadraticNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadraticNumber {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

impl Zero for QuadraticNumber {
    fn zero() -> Self {
        QuadraticNumber::default()
    }

    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl One for QuadraticNumber {
    fn one() -> Self {
        Self::integer(1)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl<'a> $trait<&'a QuadraticNumber> for &'a QuadraticNumber {
            type Output = QuadraticNumber;
            fn $method(self, rhs: &'a QuadraticNumber) -> QuadraticNumber {
                #[allow(clippy::redundant_closure_call)]
                ($body)(self, rhs)
            }
        }
        impl $trait<QuadraticNumber> for QuadraticNumber {
            type Output = QuadraticNumber;
            fn $method(self, rhs: QuadraticNumber) -> QuadraticNumber {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a QuadraticNumber> for QuadraticNumber {
            type Output = QuadraticNumber;
            fn $method(self, rhs: &'a QuadraticNumber) -> QuadraticNumber {
                (&self).$method(rhs)
            }
        }
        impl<'a> $trait<QuadraticNumber> for &'a QuadraticNumber {
            type Output = QuadraticNumber;
            fn $method(self, rhs: QuadraticNumber) -> QuadraticNumber {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, |x: &QuadraticNumber, y: &QuadraticNumber| QuadraticNumber {
    a: &x.a + &y.a,
    b: &x.b + &y.b,
});
forward_binop!(Sub, sub, |x: &QuadraticNumber, y: &QuadraticNumber| QuadraticNumber {
    a: &x.a - &y.a,
    b: &x.b - &y.b,
});
forward_binop!(Mul, mul, |x: &QuadraticNumber, y: &QuadraticNumber| {
    let five = BigRational::from_integer(BigInt::from(5));
    QuadraticNumber {
        a: &x.a * &y.a + &x.b * &y.b * five,
        b: &x.a * &y.b + &x.b * &y.a,
    }
});
forward_binop!(Div, div, |x: &QuadraticNumber, y: &QuadraticNumber| {
    x * &y.recip().expect("division by zero in Q[sqrt5]")
});

impl Neg for QuadraticNumber {
    type Output = QuadraticNumber;
    fn neg(self) -> QuadraticNumber {
        QuadraticNumber { a: -self.a, b: -self.b }
    }
}

impl Neg for &QuadraticNumber {
    type Output = QuadraticNumber;
    fn neg(self) -> QuadraticNumber {
        QuadraticNumber { a: -&self.a, b: -&self.b }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(a_n: i64, a_d: i64, b_n: i64, b_d: i64) -> QuadraticNumber {
        QuadraticNumber::from_parts(a_n, a_d, b_n, b_d)
    }

    #[test]
    fn sign_of_mixed_terms() {
        // 3 - √5 > 0, 2 - √5 < 0, -9/4 + √5 < 0
        assert!(q(3, 1, -1, 1).is_positive());
        assert!(q(2, 1, -1, 1).is_negative());
        assert!(q(-9, 4, 1, 1).is_negative());
        assert!(q(-2, 1, 1, 1).is_positive());
        assert_eq!(QuadraticNumber::zero().signum(), Ordering::Equal);
    }

    #[test]
    fn floor_matches_known_values() {
        assert_eq!(QuadraticNumber::sqrt5().floor(), BigInt::from(2));
        assert_eq!((-QuadraticNumber::sqrt5()).floor(), BigInt::from(-3));
        assert_eq!(q(1, 2, 1, 2).floor(), BigInt::from(1)); // golden ratio
        assert_eq!(q(-7, 3, 0, 1).floor(), BigInt::from(-3));
        assert_eq!(q(5, 1, 0, 1).floor(), BigInt::from(5));
        // 1000·√5 = 2236.06...
        assert_eq!(q(0, 1, 1000, 1).floor(), BigInt::from(2236));
    }

    #[test]
    fn golden_ratio_identity() {
        let phi = q(1, 2, 1, 2);
        assert_eq!(&phi * &phi, &phi + &QuadraticNumber::one());
        let lambda = q(3, 2, 1, 2);
        assert_eq!(lambda.recip().unwrap(), q(3, 2, -1, 2));
    }

    #[test]
    fn token_round_trip() {
        let x = q(-3, 7, 5, 11);
        assert_eq!(x.to_token(), "-3/7+5/11*s5");
        assert_eq!(x.to_token().parse::<QuadraticNumber>().unwrap(), x);
        assert_eq!("2^-6".parse::<QuadraticNumber>().unwrap(), QuadraticNumber::frac(1, 64));
        assert_eq!("1/64".parse::<QuadraticNumber>().unwrap(), QuadraticNumber::frac(1, 64));
        assert!("1/0".parse::<QuadraticNumber>().is_err());
    }

    fn arb() -> impl Strategy<Value = QuadraticNumber> {
        (-50i64..50, 1i64..20, -50i64..50, 1i64..20).prop_map(|(a, b, c, d)| q(a, b, c, d))
    }

    proptest! {
        #[test]
        fn order_agrees_with_floating_point(x in arb(), y in arb()) {
            let (fx, fy) = (x.to_f64(), y.to_f64());
            if (fx - fy).abs() > 1e-9 {
                prop_assert_eq!(x < y, fx < fy);
            }
        }

        #[test]
        fn fract_lies_in_unit_interval(x in arb()) {
            let f = x.fract();
            prop_assert!(f >= QuadraticNumber::zero());
            prop_assert!(f < QuadraticNumber::one());
            prop_assert!((&x - &f).is_rational());
            let c = x.centered_mod_one();
            prop_assert!(c > QuadraticNumber::frac(-1, 2) && c <= QuadraticNumber::frac(1, 2));
        }

        #[test]
        fn field_inverse(x in arb()) {
            prop_assume!(!x.is_zero());
            prop_assert_eq!(&x * &x.recip().unwrap(), QuadraticNumber::one());
        }
    }
}
