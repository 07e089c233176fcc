//! Exact number types: reduced rationals and quadratic radii `u + v·√D`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a
/// positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        Rational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
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

    /// -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        match self.0.numer().sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn square(&self) -> Self {
        Rational(&self.0 * &self.0)
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Precondition("reciprocal of zero".into()));
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn checked_div(&self, other: &Rational) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::Precondition("division by zero".into()));
        }
        Ok(Rational(&self.0 / &other.0))
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Exact square root when `self` is the square of a rational.
    pub fn sqrt_exact(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        if &(&n * &n) == self.numer() && &(&d * &d) == self.denom() {
            Some(Rational::new(n, d))
        } else {
            None
        }
    }

    /// Smallest integer `n ≥ 0` with `n² ≥ self`.
    pub fn ceil_sqrt(&self) -> BigInt {
        if !self.is_positive() {
            return BigInt::zero();
        }
        let c = self.ceil();
        let mut s = c.sqrt();
        if &s * &s < c {
            s += 1;
        }
        s
    }

    /// Largest rational with denominator `2^bits` whose square does not exceed `self`.
    pub fn floor_sqrt_dyadic(&self, bits: u32) -> Self {
        if !self.is_positive() {
            return Rational::zero();
        }
        let scale = BigInt::one() << (2 * bits as usize);
        let scaled = (self.clone() * Rational::from_integer(scale)).floor();
        Rational::new(scaled.sqrt(), BigInt::one() << bits as usize)
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    /// Parse `"p/q"`, an integer, or a finite decimal such as `"-48.15"`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("not a rational: {s:?}"));
        if s.is_empty() {
            return Err(bad());
        }
        if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            return Ok(Rational::new(p, q));
        }
        if let Some((int, frac)) = s.split_once('.') {
            let negative = int.starts_with('-');
            let int_digits = int.trim_start_matches(['-', '+']);
            if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            if !int_digits.bytes().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let digits = format!("{int_digits}{frac}");
            let mag: BigInt = digits.parse().map_err(|_| bad())?;
            let den = num_traits::pow(BigInt::from(10), frac.len());
            let r = Rational::new(mag, den);
            return Ok(if negative { -r } else { r });
        }
        let n: BigInt = s.parse().map_err(|_| bad())?;
        Ok(Rational::from_integer(n))
    }
}

impl fmt::Display for Rational {
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
    fn from_str(s: &str) -> Result<Self> {
        Rational::parse(s)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_integer(n)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        // Accept both "p/q" strings and bare JSON integers.
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Int(i64),
        }
        match Raw::deserialize(d)? {
            Raw::Str(s) => Rational::parse(&s).map_err(serde::de::Error::custom),
            Raw::Int(n) => Ok(Rational::from(n)),
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
// Division by zero panics, like the underlying BigRational; use
// `checked_div` on untrusted input.
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

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

/// The real number `u + v·√D` with rational `u`, `v` and `D > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadRadius {
    pub u: Rational,
    pub v: Rational,
    pub d: Rational,
}

impl QuadRadius {
    pub fn new(u: Rational, v: Rational, d: Rational) -> Result<Self> {
        if !d.is_positive() {
            return Err(Error::Precondition(format!("radicand must be positive, got {d}")));
        }
        Ok(QuadRadius { u, v, d })
    }

    /// `(c - ε)²` for `c = k·√D`, i.e. `k²D + ε² - 2kε·√D`.
    pub fn square_of_difference(k: &Rational, d: &Rational, eps: &Rational) -> Result<Self> {
        QuadRadius::new(
            k.square() * d + eps.square(),
            -(Rational::from(2) * k * eps),
            d.clone(),
        )
    }

    pub fn to_f64(&self) -> f64 {
        self.u.to_f64() + self.v.to_f64() * self.d.to_f64().sqrt()
    }

    pub fn sign(&self) -> Ordering {
        cmp_rational_quad(&Rational::zero(), self).reverse()
    }
}

impl fmt::Display for QuadRadius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.d.sqrt_exact() {
            return write!(f, "{}", &self.u + &self.v * r);
        }
        let root = if self.v.abs() == Rational::one() {
            format!("sqrt({})", self.d)
        } else {
            format!("{}*sqrt({})", self.v.abs(), self.d)
        };
        match (self.u.is_zero(), self.v.is_negative()) {
            (true, false) => write!(f, "{root}"),
            (true, true) => write!(f, "-{root}"),
            (false, false) => write!(f, "{} + {root}", self.u),
            (false, true) => write!(f, "{} - {root}", self.u),
        }
    }
}

impl Serialize for QuadRadius {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Exact comparison of a rational `q` against `u + v·√D`.
pub fn cmp_rational_quad(q: &Rational, alpha: &QuadRadius) -> Ordering {
    let s = q - &alpha.u;
    let sv = alpha.v.signum();
    if sv == 0 {
        return s.signum().cmp(&0);
    }
    let ss = s.signum();
    if ss != sv {
        return if ss != 0 { ss.cmp(&0) } else { (-sv).cmp(&0) };
    }
    // Same sign: compare |s| with |v|·√D through squares.
    let lhs = s.square();
    let rhs = alpha.v.square() * &alpha.d;
    let mag = lhs.cmp(&rhs);
    if sv > 0 {
        mag
    } else {
        mag.reverse()
    }
}

/// A squared radius, either rational or of the form `u + v·√D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RadiusSq {
    Exact(Rational),
    Quad(QuadRadius),
}

impl RadiusSq {
    pub fn exact(q: Rational) -> Self {
        RadiusSq::Exact(q)
    }

    /// Squared radius of a rational radius `rho`.
    pub fn from_radius(rho: &Rational) -> Self {
        RadiusSq::Exact(rho.square())
    }

    /// Whether a point at squared distance `sq` lies in the closed ball.
    pub fn admits(&self, sq: &Rational) -> bool {
        match self {
            RadiusSq::Exact(r) => sq <= r,
            RadiusSq::Quad(q) => cmp_rational_quad(sq, q) != Ordering::Greater,
        }
    }

    /// Exact comparison of `self` against a rational.
    pub fn cmp_rational(&self, q: &Rational) -> Ordering {
        match self {
            RadiusSq::Exact(r) => r.cmp(q),
            RadiusSq::Quad(a) => cmp_rational_quad(q, a).reverse(),
        }
    }

    /// A rational upper bound on the squared radius.
    pub fn upper_bound(&self) -> Rational {
        match self {
            RadiusSq::Exact(r) => r.clone(),
            RadiusSq::Quad(q) => {
                // √D ≤ ⌈√D⌉ for the positive part of v.
                let root = Rational::from(q.d.ceil_sqrt());
                if q.v.is_negative() {
                    let root_lo = q.d.floor_sqrt_dyadic(0);
                    &q.u + &q.v * root_lo
                } else {
                    &q.u + &q.v * root
                }
            }
        }
    }

    /// Smallest integer `n` with `n ≥ ρ`.
    pub fn ceil_radius(&self) -> BigInt {
        self.upper_bound().ceil_sqrt()
    }

    pub fn is_positive(&self) -> bool {
        self.cmp_rational(&Rational::zero()) == Ordering::Greater
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            RadiusSq::Exact(r) => r.to_f64(),
            RadiusSq::Quad(q) => q.to_f64(),
        }
    }
}

impl fmt::Display for RadiusSq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadiusSq::Exact(r) => write!(f, "{r}"),
            RadiusSq::Quad(q) => write!(f, "{q}"),
        }
    }
}

impl Serialize for RadiusSq {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Least common multiple of the denominators of `values`.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub(crate) fn big_to_i64(n: &BigInt) -> Result<i64> {
    n.to_i64()
        .ok_or_else(|| Error::Overflow(format!("integer {n} does not fit in 64 bits")))
}

pub(crate) fn big_to_i128(n: &BigInt) -> Result<i128> {
    n.to_i128()
        .ok_or_else(|| Error::Overflow(format!("integer {n} does not fit in 128 bits")))
}
