//! Exact rational scalars and the small numeric trait shared by exact and
//! floating-point code paths.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// `2^e` for any integer exponent.
pub fn pow2(e: i64) -> Rational {
    pow_int(2, e)
}

pub fn pow_int(base: i64, e: i64) -> Rational {
    let b = int(base);
    let mut acc = Rational::one();
    for _ in 0..e.unsigned_abs() {
        acc *= &b;
    }
    if e < 0 {
        acc.recip()
    } else {
        acc
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Recovers the rational with the smallest denominator that is within a few
/// ulps of `x`. Values produced by printing exact rationals (for instance
/// `3^-10`) come back exactly.
pub fn rationalize(x: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    convergent_within(x, 8.0 * f64::EPSILON * x.abs(), None).or_else(|| Rational::from_float(x))
}

/// The first continued-fraction convergent of `x` within `tol`, provided its
/// denominator does not exceed `max_denominator`.
pub fn approximate(x: f64, tol: f64, max_denominator: u64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    convergent_within(x, tol, Some(BigInt::from(max_denominator)))
}

fn convergent_within(x: f64, tol: f64, max_den: Option<BigInt>) -> Option<Rational> {
    if x.abs() <= tol {
        return Some(Rational::zero());
    }
    let neg = x < 0.0;
    let target = x.abs();
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut rest = target;
    for _ in 0..64 {
        let a = rest.floor();
        let ai = BigInt::from(a as u64);
        let h2 = &ai * &h1 + &h0;
        let k2 = &ai * &k1 + &k0;
        if max_den.as_ref().is_some_and(|m| k2 > *m) {
            return None;
        }
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
        let approx = Rational::new(h1.clone(), k1.clone());
        if (to_f64(&approx) - target).abs() <= tol {
            return Some(if neg { -approx } else { approx });
        }
        let frac = rest - a;
        if frac <= 0.0 {
            break;
        }
        rest = 1.0 / frac;
    }
    None
}

/// Parses `"p/q"`, an integer, or a decimal literal exactly.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Some(Rational::from_integer(n));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    let n: BigInt = digits.parse().ok()?;
    let scale = exp - frac_part.len() as i64;
    Some(Rational::from_integer(n) * pow_int(10, scale))
}

/// Canonical text form: `p` or `p/q`.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// `%.{digits}g`-style formatting with a `.` decimal separator.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= digits as i32 {
        let mant = trim_zeros(mant);
        return format!("{mant}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Scalars the extension operator and the Laplacian can be evaluated in.
pub trait Number:
    Clone
    + PartialOrd
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Send
    + Sync
{
    fn nil() -> Self;
    /// Picks the representation of a quantity known both exactly and as `f64`.
    fn from_parts(exact: &Rational, approx: f64) -> Self;
    fn approx(&self) -> f64;
    fn div(&self, other: &Self) -> Self;
    /// Comparison slack: zero for exact scalars.
    fn slack() -> Self;
    fn magnitude(&self) -> Self {
        if *self < Self::nil() {
            Self::nil() - self.clone()
        } else {
            self.clone()
        }
    }
}

impl Number for f64 {
    fn nil() -> Self {
        0.0
    }
    fn from_parts(_exact: &Rational, approx: f64) -> Self {
        approx
    }
    fn approx(&self) -> f64 {
        *self
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn slack() -> Self {
        1e-9
    }
}

impl Number for Rational {
    fn nil() -> Self {
        <Rational as Zero>::zero()
    }
    fn from_parts(exact: &Rational, _approx: f64) -> Self {
        exact.clone()
    }
    fn approx(&self) -> f64 {
        to_f64(self)
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn slack() -> Self {
        <Rational as Zero>::zero()
    }
}
