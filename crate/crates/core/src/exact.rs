//! Exact nonnegative reals of the form sqrt(r) with r rational.
//!
//! K and the persistence threshold both carry a square root, but their
//! squares are rational, so every comparison is done on squares.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SqrtRational {
    sq: BigRational,
}

impl SqrtRational {
    pub fn zero() -> Self {
        SqrtRational {
            sq: BigRational::zero(),
        }
    }

    /// The nonnegative square root of `sq`. Negative input clamps to zero.
    pub fn from_square(sq: BigRational) -> Self {
        if sq.is_negative() {
            return Self::zero();
        }
        SqrtRational { sq }
    }

    pub fn from_rational(r: &BigRational) -> Self {
        assert!(!r.is_negative(), "negative value");
        SqrtRational { sq: r * r }
    }

    pub fn from_integer(n: u64) -> Self {
        Self::from_rational(&BigRational::from_integer(n.into()))
    }

    pub fn square(&self) -> &BigRational {
        &self.sq
    }

    pub fn is_zero(&self) -> bool {
        self.sq.is_zero()
    }

    /// Multiplies by a nonnegative rational.
    pub fn scale(&self, c: &BigRational) -> Self {
        assert!(!c.is_negative(), "negative scale");
        SqrtRational {
            sq: &self.sq * c * c,
        }
    }

    /// Multiplies by `sqrt(n)`.
    pub fn mul_sqrt(&self, n: &BigInt) -> Self {
        SqrtRational {
            sq: &self.sq * BigRational::from_integer(n.clone()),
        }
    }

    /// Whether `n >= self`, i.e. an integer count reaches the threshold.
    pub fn reached_by(&self, n: u64) -> bool {
        let n = BigRational::from_integer(n.into());
        self.sq <= &n * &n
    }

    /// Smallest integer `n` with `n >= self`.
    pub fn ceil(&self) -> u64 {
        // isqrt of floor, then adjust
        let fl = self.sq.floor().to_integer();
        let mut n = fl.sqrt().to_u64().expect("threshold fits in u64");
        while !self.reached_by(n) {
            n += 1;
        }
        while n > 0 && self.reached_by(n - 1) {
            n -= 1;
        }
        n
    }

    /// Largest integer `n` with `n <= self`.
    pub fn floor(&self) -> u64 {
        let c = self.ceil();
        if SqrtRational::from_integer(c) == *self {
            c
        } else {
            c - 1
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.sq.to_f64().unwrap_or(f64::INFINITY).sqrt()
    }

    pub fn max(self, other: Self) -> Self {
        if other.sq > self.sq {
            other
        } else {
            self
        }
    }
}

impl PartialOrd for SqrtRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SqrtRational {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sq.cmp(&other.sq)
    }
}

/// Parses `"a/b"`, an integer, or a finite decimal such as `"0.25"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Invalid(format!("not a rational number: {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(a, b));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let int: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        let f: BigInt = frac.parse().map_err(|_| bad())?;
        let mag = int.abs() * &den + f;
        let num = if neg { -mag } else { mag };
        return Ok(BigRational::new(num, den));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

pub fn rational_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
