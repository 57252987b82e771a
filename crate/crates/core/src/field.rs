//! Arithmetic in the prime field F_q.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The order q of a prime field. Always an odd prime with 3 <= q < 2^16.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct FieldModulus(u32);

/// A canonical residue in `[0, q)`. Carries no modulus; the caller supplies it.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct FieldElement(u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

impl FieldModulus {
    pub fn new(q: u64) -> Result<Self> {
        if !(3..1 << 16).contains(&q) || q.is_multiple_of(2) || !is_prime(q) {
            return Err(Error::InvalidModulus(q));
        }
        Ok(FieldModulus(q as u32))
    }

    #[inline]
    pub fn q(self) -> u32 {
        self.0
    }

    /// Reduces an arbitrary integer into the field.
    #[inline]
    pub fn elem(self, v: i64) -> FieldElement {
        FieldElement(v.rem_euclid(self.0 as i64) as u32)
    }

    /// Checked construction from a residue that must already be canonical.
    pub fn try_elem(self, v: u64) -> Result<FieldElement> {
        if v >= self.0 as u64 {
            return Err(Error::OutOfField { value: v, q: self.0 });
        }
        Ok(FieldElement(v as u32))
    }

    #[inline]
    pub fn zero(self) -> FieldElement {
        FieldElement(0)
    }

    #[inline]
    pub fn one(self) -> FieldElement {
        FieldElement(1)
    }

    #[inline]
    pub fn add(self, a: FieldElement, b: FieldElement) -> FieldElement {
        let s = a.0 + b.0;
        FieldElement(if s >= self.0 { s - self.0 } else { s })
    }

    #[inline]
    pub fn sub(self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(if a.0 >= b.0 { a.0 - b.0 } else { a.0 + self.0 - b.0 })
    }

    #[inline]
    pub fn neg(self, a: FieldElement) -> FieldElement {
        if a.0 == 0 {
            a
        } else {
            FieldElement(self.0 - a.0)
        }
    }

    #[inline]
    pub fn mul(self, a: FieldElement, b: FieldElement) -> FieldElement {
        // (q-1)^2 < 2^32 for q < 2^16
        FieldElement(a.0 * b.0 % self.0)
    }

    pub fn pow(self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Inverse by Fermat: b^(q-2).
    pub fn inv(self, b: FieldElement) -> Result<FieldElement> {
        if b.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(b, self.0 as u64 - 2))
    }

    pub fn div(self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Dot product of equal-length slices.
    pub fn dot(self, a: &[FieldElement], b: &[FieldElement]) -> FieldElement {
        debug_assert_eq!(a.len(), b.len());
        let q = self.0 as u64;
        let mut acc = 0u64;
        for (x, y) in a.iter().zip(b) {
            acc += (x.0 as u64) * (y.0 as u64);
            if acc >= 1 << 62 {
                acc %= q;
            }
        }
        FieldElement((acc % q) as u32)
    }

    /// All elements 0, 1, ..., q-1.
    pub fn elements(self) -> impl Iterator<Item = FieldElement> {
        (0..self.0).map(FieldElement)
    }

    /// Legendre symbol style quadratic character: 0, 1 or -1.
    pub fn quadratic_character(self, a: FieldElement) -> i32 {
        if a.0 == 0 {
            return 0;
        }
        if self.pow(a, (self.0 as u64 - 1) / 2) == self.one() {
            1
        } else {
            -1
        }
    }
}

impl<'de> Deserialize<'de> for FieldModulus {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let q = u64::deserialize(d)?;
        FieldModulus::new(q).map_err(serde::de::Error::custom)
    }
}

impl FieldElement {
    #[inline]
    pub fn value(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl std::fmt::Display for FieldElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn field_ops(
    a: FieldElement,
    b: FieldElement,
    op: FieldOp,
    q: FieldModulus,
) -> Result<FieldElement> {
    match op {
        FieldOp::Add => Ok(q.add(a, b)),
        FieldOp::Sub => Ok(q.sub(a, b)),
        FieldOp::Mul => Ok(q.mul(a, b)),
        FieldOp::Div => q.div(a, b),
    }
}
