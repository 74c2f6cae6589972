//! Arithmetic in a prime field F_p.
//!
//! Matrices store raw residues (`u64` values below `p`) next to a shared
//! [`PrimeField`] handle; [`FieldElement`] is the checked, self-describing
//! element type for code that mixes values from different places.

use std::fmt;

use thiserror::Error;

/// 2^31 - 1.
pub const DEFAULT_PRIME: u64 = 2_147_483_647;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} is too large (must be below 2^32)")]
    ModulusTooLarge(u64),
    #[error("operands belong to different fields (p = {0} and p = {1})")]
    ModulusMismatch(u64, u64),
    #[error("division by zero")]
    DivisionByZero,
}

/// A prime field F_p with p < 2^32, so that the product of two residues fits
/// in a `u64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
    // floor(2^64 / p), for Barrett reduction
    barrett: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if p >= 1 << 32 {
            return Err(FieldError::ModulusTooLarge(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        let barrett = ((1u128 << 64) / u128::from(p)) as u64;
        Ok(Self { p, barrett })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Reduce any `u64` into `[0, p)`.
    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        let q = ((u128::from(x) * u128::from(self.barrett)) >> 64) as u64;
        let mut r = x - q * self.p;
        while r >= self.p {
            r -= self.p;
        }
        r
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce(a * b)
    }

    /// `a - f * b`, the elimination kernel.
    #[inline]
    pub fn sub_mul(&self, a: u64, f: u64, b: u64) -> u64 {
        // (p - f) * b + a < 2^64 because every operand is below 2^32.
        self.reduce(self.neg(f) * b + a)
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via extended Euclid.
    pub fn inv(&self, a: u64) -> Result<u64, FieldError> {
        let a = a % self.p;
        if a == 0 {
            return Err(FieldError::DivisionByZero);
        }
        let (mut r0, mut r1) = (self.p as i64, a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(t0.rem_euclid(self.p as i64) as u64)
    }

    /// Map a signed integer into the field.
    pub fn from_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }

    pub fn element(&self, value: u64) -> FieldElement {
        FieldElement {
            value: value % self.p,
            field: *self,
        }
    }
}

impl Default for PrimeField {
    fn default() -> Self {
        Self::new(DEFAULT_PRIME).expect("default modulus is prime")
    }
}

/// Deterministic trial division; p < 2^32 keeps this under 2^16 steps.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// An element of F_p that remembers its field.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    field: PrimeField,
}

impl FieldElement {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    fn same_field(&self, other: &Self) -> Result<(), FieldError> {
        if self.field.p == other.field.p {
            Ok(())
        } else {
            Err(FieldError::ModulusMismatch(self.field.p, other.field.p))
        }
    }

    pub fn add(self, other: Self) -> Result<Self, FieldError> {
        self.same_field(&other)?;
        Ok(self.field.element(self.field.add(self.value, other.value)))
    }

    pub fn sub(self, other: Self) -> Result<Self, FieldError> {
        self.same_field(&other)?;
        Ok(self.field.element(self.field.sub(self.value, other.value)))
    }

    pub fn mul(self, other: Self) -> Result<Self, FieldError> {
        self.same_field(&other)?;
        Ok(self.field.element(self.field.mul(self.value, other.value)))
    }

    pub fn neg(self) -> Self {
        self.field.element(self.field.neg(self.value))
    }

    pub fn inv(self) -> Result<Self, FieldError> {
        Ok(self.field.element(self.field.inv(self.value)?))
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.field.p)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}
