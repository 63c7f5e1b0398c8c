//! Finite-field arithmetic over GF(q).
//!
//! Two field families are supported: prime fields GF(p) with `p <= 2^16`, and
//! the byte-oriented binary field GF(2^8). Symbols are carried around as plain
//! `u32` values in `[0, q)`; a [`Field`] is a small `Copy` handle that knows how
//! to combine them. [`FieldElement`] pairs a value with its field for the
//! checked, mixed-field-aware API.
//!
//! GF(2^8) uses the reduction polynomial `X^8 + X^4 + X^3 + X^2 + 1` (0x11D).
//! Share files depend on it, so it must never change.

use std::fmt;

use thiserror::Error;

/// Reduction polynomial of GF(2^8), `X^8 + X^4 + X^3 + X^2 + 1`.
pub const GF256_POLY: u32 = 0x11D;

/// Largest modulus accepted for a prime field.
pub const MAX_PRIME_MODULUS: u32 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GfError {
    #[error("{0} is not a prime in [2, 65536]")]
    InvalidModulus(u32),
    #[error("unsupported binary field reduction polynomial {0:#x}; only 0x11d is allowed")]
    InvalidPolynomial(u32),
    #[error("operands belong to different fields ({0} and {1})")]
    FieldMismatch(Field, Field),
    #[error("division by zero")]
    DivisionByZero,
    #[error("index {index} out of range for a field of order {order}")]
    OutOfRange { index: u64, order: u32 },
}

/// Which family a [`Field`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldKind {
    Prime,
    Binary8,
}

/// A finite field description: the prime `p` for GF(p), or the reduction
/// polynomial for GF(2^8).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Field {
    kind: FieldKind,
    modulus: u32,
}

const fn build_gf256_tables() -> ([u8; 512], [u8; 256]) {
    let mut exp = [0u8; 512];
    let mut log = [0u8; 256];
    let mut x: u32 = 1;
    let mut i = 0;
    while i < 255 {
        exp[i] = x as u8;
        log[x as usize] = i as u8;
        x <<= 1;
        if x & 0x100 != 0 {
            x ^= GF256_POLY;
        }
        i += 1;
    }
    while i < 512 {
        exp[i] = exp[i - 255];
        i += 1;
    }
    (exp, log)
}

// 2 generates the multiplicative group modulo 0x11D.
static GF256_EXP: [u8; 512] = build_gf256_tables().0;
static GF256_LOG: [u8; 256] = build_gf256_tables().1;

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut f = 2u32;
    while f * f <= p {
        if p.is_multiple_of(f) {
            return false;
        }
        f += 1;
    }
    true
}

impl Field {
    /// The prime field GF(p).
    pub fn prime(p: u32) -> Result<Self, GfError> {
        if p > MAX_PRIME_MODULUS || !is_prime(p) {
            return Err(GfError::InvalidModulus(p));
        }
        Ok(Self {
            kind: FieldKind::Prime,
            modulus: p,
        })
    }

    /// GF(2^8) with the canonical reduction polynomial.
    pub const fn gf256() -> Self {
        Self {
            kind: FieldKind::Binary8,
            modulus: GF256_POLY,
        }
    }

    /// Rebuild a field from its serialized `(kind, modulus)` pair.
    pub fn from_parts(kind: FieldKind, modulus: u32) -> Result<Self, GfError> {
        match kind {
            FieldKind::Prime => Self::prime(modulus),
            FieldKind::Binary8 if modulus == GF256_POLY => Ok(Self::gf256()),
            FieldKind::Binary8 => Err(GfError::InvalidPolynomial(modulus)),
        }
    }

    /// Smallest prime field with at least `min_order` elements.
    pub fn smallest_prime_at_least(min_order: u32) -> Result<Self, GfError> {
        let mut p = min_order.max(2);
        while !is_prime(p) {
            p += 1;
        }
        Self::prime(p)
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    /// The prime for GF(p), the reduction polynomial for GF(2^8).
    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// Number of elements q.
    pub fn order(&self) -> u32 {
        match self.kind {
            FieldKind::Prime => self.modulus,
            FieldKind::Binary8 => 256,
        }
    }

    #[inline]
    pub fn contains(&self, value: u32) -> bool {
        value < self.order()
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        debug_assert!(self.contains(a) && self.contains(b));
        match self.kind {
            FieldKind::Prime => {
                let s = a + b;
                if s >= self.modulus {
                    s - self.modulus
                } else {
                    s
                }
            }
            FieldKind::Binary8 => a ^ b,
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        match self.kind {
            FieldKind::Prime if a == 0 => 0,
            FieldKind::Prime => self.modulus - a,
            FieldKind::Binary8 => a,
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        debug_assert!(self.contains(a) && self.contains(b));
        match self.kind {
            FieldKind::Prime => ((a as u64 * b as u64) % self.modulus as u64) as u32,
            FieldKind::Binary8 => {
                if a == 0 || b == 0 {
                    0
                } else {
                    let l = GF256_LOG[a as usize] as usize + GF256_LOG[b as usize] as usize;
                    GF256_EXP[l] as u32
                }
            }
        }
    }

    pub fn pow(&self, base: u32, mut exp: u64) -> u32 {
        let mut acc = 1;
        let mut b = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u32) -> Result<u32, GfError> {
        if a == 0 {
            return Err(GfError::DivisionByZero);
        }
        Ok(match self.kind {
            FieldKind::Prime => self.pow(a, (self.modulus - 2) as u64),
            FieldKind::Binary8 => GF256_EXP[255 - GF256_LOG[a as usize] as usize] as u32,
        })
    }

    pub fn div(&self, a: u32, b: u32) -> Result<u32, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Canonical enumeration of the field: residue `index` in GF(p), the byte
    /// `index` in GF(2^8). Injective on `[0, q)` with `element_at(0) = 0`.
    pub fn element_at(&self, index: u64) -> Result<FieldElement, GfError> {
        if index >= self.order() as u64 {
            return Err(GfError::OutOfRange {
                index,
                order: self.order(),
            });
        }
        Ok(FieldElement {
            field: *self,
            value: index as u32,
        })
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            field: *self,
            value: 0,
        }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement {
            field: *self,
            value: 1,
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FieldKind::Prime => write!(f, "GF({})", self.modulus),
            FieldKind::Binary8 => write!(f, "GF(2^8)"),
        }
    }
}

/// A value tagged with the field it lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    field: Field,
    value: u32,
}

impl FieldElement {
    pub fn new(field: Field, value: u32) -> Result<Self, GfError> {
        if !field.contains(value) {
            return Err(GfError::OutOfRange {
                index: value as u64,
                order: field.order(),
            });
        }
        Ok(Self { field, value })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    fn same_field(&self, other: &Self) -> Result<Field, GfError> {
        if self.field != other.field {
            return Err(GfError::FieldMismatch(self.field, other.field));
        }
        Ok(self.field)
    }

    pub fn add(&self, other: &Self) -> Result<Self, GfError> {
        let f = self.same_field(other)?;
        Ok(Self {
            field: f,
            value: f.add(self.value, other.value),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, GfError> {
        let f = self.same_field(other)?;
        Ok(Self {
            field: f,
            value: f.sub(self.value, other.value),
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self, GfError> {
        let f = self.same_field(other)?;
        Ok(Self {
            field: f,
            value: f.mul(self.value, other.value),
        })
    }

    pub fn inv(&self) -> Result<Self, GfError> {
        Ok(Self {
            field: self.field,
            value: self.field.inv(self.value)?,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}
