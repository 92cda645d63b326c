//! Finite-field arithmetic for the storage alphabet.
//!
//! Two families are supported: binary extension fields GF(2^w) for
//! `1 <= w <= 16`, implemented with log/antilog tables over a primitive
//! polynomial, and prime fields GF(p) for `p < 2^16`. The default field is
//! GF(2^8) with the Reed-Solomon polynomial `x^8 + x^4 + x^3 + x^2 + 1`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Field order used when the caller does not pick one.
pub const DEFAULT_ORDER: u32 = 256;

/// Primitive polynomials (bitmask including the leading term) indexed by degree.
const PRIMITIVE_POLYS: [u32; 17] = [
    0, 0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x89, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B,
    0x4443, 0x8003, 0x1100B,
];

/// An element of some field, stored as its canonical residue.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Symbol(u16);

impl Symbol {
    pub const ZERO: Symbol = Symbol(0);
    pub const ONE: Symbol = Symbol(1);

    /// Wraps a raw value without range checking. Use [`Field::symbol`] for
    /// validated construction.
    pub const fn from_raw(value: u16) -> Self {
        Symbol(value)
    }

    pub const fn value(self) -> u16 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    /// GF(2^degree) reduced modulo `poly`.
    BinaryExtension { degree: u32, poly: u32 },
    Prime,
}

struct Tables {
    // exp has length 2*(q-1) so that exp[log a + log b] needs no reduction.
    exp: Vec<u16>,
    log: Vec<u16>,
}

/// A finite field. Cheap to clone; the lookup tables are shared.
#[derive(Clone)]
pub struct Field {
    order: u32,
    kind: FieldKind,
    tables: Option<Arc<Tables>>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.kind == other.kind
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field").field("order", &self.order).field("kind", &self.kind).finish()
    }
}

impl Default for Field {
    fn default() -> Self {
        Field::gf256()
    }
}

fn is_prime(q: u32) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= q {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl Field {
    /// GF(2^8) with polynomial 0x11D.
    pub fn gf256() -> Self {
        Field::binary(8).expect("0x11D is primitive")
    }

    /// Builds the field of the given order, choosing the binary extension
    /// construction for powers of two and the prime construction otherwise.
    pub fn new(order: u32) -> Result<Self> {
        if order >= 2 && order.is_power_of_two() {
            Field::binary(order.trailing_zeros())
        } else {
            Field::prime(order)
        }
    }

    /// Whether `order` names a field this crate can construct.
    pub fn is_supported(order: u32) -> bool {
        (order >= 2 && order.is_power_of_two() && order <= 1 << 16)
            || (order < 1 << 16 && is_prime(order))
    }

    pub fn binary(degree: u32) -> Result<Self> {
        if !(1..=16).contains(&degree) {
            return Err(Error::UnsupportedField(1u32.checked_shl(degree).unwrap_or(0)));
        }
        Field::binary_with_poly(degree, PRIMITIVE_POLYS[degree as usize])
    }

    /// GF(2^degree) modulo a caller-supplied polynomial. The polynomial must
    /// be primitive (x generates the multiplicative group), which also makes
    /// it irreducible; anything else is rejected.
    pub fn binary_with_poly(degree: u32, poly: u32) -> Result<Self> {
        let order = 1u32 << degree;
        if !(1..=16).contains(&degree) || poly >> degree != 1 {
            return Err(Error::UnsupportedField(order));
        }
        let group = (order - 1) as usize;
        let mut exp = vec![0u16; 2 * group];
        let mut log = vec![0u16; order as usize];
        let mut seen = vec![false; order as usize];
        let mut x: u32 = 1;
        for i in 0..group {
            if seen[x as usize] {
                return Err(Error::UnsupportedField(order));
            }
            seen[x as usize] = true;
            exp[i] = x as u16;
            exp[i + group] = x as u16;
            log[x as usize] = i as u16;
            x <<= 1;
            if x & order != 0 {
                x ^= poly;
            }
        }
        if x != 1 {
            return Err(Error::UnsupportedField(order));
        }
        Ok(Field {
            order,
            kind: FieldKind::BinaryExtension { degree, poly },
            tables: Some(Arc::new(Tables { exp, log })),
        })
    }

    pub fn prime(p: u32) -> Result<Self> {
        if p >= 1 << 16 || !is_prime(p) {
            return Err(Error::UnsupportedField(p));
        }
        Ok(Field { order: p, kind: FieldKind::Prime, tables: None })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    /// Bytes needed to carry one symbol on the wire.
    pub fn symbol_width(&self) -> usize {
        if self.order <= 256 {
            1
        } else {
            2
        }
    }

    pub fn zero(&self) -> Symbol {
        Symbol::ZERO
    }

    pub fn one(&self) -> Symbol {
        Symbol::ONE
    }

    /// Validated constructor.
    pub fn symbol(&self, value: u32) -> Result<Symbol> {
        if value < self.order {
            Ok(Symbol(value as u16))
        } else {
            Err(Error::InvalidSymbol { value, order: self.order })
        }
    }

    pub fn contains(&self, a: Symbol) -> bool {
        u32::from(a.0) < self.order
    }

    /// Every element in ascending representation order.
    pub fn elements(&self) -> impl Iterator<Item = Symbol> {
        (0..self.order).map(|v| Symbol(v as u16))
    }

    #[inline]
    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        debug_assert!(self.contains(a) && self.contains(b));
        match self.kind {
            FieldKind::BinaryExtension { .. } => Symbol(a.0 ^ b.0),
            FieldKind::Prime => Symbol(((u32::from(a.0) + u32::from(b.0)) % self.order) as u16),
        }
    }

    #[inline]
    pub fn neg(&self, a: Symbol) -> Symbol {
        match self.kind {
            FieldKind::BinaryExtension { .. } => a,
            FieldKind::Prime if a.0 == 0 => a,
            FieldKind::Prime => Symbol((self.order - u32::from(a.0)) as u16),
        }
    }

    #[inline]
    pub fn sub(&self, a: Symbol, b: Symbol) -> Symbol {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        debug_assert!(self.contains(a) && self.contains(b));
        if a.0 == 0 || b.0 == 0 {
            return Symbol::ZERO;
        }
        match &self.tables {
            Some(t) => {
                let idx = t.log[a.0 as usize] as usize + t.log[b.0 as usize] as usize;
                Symbol(t.exp[idx])
            }
            None => Symbol(((u32::from(a.0) * u32::from(b.0)) % self.order) as u16),
        }
    }

    pub fn inv(&self, a: Symbol) -> Result<Symbol> {
        if a.0 == 0 {
            return Err(Error::DivideByZero);
        }
        match &self.tables {
            Some(t) => {
                let group = (self.order - 1) as usize;
                let l = t.log[a.0 as usize] as usize;
                Ok(Symbol(t.exp[(group - l) % group]))
            }
            None => Ok(self.pow(a, self.order - 2)),
        }
    }

    pub fn div(&self, a: Symbol, b: Symbol) -> Result<Symbol> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Symbol, mut e: u32) -> Symbol {
        let mut base = a;
        let mut acc = Symbol::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Inner product of two equal-length vectors.
    pub fn dot(&self, a: &[Symbol], b: &[Symbol]) -> Symbol {
        debug_assert_eq!(a.len(), b.len());
        a.iter().zip(b).fold(Symbol::ZERO, |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
    }

    /// `acc[i] += c * x[i]`.
    pub fn axpy(&self, acc: &mut [Symbol], c: Symbol, x: &[Symbol]) {
        debug_assert_eq!(acc.len(), x.len());
        if c.is_zero() {
            return;
        }
        for (a, &v) in acc.iter_mut().zip(x) {
            *a = self.add(*a, self.mul(c, v));
        }
    }

    /// Element-wise sum of two equal-length vectors.
    pub fn add_vec(&self, a: &[Symbol], b: &[Symbol]) -> Vec<Symbol> {
        a.iter().zip(b).map(|(&x, &y)| self.add(x, y)).collect()
    }

    /// A vector of uniformly random field elements.
    pub fn random_vec<R: rand::Rng + ?Sized>(&self, rng: &mut R, len: usize) -> Vec<Symbol> {
        (0..len).map(|_| Symbol(rng.random_range(0..self.order) as u16)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gf256_add_self_is_zero() {
        let f = Field::gf256();
        for x in f.elements() {
            assert_eq!(f.add(x, x), Symbol::ZERO);
        }
    }

    #[test]
    fn gf256_inverse_exhaustive() {
        let f = Field::gf256();
        for a in f.elements().skip(1) {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), Symbol::ONE, "a = {a}");
        }
    }

    #[test]
    fn inverse_of_zero_fails() {
        assert_eq!(Field::gf256().inv(Symbol::ZERO), Err(Error::DivideByZero));
        assert_eq!(Field::prime(7).unwrap().inv(Symbol::ZERO), Err(Error::DivideByZero));
    }

    #[test]
    fn gf7_arithmetic() {
        let f = Field::prime(7).unwrap();
        let s = |v| f.symbol(v).unwrap();
        assert_eq!(f.add(s(5), s(4)), s(2));
        assert_eq!(f.mul(s(3), s(5)), s(1));
        assert_eq!(f.inv(s(3)).unwrap(), s(5));
        assert_eq!(f.sub(s(2), s(5)), s(4));
        for a in f.elements().skip(1) {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), Symbol::ONE);
        }
    }

    #[test]
    fn gf256_known_products() {
        // Reference values for polynomial 0x11D.
        let f = Field::gf256();
        let s = |v| f.symbol(v).unwrap();
        assert_eq!(f.mul(s(2), s(128)), s(0x1D));
        assert_eq!(f.mul(s(3), s(7)), s(9));
        assert_eq!(f.pow(s(2), 255), Symbol::ONE);
    }

    #[test]
    fn all_binary_tables_build() {
        for w in 1..=16 {
            let f = Field::binary(w).unwrap();
            assert_eq!(f.order(), 1 << w);
        }
    }

    #[test]
    fn non_primitive_polynomial_rejected() {
        // x^8 + x^4 + x^3 + x + 1 (the AES polynomial) is irreducible but x is not a generator.
        assert!(Field::binary_with_poly(8, 0x11B).is_err());
        // Reducible: x^2 + 1 = (x + 1)^2 over GF(2).
        assert!(Field::binary_with_poly(2, 0x5).is_err());
    }

    #[test]
    fn field_construction_by_order() {
        assert!(Field::new(256).is_ok());
        assert!(Field::new(257).is_ok());
        assert!(Field::new(7).is_ok());
        assert_eq!(Field::new(9).unwrap_err(), Error::UnsupportedField(9));
        assert_eq!(Field::new(1).unwrap_err(), Error::UnsupportedField(1));
        assert!(Field::is_supported(65536));
        assert!(!Field::is_supported(65537));
    }

    #[test]
    fn symbol_validation() {
        let f = Field::prime(7).unwrap();
        assert!(f.symbol(6).is_ok());
        assert_eq!(f.symbol(7), Err(Error::InvalidSymbol { value: 7, order: 7 }));
    }
}
