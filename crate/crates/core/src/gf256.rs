//! Arithmetic in GF(2^8).
//!
//! Elements are bytes; addition is XOR and multiplication is carryless
//! polynomial multiplication reduced modulo x^8 + x^4 + x^3 + x + 1 (0x11B).
//! Multiplication goes through log/antilog tables built at compile time with
//! generator 3 (2 is not primitive under 0x11B).

use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Sub, SubAssign};

use crate::error::Error;

/// Reduction polynomial x^8 + x^4 + x^3 + x + 1.
pub const POLY: u16 = 0x11B;

const GENERATOR: u8 = 0x03;

const fn xtime_mul(a: u8, b: u8) -> u8 {
    let mut a = a as u16;
    let mut b = b;
    let mut acc: u16 = 0;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        a <<= 1;
        if a & 0x100 != 0 {
            a ^= POLY;
        }
        b >>= 1;
    }
    acc as u8
}

const fn build_tables() -> ([u8; 512], [u8; 256]) {
    let mut exp = [0u8; 512];
    let mut log = [0u8; 256];
    let mut x: u8 = 1;
    let mut i = 0;
    while i < 255 {
        exp[i] = x;
        exp[i + 255] = x;
        log[x as usize] = i as u8;
        x = xtime_mul(x, GENERATOR);
        i += 1;
    }
    // exp[510..512] stay unused; log[0] is undefined.
    (exp, log)
}

const TABLES: ([u8; 512], [u8; 256]) = build_tables();
static EXP: [u8; 512] = TABLES.0;
static LOG: [u8; 256] = TABLES.1;

/// One symbol: an element of GF(2^8).
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(transparent)]
pub struct Gf256(pub u8);

impl Gf256 {
    pub const ZERO: Gf256 = Gf256(0);
    pub const ONE: Gf256 = Gf256(1);

    #[inline]
    pub const fn value(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Multiplicative inverse. Zero has none; asking for it is a caller bug
    /// (pivot selection must never hand us a zero).
    pub fn inv(self) -> Result<Gf256, Error> {
        if self.0 == 0 {
            return Err(Error::ZeroInverse);
        }
        Ok(Gf256(EXP[255 - LOG[self.0 as usize] as usize]))
    }

    pub fn pow(self, mut e: u32) -> Gf256 {
        let mut base = self;
        let mut acc = Gf256::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base *= base;
            e >>= 1;
        }
        acc
    }
}

/// `a + b` in GF(2^8). Also subtraction.
#[inline]
pub fn gf_add(a: Gf256, b: Gf256) -> Gf256 {
    Gf256(a.0 ^ b.0)
}

#[inline]
pub fn gf_mul(a: Gf256, b: Gf256) -> Gf256 {
    if a.0 == 0 || b.0 == 0 {
        return Gf256::ZERO;
    }
    Gf256(EXP[LOG[a.0 as usize] as usize + LOG[b.0 as usize] as usize])
}

#[inline]
pub fn gf_inv(a: Gf256) -> Result<Gf256, Error> {
    a.inv()
}

/// `dst[i] += coef * src[i]` for every position; the row operation behind
/// both encoding and elimination.
pub fn axpy(dst: &mut [Gf256], coef: Gf256, src: &[Gf256]) {
    debug_assert_eq!(dst.len(), src.len());
    if coef.is_zero() {
        return;
    }
    if coef == Gf256::ONE {
        for (d, s) in dst.iter_mut().zip(src) {
            d.0 ^= s.0;
        }
        return;
    }
    let lc = LOG[coef.0 as usize] as usize;
    for (d, s) in dst.iter_mut().zip(src) {
        if s.0 != 0 {
            d.0 ^= EXP[lc + LOG[s.0 as usize] as usize];
        }
    }
}

/// `row[i] *= coef` in place.
pub fn scale(row: &mut [Gf256], coef: Gf256) {
    if coef == Gf256::ONE {
        return;
    }
    for x in row.iter_mut() {
        *x = gf_mul(*x, coef);
    }
}

impl Add for Gf256 {
    type Output = Gf256;
    #[inline]
    fn add(self, rhs: Gf256) -> Gf256 {
        gf_add(self, rhs)
    }
}

impl AddAssign for Gf256 {
    #[inline]
    #[allow(clippy::suspicious_op_assign_impl)]
    fn add_assign(&mut self, rhs: Gf256) {
        self.0 ^= rhs.0;
    }
}

impl Sub for Gf256 {
    type Output = Gf256;
    #[inline]
    fn sub(self, rhs: Gf256) -> Gf256 {
        gf_add(self, rhs)
    }
}

impl SubAssign for Gf256 {
    #[inline]
    #[allow(clippy::suspicious_op_assign_impl)]
    fn sub_assign(&mut self, rhs: Gf256) {
        self.0 ^= rhs.0;
    }
}

impl Mul for Gf256 {
    type Output = Gf256;
    #[inline]
    fn mul(self, rhs: Gf256) -> Gf256 {
        gf_mul(self, rhs)
    }
}

impl MulAssign for Gf256 {
    #[inline]
    fn mul_assign(&mut self, rhs: Gf256) {
        *self = gf_mul(*self, rhs);
    }
}

impl Div for Gf256 {
    type Output = Gf256;

    /// Panics on division by zero, like integer division.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Gf256) -> Gf256 {
        self * rhs.inv().expect("division by zero in GF(2^8)")
    }
}

impl Sum for Gf256 {
    fn sum<I: Iterator<Item = Gf256>>(iter: I) -> Gf256 {
        iter.fold(Gf256::ZERO, Add::add)
    }
}

impl Product for Gf256 {
    fn product<I: Iterator<Item = Gf256>>(iter: I) -> Gf256 {
        iter.fold(Gf256::ONE, Mul::mul)
    }
}

impl From<u8> for Gf256 {
    fn from(v: u8) -> Self {
        Gf256(v)
    }
}

impl From<Gf256> for u8 {
    fn from(v: Gf256) -> Self {
        v.0
    }
}

impl fmt::Display for Gf256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#04x}", self.0)
    }
}

impl fmt::LowerHex for Gf256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::LowerHex::fmt(&self.0, f)
    }
}

/// Converts a byte slice into symbols.
pub fn symbols(bytes: &[u8]) -> Vec<Gf256> {
    bytes.iter().copied().map(Gf256).collect()
}

/// Converts symbols back into bytes.
pub fn bytes(symbols: &[Gf256]) -> Vec<u8> {
    symbols.iter().map(|s| s.0).collect()
}
