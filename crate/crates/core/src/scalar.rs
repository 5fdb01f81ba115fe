//! Integer scalar traits shared by the arithmetic, ring and solver code.
//!
//! Everything in this crate is exact. The natural-number routines are generic
//! over [`UInt`] (implemented for `u64`, `u128` and `BigUint`) and the
//! quadratic-ring coefficients over [`SInt`] (`i64`, `i128`, `BigInt`).
//! Primitive widths are fast paths; the big-integer instantiations are the
//! ones re-exported as [`crate::Natural`] and [`crate::QuadInt`].

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{CheckedMul, FromPrimitive, Signed, ToPrimitive, Unsigned};

/// Exact nonnegative integer.
pub trait UInt:
    Integer + Unsigned + Clone + Hash + Debug + Display + FromPrimitive + ToPrimitive + CheckedMul
{
    /// Number of significant bits; zero has zero bits.
    fn bits(&self) -> u64;

    /// `self * rhs mod m` without intermediate overflow.
    fn mul_mod(&self, rhs: &Self, m: &Self) -> Self;

    /// Remainder modulo a small word, used by residue filters.
    fn rem_u32(&self, m: u32) -> u32;

    /// `2^k`, or `None` when it does not fit.
    fn pow2(k: u64) -> Option<Self>;
}

impl UInt for u64 {
    fn bits(&self) -> u64 {
        (u64::BITS - self.leading_zeros()) as u64
    }

    fn mul_mod(&self, rhs: &Self, m: &Self) -> Self {
        ((*self as u128 * *rhs as u128) % *m as u128) as u64
    }

    fn rem_u32(&self, m: u32) -> u32 {
        (*self % m as u64) as u32
    }

    fn pow2(k: u64) -> Option<Self> {
        1u64.checked_shl(u32::try_from(k).ok()?).filter(|_| k < 64)
    }
}

impl UInt for u128 {
    fn bits(&self) -> u64 {
        (u128::BITS - self.leading_zeros()) as u64
    }

    fn mul_mod(&self, rhs: &Self, m: &Self) -> Self {
        if let Some(prod) = u128::checked_mul(*self, *rhs) {
            return prod % m;
        }
        let prod = BigUint::from(*self) * BigUint::from(*rhs) % BigUint::from(*m);
        prod.to_u128().expect("residue below a u128 modulus")
    }

    fn rem_u32(&self, m: u32) -> u32 {
        (*self % m as u128) as u32
    }

    fn pow2(k: u64) -> Option<Self> {
        1u128
            .checked_shl(u32::try_from(k).ok()?)
            .filter(|_| k < 128)
    }
}

impl UInt for BigUint {
    fn bits(&self) -> u64 {
        BigUint::bits(self)
    }

    fn mul_mod(&self, rhs: &Self, m: &Self) -> Self {
        (self * rhs) % m
    }

    fn rem_u32(&self, m: u32) -> u32 {
        (self % m).to_u32().expect("remainder below u32 modulus")
    }

    fn pow2(k: u64) -> Option<Self> {
        Some(BigUint::from(1u8) << k)
    }
}

/// Exact signed integer, used for quadratic-ring coefficients.
pub trait SInt:
    Integer + Signed + Clone + Hash + Debug + Display + FromPrimitive + ToPrimitive
{
}

impl SInt for i64 {}
impl SInt for i128 {}
impl SInt for BigInt {}
