//! Exact arithmetic in imaginary quadratic rings `Z[√d]`, `d < 0` squarefree.
//!
//! The two rings that matter here are the Gaussian integers (`d = -1`) and
//! `Z[√-2]`. Elements of different rings never mix: binary operations check
//! `d` and fail with [`RingError::MismatchedRing`].

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::SInt;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("elements belong to different rings (d = {left} vs d = {right})")]
    MismatchedRing { left: i64, right: i64 },
    #[error("d = {0} is not a negative squarefree integer")]
    InvalidD(i64),
    #[error("the series is defined on odd x >= 1, got {0}")]
    EvenArgument(u64),
}

fn is_squarefree(n: u64) -> bool {
    let mut k = 2u64;
    while k * k <= n {
        if n.is_multiple_of(k * k) {
            return false;
        }
        k += 1;
    }
    true
}

/// `a + b√d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadIntOf<T> {
    a: T,
    b: T,
    d: i64,
}

impl<T: SInt> QuadIntOf<T> {
    pub fn new(a: T, b: T, d: i64) -> Result<Self, RingError> {
        if d >= 0 || !is_squarefree(d.unsigned_abs()) {
            return Err(RingError::InvalidD(d));
        }
        Ok(QuadIntOf { a, b, d })
    }

    /// Gaussian integer `a + bi`.
    pub fn gaussian(a: T, b: T) -> Self {
        QuadIntOf { a, b, d: -1 }
    }

    /// Element `a + b√-2`.
    pub fn sqrt_minus_two(a: T, b: T) -> Self {
        QuadIntOf { a, b, d: -2 }
    }

    pub fn one(d: i64) -> Result<Self, RingError> {
        Self::new(T::one(), T::zero(), d)
    }

    pub fn a(&self) -> &T {
        &self.a
    }

    pub fn b(&self) -> &T {
        &self.b
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    fn d_scalar(&self) -> T {
        T::from_i64(self.d).expect("ring parameter fits every scalar width")
    }

    fn same_ring(&self, other: &Self) -> Result<(), RingError> {
        if self.d == other.d {
            Ok(())
        } else {
            Err(RingError::MismatchedRing {
                left: self.d,
                right: other.d,
            })
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, RingError> {
        self.same_ring(other)?;
        Ok(QuadIntOf {
            a: self.a.clone() + other.a.clone(),
            b: self.b.clone() + other.b.clone(),
            d: self.d,
        })
    }

    /// `(a₁ + b₁√d)(a₂ + b₂√d) = (a₁a₂ + d·b₁b₂) + (a₁b₂ + a₂b₁)√d`.
    pub fn try_mul(&self, other: &Self) -> Result<Self, RingError> {
        self.same_ring(other)?;
        Ok(self.mul_same_ring(other))
    }

    fn mul_same_ring(&self, other: &Self) -> Self {
        let a =
            self.a.clone() * other.a.clone() + self.d_scalar() * self.b.clone() * other.b.clone();
        let b = self.a.clone() * other.b.clone() + other.a.clone() * self.b.clone();
        QuadIntOf { a, b, d: self.d }
    }

    pub fn conj(&self) -> Self {
        QuadIntOf {
            a: self.a.clone(),
            b: -self.b.clone(),
            d: self.d,
        }
    }

    /// `N(a + b√d) = a² − d·b²`, nonnegative because `d < 0`.
    pub fn norm(&self) -> T {
        self.a.clone() * self.a.clone() - self.d_scalar() * self.b.clone() * self.b.clone()
    }

    /// `self^e` by square-and-multiply.
    pub fn pow(&self, mut e: u64) -> Self {
        let mut result = QuadIntOf {
            a: T::one(),
            b: T::zero(),
            d: self.d,
        };
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_same_ring(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_same_ring(&base);
            }
        }
        result
    }

    /// The `√d` coefficient of `self^e`.
    pub fn imag_coeff(&self, e: u64) -> T {
        self.pow(e).b
    }

    /// Every `x` in `1..=xmax` with `imag_coeff(x) == target`, by direct scan.
    ///
    /// The imaginary part of successive powers oscillates in sign, so no
    /// monotonicity pruning is sound; every exponent is visited.
    pub fn solve_imag_equals(&self, target: &T, xmax: u64) -> BTreeSet<u64> {
        let mut hits = BTreeSet::new();
        let mut acc = self.clone();
        for x in 1..=xmax {
            if &acc.b == target {
                hits.insert(x);
            }
            if x < xmax {
                acc = acc.mul_same_ring(self);
            }
        }
        hits
    }
}

impl<T: SInt> fmt::Display for QuadIntOf<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let unit = if self.d == -1 {
            "i".to_string()
        } else {
            format!("√{}", self.d)
        };
        if self.b.is_negative() {
            write!(f, "{} - {}{}", self.a, self.b.abs(), unit)
        } else {
            write!(f, "{} + {}{}", self.a, self.b, unit)
        }
    }
}

/// The two binomial series whose value is the `√d` part of a unit-norm-prime
/// power: `A` is the `Z[√-2]` expansion of `(1 − √-2)^x`, `B` the Gaussian
/// expansion of `(2 − i)^x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesVariant {
    /// `Σ_{k odd ≤ x} C(x,k)·(−1)^((k+1)/2)·2^((k−1)/2)`
    A,
    /// `Σ_{k odd ≤ x} C(x,k)·(−1)^((k+1)/2)·2^(x−k)`
    B,
}

/// Evaluates the binomial sum term by term, independent of ring arithmetic.
pub fn f_series(x: u64, variant: SeriesVariant) -> Result<BigInt, RingError> {
    if x.is_multiple_of(2) {
        return Err(RingError::EvenArgument(x));
    }
    let mut total = BigInt::zero();
    let big_x = BigUint::from(x);
    for k in (1..=x).step_by(2) {
        let c = BigInt::from(binomial(big_x.clone(), BigUint::from(k)));
        let weight_exp = match variant {
            SeriesVariant::A => (k - 1) / 2,
            SeriesVariant::B => x - k,
        };
        let term = c << weight_exp;
        if k.div_ceil(2) % 2 == 1 {
            total -= term;
        } else {
            total += term;
        }
    }
    Ok(total)
}

/// First odd `x < xmax` where consecutive odd terms break the claimed
/// ordering. `nondecreasing = true` tests `f(x) ≤ f(x+2)`, otherwise
/// `f(x) ≥ f(x+2)`. Returns `(x, f(x), f(x+2))`.
pub fn first_monotonicity_violation(
    variant: SeriesVariant,
    nondecreasing: bool,
    xmax: u64,
) -> Option<(u64, BigInt, BigInt)> {
    let mut x = 1;
    let mut fx = f_series(1, variant).expect("1 is odd");
    while x + 2 <= xmax {
        let next = f_series(x + 2, variant).expect("odd argument");
        let holds = if nondecreasing {
            fx <= next
        } else {
            fx >= next
        };
        if !holds {
            return Some((x, fx, next));
        }
        x += 2;
        fx = next;
    }
    None
}

impl QuadIntOf<BigInt> {
    pub fn from_i64(a: i64, b: i64, d: i64) -> Result<Self, RingError> {
        Self::new(BigInt::from(a), BigInt::from(b), d)
    }
}
