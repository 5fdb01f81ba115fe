//! Exact integer helpers: square roots, perfect-square detection, modular
//! powers, multiplicative orders and eventual periodicity of `a^x mod m`.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::UInt;

/// Default magnitude cap for values handled by the solver.
pub const DEFAULT_BIT_CAP: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("value has {bits} bits, above the configured cap of {cap}")]
    BitCapExceeded { bits: u64, cap: u64 },
    #[error("{a} is not invertible modulo {m}")]
    NotCoprime { a: String, m: String },
    #[error("modulus must be at least 1")]
    ZeroModulus,
}

/// Upper bound on the bit length of any value an operation will accept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitCap(pub u64);

impl Default for BitCap {
    fn default() -> Self {
        BitCap(DEFAULT_BIT_CAP)
    }
}

impl BitCap {
    pub fn check<T: UInt>(&self, n: &T) -> Result<(), ArithError> {
        let bits = n.bits();
        if bits > self.0 {
            Err(ArithError::BitCapExceeded { bits, cap: self.0 })
        } else {
            Ok(())
        }
    }

    pub fn isqrt<T: UInt>(&self, n: &T) -> Result<T, ArithError> {
        self.check(n)?;
        Ok(isqrt(n))
    }

    pub fn is_perfect_square<T: UInt>(&self, n: &T) -> Result<Option<T>, ArithError> {
        self.check(n)?;
        Ok(is_perfect_square(n))
    }
}

/// Floor square root: the `r` with `r² ≤ n < (r+1)²`.
///
/// Newton iteration from a power-of-two guess that is never below the root,
/// so the iterates decrease monotonically to the floor. The closing loops
/// re-establish the bracket exactly.
pub fn isqrt<T: UInt>(n: &T) -> T {
    if n.is_zero() {
        return T::zero();
    }
    let two = T::one() + T::one();
    let half_bits = n.bits().div_ceil(2);
    let mut x = T::pow2(half_bits).expect("half-width power of two fits");
    loop {
        let y = (x.clone() + n.clone() / x.clone()) / two.clone();
        if y >= x {
            break;
        }
        x = y;
    }
    while x.checked_mul(&x).is_none_or(|sq| &sq > n) {
        x = x - T::one();
    }
    loop {
        let next = x.clone() + T::one();
        match next.checked_mul(&next) {
            Some(sq) if &sq <= n => x = next,
            _ => break,
        }
    }
    x
}

const fn square_table<const M: usize>() -> [bool; M] {
    let mut table = [false; M];
    let mut t = 0;
    while t < M {
        table[(t * t) % M] = true;
        t += 1;
    }
    table
}

static SQ64: [bool; 64] = square_table::<64>();
static SQ63: [bool; 63] = square_table::<63>();
static SQ65: [bool; 65] = square_table::<65>();
static SQ11: [bool; 11] = square_table::<11>();

fn passes_residue_filter<T: UInt>(n: &T) -> bool {
    SQ64[n.rem_u32(64) as usize]
        && SQ63[n.rem_u32(63) as usize]
        && SQ65[n.rem_u32(65) as usize]
        && SQ11[n.rem_u32(11) as usize]
}

/// Returns the root when `n` is a perfect square. Zero is a square.
pub fn is_perfect_square<T: UInt>(n: &T) -> Option<T> {
    if !passes_residue_filter(n) {
        return None;
    }
    let r = isqrt(n);
    if &(r.clone() * r.clone()) == n {
        Some(r)
    } else {
        None
    }
}

/// `a^e mod m` by square-and-multiply. `m = 1` yields 0.
pub fn pow_mod<T: UInt>(a: &T, e: &T, m: &T) -> T {
    assert!(!m.is_zero(), "pow_mod modulus must be at least 1");
    let two = T::one() + T::one();
    let mut result = T::one() % m.clone();
    let mut base = a.clone() % m.clone();
    let mut exp = e.clone();
    while !exp.is_zero() {
        if exp.is_odd() {
            result = result.mul_mod(&base, m);
        }
        base = base.mul_mod(&base, m);
        exp = exp / two.clone();
    }
    result
}

/// Least `t ≥ 1` with `a^t ≡ 1 (mod m)`. Found by walking the cycle, so
/// intended for moduli small enough to enumerate.
pub fn multiplicative_order<T: UInt>(a: &T, m: &T) -> Result<u64, ArithError> {
    if m.is_zero() {
        return Err(ArithError::ZeroModulus);
    }
    if !a.gcd(m).is_one() {
        return Err(ArithError::NotCoprime {
            a: a.to_string(),
            m: m.to_string(),
        });
    }
    let one = T::one() % m.clone();
    let base = a.clone() % m.clone();
    let mut acc = base.clone();
    let mut t = 1u64;
    while acc != one {
        acc = acc.mul_mod(&base, m);
        t += 1;
    }
    Ok(t)
}

/// `{t² mod m : 0 ≤ t < m}`. Only `t ≤ m/2` needs visiting since
/// `(m - t)² ≡ t²`.
pub fn square_residue_set<T: UInt>(m: &T) -> BTreeSet<T> {
    assert!(
        !m.is_zero(),
        "square_residue_set modulus must be at least 1"
    );
    let two = T::one() + T::one();
    let half = m.clone() / two;
    let mut out = BTreeSet::new();
    let mut t = T::zero();
    while t <= half {
        out.insert(t.mul_mod(&t, m));
        t = t + T::one();
    }
    out
}

/// Tail structure of the sequence `a^x mod m`, `x = 0, 1, 2, …`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PeriodInfo {
    pub preperiod: u64,
    pub period: u64,
}

impl PeriodInfo {
    /// Canonical exponent with the same residue as `x`, once `x` is in the
    /// periodic regime. Below the preperiod the exponent is its own class.
    pub fn reduce(&self, x: u64) -> u64 {
        if x < self.preperiod {
            x
        } else {
            self.preperiod + (x - self.preperiod) % self.period
        }
    }

    /// Representative in `[preperiod, preperiod + period)` of the class
    /// `x ≡ class (mod period)`.
    pub fn representative(&self, class: u64) -> u64 {
        let offset = (class + self.period - self.preperiod % self.period) % self.period;
        self.preperiod + offset
    }
}

/// Minimal `(preperiod, period)` with `a^(x+period) ≡ a^x (mod m)` for every
/// `x ≥ preperiod`. Handles bases sharing factors with the modulus.
pub fn eventual_period<T: UInt>(a: &T, m: &T) -> PeriodInfo {
    assert!(!m.is_zero(), "eventual_period modulus must be at least 1");
    let mut seen: HashMap<T, u64> = HashMap::new();
    let base = a.clone() % m.clone();
    let mut acc = T::one() % m.clone();
    let mut x = 0u64;
    loop {
        if let Some(&first) = seen.get(&acc) {
            return PeriodInfo {
                preperiod: first,
                period: x - first,
            };
        }
        seen.insert(acc.clone(), x);
        acc = acc.mul_mod(&base, m);
        x += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use num_integer::Roots;

    #[test]
    fn isqrt_examples() {
        assert_eq!(isqrt(&0u64), 0);
        assert_eq!(isqrt(&48u64), 6);
        assert_eq!(isqrt(&49u64), 7);
        assert_eq!(isqrt(&u64::MAX), u32::MAX as u64);
        assert_eq!(isqrt(&u128::MAX), u64::MAX as u128);
    }

    #[test]
    fn isqrt_matches_library_root_on_small_range() {
        for n in 0u64..20_000 {
            assert_eq!(isqrt(&n), n.sqrt(), "n = {n}");
        }
    }

    #[test]
    fn perfect_square_examples() {
        assert_eq!(is_perfect_square(&0u64), Some(0));
        assert_eq!(is_perfect_square(&25u64), Some(5));
        assert_eq!(is_perfect_square(&26u64), None);
        assert_eq!(
            is_perfect_square(&BigUint::from(27u8 - 2)),
            Some(BigUint::from(5u8))
        );
    }

    #[test]
    fn residue_filter_never_rejects_a_square() {
        for t in 0u64..5000 {
            assert!(passes_residue_filter(&(t * t)));
        }
    }

    #[test]
    fn bit_cap_is_a_distinct_error() {
        let cap = BitCap(8);
        assert_eq!(cap.isqrt(&255u64), Ok(15));
        assert_eq!(
            cap.isqrt(&256u64),
            Err(ArithError::BitCapExceeded { bits: 9, cap: 8 })
        );
        assert!(cap.is_perfect_square(&(BigUint::from(1u8) << 100)).is_err());
    }

    #[test]
    fn pow_mod_examples() {
        assert_eq!(pow_mod(&9u64, &0, &7), 1);
        assert_eq!(pow_mod(&9u64, &0, &1), 0);
        assert_eq!(pow_mod(&7u64, &2, &25), 24);
        assert_eq!(pow_mod(&5u64, &6, &9), 1);
    }

    #[test]
    fn pow_mod_exhaustive_small_oracle() {
        for m in 1u64..=50 {
            for a in 0u64..=50 {
                let mut naive = 1 % m;
                for e in 0u64..=50 {
                    assert_eq!(pow_mod(&a, &e, &m), naive, "{a}^{e} mod {m}");
                    naive = naive * a % m;
                }
            }
        }
    }

    #[test]
    fn multiplicative_order_examples() {
        assert_eq!(multiplicative_order(&1u64, &9), Ok(1));
        assert_eq!(multiplicative_order(&5u64, &9), Ok(6));
        assert_eq!(multiplicative_order(&7u64, &25), Ok(4));
        assert!(matches!(
            multiplicative_order(&3u64, &9),
            Err(ArithError::NotCoprime { .. })
        ));
    }

    #[test]
    fn square_residue_examples() {
        let set = |m: u64| square_residue_set(&m).into_iter().collect::<Vec<_>>();
        assert_eq!(set(1), vec![0]);
        assert_eq!(set(4), vec![0, 1]);
        assert_eq!(set(9), vec![0, 1, 4, 7]);
        assert_eq!(set(2), vec![0, 1]);
    }

    #[test]
    fn eventual_period_examples() {
        assert_eq!(
            eventual_period(&5u64, &1),
            PeriodInfo {
                preperiod: 0,
                period: 1
            }
        );
        assert_eq!(
            eventual_period(&5u64, &9),
            PeriodInfo {
                preperiod: 0,
                period: 6
            }
        );
        assert_eq!(
            eventual_period(&2u64, &12),
            PeriodInfo {
                preperiod: 2,
                period: 2
            }
        );
        assert_eq!(
            eventual_period(&3u64, &9),
            PeriodInfo {
                preperiod: 2,
                period: 1
            }
        );
    }

    #[test]
    fn period_reduction_is_consistent() {
        let info = PeriodInfo {
            preperiod: 3,
            period: 4,
        };
        for x in 0..40 {
            let r = info.reduce(x);
            if x >= 3 {
                assert_eq!(info.representative(x % 4), r);
                assert!((3..7).contains(&r));
            } else {
                assert_eq!(r, x);
            }
        }
    }

    #[test]
    fn big_and_primitive_paths_agree() {
        let a = 123_456_789u64;
        let m = 1_000_003u64;
        let e = 987_654u64;
        assert_eq!(
            BigUint::from(pow_mod(&a, &e, &m)),
            pow_mod(&BigUint::from(a), &BigUint::from(e), &BigUint::from(m))
        );
    }
}
