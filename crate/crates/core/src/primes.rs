//! Primality testing, prime stepping and consecutive prime pairs.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::pow_mod;
use crate::scalar::UInt;

/// Witness bases that make Miller-Rabin exact for every `n < 2^64`.
const DETERMINISTIC_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Pair enumeration switches from sieving to `next_prime` stepping here.
pub const SIEVE_CEILING: u64 = 1_000_000_000;

const SEGMENT_LEN: u64 = 1 << 18;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrimeError {
    #[error("p is not prime")]
    PNotPrime,
    #[error("q is not prime")]
    QNotPrime,
    #[error("p must exceed q")]
    NotOrdered,
    #[error("{q} and {p} are not consecutive primes (next prime after {q} is {next})")]
    NotConsecutive { p: u64, q: u64, next: u64 },
    #[error("prev_prime requires n >= 3, got {0}")]
    NoPreviousPrime(u64),
}

/// Outcome of a primality test on an arbitrary-size input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Primality {
    Prime,
    /// Passed a strong probable-prime battery; only reported above 2^64.
    ProbablePrime,
    Composite,
}

impl Primality {
    pub fn is_prime(self) -> bool {
        !matches!(self, Primality::Composite)
    }
}

fn strong_probable_prime<T: UInt>(n: &T, base: &T) -> bool {
    let one = T::one();
    let n_minus_1 = n.clone() - one.clone();
    let two = one.clone() + one.clone();
    let mut d = n_minus_1.clone();
    let mut s = 0u32;
    while d.is_even() {
        d = d / two.clone();
        s += 1;
    }
    let mut x = pow_mod(base, &d, n);
    if x == one || x == n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x = x.mul_mod(&x, n);
        if x == n_minus_1 {
            return true;
        }
    }
    false
}

/// Exact primality for 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &DETERMINISTIC_BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    DETERMINISTIC_BASES
        .iter()
        .all(|&b| strong_probable_prime(&n, &b))
}

/// Primality of an arbitrary natural. Inputs below 2^64 get an exact answer;
/// larger inputs run the same strong-probable-prime battery and are tagged
/// [`Primality::ProbablePrime`] when they pass.
pub fn primality(n: &BigUint) -> Primality {
    if let Some(small) = n.to_u64() {
        return if is_prime_u64(small) {
            Primality::Prime
        } else {
            Primality::Composite
        };
    }
    for &p in &DETERMINISTIC_BASES {
        if (n % p).is_zero() {
            return Primality::Composite;
        }
    }
    let extra = [41u64, 43, 47, 53, 59, 61, 67, 71];
    let passes = DETERMINISTIC_BASES
        .iter()
        .chain(extra.iter())
        .all(|&b| strong_probable_prime(n, &BigUint::from(b)));
    if passes {
        Primality::ProbablePrime
    } else {
        Primality::Composite
    }
}

pub fn is_prime(n: &BigUint) -> bool {
    primality(n).is_prime()
}

/// Least prime strictly above `n`, or `None` past the largest 64-bit prime.
pub fn next_prime(n: u64) -> Option<u64> {
    if n < 2 {
        return Some(2);
    }
    let mut c = if n.is_multiple_of(2) {
        n.checked_add(1)?
    } else {
        n.checked_add(2)?
    };
    loop {
        if is_prime_u64(c) {
            return Some(c);
        }
        c = c.checked_add(2)?;
    }
}

/// Greatest prime strictly below `n`.
pub fn prev_prime(n: u64) -> Result<u64, PrimeError> {
    if n < 3 {
        return Err(PrimeError::NoPreviousPrime(n));
    }
    if n == 3 {
        return Ok(2);
    }
    let mut c = if n.is_multiple_of(2) { n - 1 } else { n - 2 };
    while !is_prime_u64(c) {
        c -= 2;
    }
    Ok(c)
}

/// Consecutive primes `q < p`, stored larger-first to match `p^x − q^y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrimePair {
    p: u64,
    q: u64,
}

impl PrimePair {
    /// Validates primality, ordering and adjacency.
    pub fn new(p: u64, q: u64) -> Result<Self, PrimeError> {
        if !is_prime_u64(p) {
            return Err(PrimeError::PNotPrime);
        }
        if !is_prime_u64(q) {
            return Err(PrimeError::QNotPrime);
        }
        if p <= q {
            return Err(PrimeError::NotOrdered);
        }
        let next = next_prime(q).expect("q < p, so a larger prime exists");
        if next != p {
            return Err(PrimeError::NotConsecutive { p, q, next });
        }
        Ok(PrimePair { p, q })
    }

    /// The pair whose smaller member is `q`.
    pub fn following(q: u64) -> Option<Self> {
        if !is_prime_u64(q) {
            return None;
        }
        next_prime(q).map(|p| PrimePair { p, q })
    }

    pub(crate) fn new_unchecked(p: u64, q: u64) -> Self {
        debug_assert!(p > q);
        PrimePair { p, q }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Twin pair with `p ≡ 3 (mod 4)`, the shape the mod-4 argument covers.
    pub fn is_twin_3_mod_4(&self) -> bool {
        self.p - self.q == 2 && self.p % 4 == 3
    }
}

impl fmt::Display for PrimePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.p, self.q)
    }
}

/// Primes up to `sqrt(limit)` by a plain sieve, for striking segments.
fn base_primes(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Ascending primes in `[lo, hi]` via a segmented sieve.
///
/// Segments are independent, so callers may sieve disjoint ranges in
/// parallel and concatenate.
pub fn primes_in_range(lo: u64, hi: u64) -> Vec<u64> {
    if hi < 2 || lo > hi {
        return Vec::new();
    }
    let lo = lo.max(2);
    let root = crate::arith::isqrt(&hi);
    let small = base_primes(root);
    let mut out = Vec::new();
    let mut seg_lo = lo;
    loop {
        let seg_hi = seg_lo.saturating_add(SEGMENT_LEN - 1).min(hi);
        let len = (seg_hi - seg_lo + 1) as usize;
        let mut composite = vec![false; len];
        for &p in &small {
            if p * p > seg_hi {
                break;
            }
            let start = (p * p).max(seg_lo.div_ceil(p) * p);
            let mut j = start;
            while j <= seg_hi {
                composite[(j - seg_lo) as usize] = true;
                j += p;
            }
        }
        out.extend(
            composite
                .iter()
                .enumerate()
                .filter(|(_, &c)| !c)
                .map(|(i, _)| seg_lo + i as u64),
        );
        if seg_hi == hi {
            break;
        }
        seg_lo = seg_hi + 1;
    }
    out
}

/// Every consecutive pair with `p ≤ limit`, ascending by `p`.
pub fn consecutive_pairs(limit: u64) -> Vec<PrimePair> {
    if limit < 3 {
        return Vec::new();
    }
    let sieved_to = limit.min(SIEVE_CEILING);
    let mut primes = primes_in_range(2, sieved_to);
    if limit > SIEVE_CEILING {
        let mut last = *primes.last().expect("sieve range contains primes");
        while let Some(next) = next_prime(last) {
            if next > limit {
                break;
            }
            primes.push(next);
            last = next;
        }
    }
    primes
        .windows(2)
        .map(|w| PrimePair::new_unchecked(w[1], w[0]))
        .collect()
}
