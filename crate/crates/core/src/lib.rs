//! Exact tooling for `p^x − q^y = n²` over consecutive primes `p > q`.
//!
//! * [`arith`]: square roots, perfect squares, modular powers and periods.
//! * [`primes`]: primality, stepping and consecutive pairs.
//! * [`quadring`]: arithmetic in `Z[√d]` and the binomial series behind the
//!   ring endgames.
//! * [`search`]: the bounded solver and per-pair classification.
//! * [`certificate`]: residue certificates and the descent prover.
//! * [`proofcheck`]: replay of the base-pair results, errata, and scans.
//!
//! Arithmetic is generic over the integer scalar (see [`scalar`]); the
//! aliases below fix the arbitrary-precision instantiations used by default.

pub mod arith;
pub mod certificate;
mod decimal;
pub mod primes;
pub mod proofcheck;
pub mod quadring;
pub mod scalar;
pub mod search;

pub use num_bigint::{BigInt, BigUint};

/// Arbitrary-precision natural number.
pub type Natural = BigUint;

/// Element of `Z[√d]` with arbitrary-precision coefficients.
pub type QuadInt = quadring::QuadIntOf<BigInt>;

/// Element of `Z[√d]` with 64-bit coefficients; for small exponents only.
pub type QuadInt64 = quadring::QuadIntOf<i64>;

pub use arith::{BitCap, PeriodInfo};
pub use certificate::{CertConfig, DescentProof, ResidueCertificate};
pub use primes::PrimePair;
pub use search::{Bounds, ClassificationRecord, Solution, SolutionSet, Verdict};
