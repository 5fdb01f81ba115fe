//! Bounded exhaustive search for `p^x − q^y = n²` and per-pair verdicts.

use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::is_perfect_square;
use crate::certificate::{
    check_soundness, prove_trivial_descent, search_modulus, CertConfig, DescentProof, Goal,
    Inconclusive,
};
use crate::primes::PrimePair;
use crate::scalar::UInt;

pub const DEFAULT_MAX_EXPONENT: u32 = 64;

/// Exponent and magnitude limits for one search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bounds {
    pub max_x: u32,
    pub max_y: u32,
    pub max_bits: u64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_x: DEFAULT_MAX_EXPONENT,
            max_y: DEFAULT_MAX_EXPONENT,
            max_bits: crate::arith::DEFAULT_BIT_CAP,
        }
    }
}

impl Bounds {
    pub fn new(max_x: u32, max_y: u32) -> Self {
        Bounds {
            max_x,
            max_y,
            ..Bounds::default()
        }
    }
}

/// `p^x − q^y = n²`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Solution {
    pub x: u32,
    pub y: u32,
    #[serde(with = "crate::decimal::natural")]
    pub n: BigUint,
}

impl Solution {
    pub fn new(x: u32, y: u32, n: impl Into<BigUint>) -> Self {
        Solution { x, y, n: n.into() }
    }

    pub fn is_trivial(&self) -> bool {
        self.x == 0 && self.y == 0
    }

    /// Recomputes both powers from scratch and checks the equation.
    pub fn validate(&self, pair: &PrimePair) -> bool {
        let lhs = BigUint::from(pair.p()).pow(self.x);
        let rhs = BigUint::from(pair.q()).pow(self.y) + &self.n * &self.n;
        lhs == rhs
    }

    pub fn exponents(&self) -> (u32, u32) {
        (self.x, self.y)
    }
}

impl fmt::Display for Solution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.n)
    }
}

/// Every solution inside the searched box, sorted by `(x, y)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionSet {
    pub pair: PrimePair,
    pub bounds: Bounds,
    /// Largest `x` actually searched; below `bounds.max_x` when `p^x`
    /// would exceed `bounds.max_bits`.
    pub effective_max_x: u32,
    pub truncated: bool,
    pub solutions: Vec<Solution>,
}

impl SolutionSet {
    pub fn witnesses(&self) -> impl Iterator<Item = &Solution> {
        self.solutions.iter().filter(|s| !s.is_trivial())
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        self.solutions.iter().any(|s| s.x == x && s.y == y)
    }
}

/// Raw search over any unsigned scalar width. Stops increasing `x` at the
/// first power that overflows `T` or exceeds `max_bits`; returns the
/// triples found and the last `x` searched.
pub fn solve_in<T: UInt>(p: u64, q: u64, bounds: &Bounds) -> (Vec<(u32, u32, T)>, u32, bool) {
    let p_t = T::from_u64(p).expect("prime fits scalar");
    let q_t = T::from_u64(q).expect("prime fits scalar");
    let mut found = Vec::new();
    let mut p_pow = T::one();
    let mut effective = 0;
    let mut truncated = false;
    for x in 0..=bounds.max_x {
        if x > 0 {
            match p_pow.checked_mul(&p_t) {
                Some(next) if next.bits() <= bounds.max_bits => p_pow = next,
                _ => {
                    truncated = true;
                    break;
                }
            }
        }
        effective = x;
        let mut q_pow = T::one();
        for y in 0..=bounds.max_y {
            if y > 0 {
                match q_pow.checked_mul(&q_t) {
                    Some(next) => q_pow = next,
                    None => break,
                }
            }
            if q_pow > p_pow {
                break;
            }
            let diff = p_pow.clone() - q_pow.clone();
            if let Some(root) = is_perfect_square(&diff) {
                found.push((x, y, root));
            }
        }
    }
    (found, effective, truncated)
}

/// Exhaustive solutions of `p^x − q^y = n²` with `x ≤ max_x`, `y ≤ max_y`.
///
/// `(0, 0, 0)` is always present. If `p^x` outgrows `max_bits` the x-range
/// is cut short and `truncated` is set.
pub fn solve_pair(pair: &PrimePair, bounds: &Bounds) -> SolutionSet {
    let (found, effective_max_x, truncated) = solve_in::<BigUint>(pair.p(), pair.q(), bounds);
    let mut solutions: Vec<Solution> = found
        .into_iter()
        .map(|(x, y, n)| Solution { x, y, n })
        .collect();
    solutions.sort();
    debug_assert!(solutions
        .first()
        .is_some_and(|s| s.is_trivial() && s.n.is_zero()));
    SolutionSet {
        pair: *pair,
        bounds: *bounds,
        effective_max_x,
        truncated,
        solutions,
    }
}

/// Per-pair outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    ProvedTrivial { proof: DescentProof },
    Nontrivial { witnesses: Vec<Solution> },
    Unresolved,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::ProvedTrivial { .. } => "proved_trivial",
            Verdict::Nontrivial { .. } => "nontrivial",
            Verdict::Unresolved => "unresolved",
        }
    }
}

/// Short record of a certificate consulted during classification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub modulus: u64,
    pub x_period: u64,
    pub y_period: u64,
    pub allowed: usize,
    pub total: u64,
    pub sound: bool,
}

/// What was searched and checked to reach a verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub bounds: Bounds,
    pub effective_max_x: u32,
    pub truncated: bool,
    pub solution_count: usize,
    pub certificates: Vec<CertificateSummary>,
    /// Why the descent template did not apply, when it did not.
    pub descent: Option<Inconclusive>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationRecord {
    pub pair: PrimePair,
    #[serde(flatten)]
    pub verdict: Verdict,
    pub evidence: Evidence,
    /// False if a descent proof and a nontrivial witness were both found,
    /// which would mean the prover is unsound.
    pub consistent: bool,
}

impl ClassificationRecord {
    pub fn witnesses(&self) -> &[Solution] {
        match &self.verdict {
            Verdict::Nontrivial { witnesses } => witnesses,
            _ => &[],
        }
    }

    /// Every stored witness satisfies the equation and every stored proof
    /// replays.
    pub fn revalidate(&self) -> bool {
        match &self.verdict {
            Verdict::Nontrivial { witnesses } => {
                !witnesses.is_empty()
                    && witnesses
                        .iter()
                        .all(|w| !w.is_trivial() && w.validate(&self.pair))
            }
            Verdict::ProvedTrivial { proof } => proof.pair == self.pair && proof.replay().is_ok(),
            Verdict::Unresolved => true,
        }
    }

    pub fn has_unit_witness(&self) -> bool {
        self.witnesses().iter().any(|w| w.x == 1 && w.y == 0)
    }
}

/// Nontrivial when the bounded search finds a witness, ProvedTrivial when
/// the descent template closes, Unresolved otherwise. An empty search alone
/// never yields ProvedTrivial.
pub fn classify_pair(
    pair: &PrimePair,
    bounds: &Bounds,
    config: &CertConfig,
) -> ClassificationRecord {
    let sols = solve_pair(pair, bounds);
    let witnesses: Vec<Solution> = sols.witnesses().cloned().collect();
    let descent = prove_trivial_descent(pair, config);

    let certificates = search_modulus(pair, config.m_max, Goal::EliminatesSomething, config)
        .into_iter()
        .take(config.keep_certificates)
        .map(|c| CertificateSummary {
            modulus: c.modulus,
            x_period: c.x_period,
            y_period: c.y_period,
            allowed: c.allowed.len(),
            total: c.class_count(),
            sound: check_soundness(&c, &sols).unwrap_or(false),
        })
        .collect();

    let consistent = witnesses.is_empty() || descent.is_err();
    let (verdict, descent_failure) = match descent {
        _ if !witnesses.is_empty() => (Verdict::Nontrivial { witnesses }, None),
        Ok(proof) => (Verdict::ProvedTrivial { proof }, None),
        Err(why) => (Verdict::Unresolved, Some(why)),
    };

    ClassificationRecord {
        pair: *pair,
        verdict,
        evidence: Evidence {
            bounds: *bounds,
            effective_max_x: sols.effective_max_x,
            truncated: sols.truncated,
            solution_count: sols.solutions.len(),
            certificates,
            descent: descent_failure,
        },
        consistent,
    }
}
