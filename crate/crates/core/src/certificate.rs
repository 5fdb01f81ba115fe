//! Modular elimination certificates and the descent prover.
//!
//! A [`ResidueCertificate`] for modulus `m` lists the exponent classes
//! `(x mod r, y mod s)` for which `p^x − q^y` can still be a square modulo
//! `m`. Moduli sharing a factor with `p` or `q` are allowed: the classes then
//! apply from the preperiod of the power sequence onward, which is recorded
//! as the certificate's regime.
//!
//! [`prove_trivial_descent`] mechanizes the argument for pairs with
//! `p ≡ 3` and `q ≡ 1 (mod 4)`: parity of `x` from mod 4, the factorization
//! `(p^k − n)(p^k + n) = q^y`, forcing `2p^k = 1 + q^y`, and a finite cycle
//! check of `2p^k mod q²` that rules out `y ≥ 2`.

use std::collections::BTreeSet;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{
    eventual_period, multiplicative_order, pow_mod, square_residue_set, PeriodInfo,
};
use crate::primes::{is_prime_u64, PrimePair};
use crate::search::SolutionSet;

/// Largest class table (`x_period · y_period`) built for one modulus.
pub const DEFAULT_CLASS_CAP: u64 = 10_000;

/// Largest `2p^k mod q²` cycle the descent prover will enumerate.
pub const DEFAULT_CYCLE_CAP: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertError {
    #[error("modulus must be at least 2, got {0}")]
    ModulusTooSmall(u64),
    #[error("class table {x_period} x {y_period} exceeds cap {cap}")]
    TableTooLarge {
        x_period: u64,
        y_period: u64,
        cap: u64,
    },
    #[error("cannot compose an empty list of certificates")]
    Empty,
    #[error("certificates refer to different pairs")]
    PairMismatch,
}

/// Tuning knobs shared by the certificate search and the descent prover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertConfig {
    pub m_max: u64,
    pub class_cap: u64,
    pub cycle_cap: u64,
    /// How many top-ranked certificates a classification keeps as evidence.
    pub keep_certificates: usize,
}

impl Default for CertConfig {
    fn default() -> Self {
        CertConfig {
            m_max: 12,
            class_cap: DEFAULT_CLASS_CAP,
            cycle_cap: DEFAULT_CYCLE_CAP,
            keep_certificates: 3,
        }
    }
}

/// Smallest exponents from which the class constraints apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Regime {
    pub x: u64,
    pub y: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueCertificate {
    pub pair: PrimePair,
    /// The modulus, or the lcm of the component moduli for a composition.
    pub modulus: u64,
    /// Component moduli above 1, ascending.
    pub moduli: Vec<u64>,
    pub x_preperiod: u64,
    pub x_period: u64,
    pub y_preperiod: u64,
    pub y_period: u64,
    pub regime: Regime,
    #[serde(rename = "allowed_classes")]
    pub allowed: BTreeSet<(u64, u64)>,
}

impl ResidueCertificate {
    /// Certificate that forbids nothing; the identity for composition.
    pub fn trivial(pair: PrimePair) -> Self {
        ResidueCertificate {
            pair,
            modulus: 1,
            moduli: Vec::new(),
            x_preperiod: 0,
            x_period: 1,
            y_preperiod: 0,
            y_period: 1,
            regime: Regime::default(),
            allowed: BTreeSet::from([(0, 0)]),
        }
    }

    pub fn class_count(&self) -> u64 {
        self.x_period * self.y_period
    }

    pub fn eliminated(&self) -> u64 {
        self.class_count() - self.allowed.len() as u64
    }

    pub fn eliminated_fraction(&self) -> f64 {
        self.eliminated() as f64 / self.class_count() as f64
    }

    /// `None` outside the regime, where the certificate says nothing.
    pub fn class_of(&self, x: u64, y: u64) -> Option<(u64, u64)> {
        (x >= self.regime.x && y >= self.regime.y).then(|| (x % self.x_period, y % self.y_period))
    }

    pub fn admits(&self, x: u64, y: u64) -> bool {
        self.class_of(x, y)
            .is_none_or(|class| self.allowed.contains(&class))
    }

    /// Every allowed class has even `x`, so odd `x` is impossible in regime.
    pub fn forces_even_x(&self) -> bool {
        self.x_period.is_multiple_of(2) && self.allowed.iter().all(|&(a, _)| a % 2 == 0)
    }

    pub fn forces_even_y(&self) -> bool {
        self.y_period.is_multiple_of(2) && self.allowed.iter().all(|&(_, b)| b % 2 == 0)
    }

    /// The `x` classes that survive for at least one `y` class.
    pub fn allowed_x_classes(&self) -> BTreeSet<u64> {
        self.allowed.iter().map(|&(a, _)| a).collect()
    }
}

/// Residues of `p^x − q^y (mod m)` over one period of each power sequence,
/// kept when they are squares mod `m`.
pub fn build_certificate(
    pair: &PrimePair,
    m: u64,
    class_cap: u64,
) -> Result<ResidueCertificate, CertError> {
    if m < 2 {
        return Err(CertError::ModulusTooSmall(m));
    }
    let x_info = eventual_period(&pair.p(), &m);
    let y_info = eventual_period(&pair.q(), &m);
    if x_info.period.saturating_mul(y_info.period) > class_cap {
        return Err(CertError::TableTooLarge {
            x_period: x_info.period,
            y_period: y_info.period,
            cap: class_cap,
        });
    }
    let squares = square_residue_set(&m);
    let residues = |base: u64, info: &PeriodInfo| -> Vec<u64> {
        (0..info.period)
            .map(|class| pow_mod(&base, &info.representative(class), &m))
            .collect()
    };
    let p_res = residues(pair.p(), &x_info);
    let q_res = residues(pair.q(), &y_info);

    let mut allowed = BTreeSet::new();
    for (a, &pa) in p_res.iter().enumerate() {
        for (b, &qb) in q_res.iter().enumerate() {
            let diff = (pa + m - qb) % m;
            if squares.contains(&diff) {
                allowed.insert((a as u64, b as u64));
            }
        }
    }
    Ok(ResidueCertificate {
        pair: *pair,
        modulus: m,
        moduli: vec![m],
        x_preperiod: x_info.preperiod,
        x_period: x_info.period,
        y_preperiod: y_info.preperiod,
        y_period: y_info.period,
        regime: Regime {
            x: x_info.preperiod,
            y: y_info.preperiod,
        },
        allowed,
    })
}

/// Conjunction of several certificates for one pair: lifts every table to
/// the lcm periods and keeps a class only if each input admits it.
pub fn compose_certificates(
    certs: &[ResidueCertificate],
    class_cap: u64,
) -> Result<ResidueCertificate, CertError> {
    let first = certs.first().ok_or(CertError::Empty)?;
    if certs.iter().any(|c| c.pair != first.pair) {
        return Err(CertError::PairMismatch);
    }
    if certs.len() == 1 {
        return Ok(first.clone());
    }
    let x_period = certs.iter().fold(1u64, |acc, c| acc.lcm(&c.x_period));
    let y_period = certs.iter().fold(1u64, |acc, c| acc.lcm(&c.y_period));
    if x_period.saturating_mul(y_period) > class_cap {
        return Err(CertError::TableTooLarge {
            x_period,
            y_period,
            cap: class_cap,
        });
    }
    let mut allowed = BTreeSet::new();
    for a in 0..x_period {
        for b in 0..y_period {
            if certs
                .iter()
                .all(|c| c.allowed.contains(&(a % c.x_period, b % c.y_period)))
            {
                allowed.insert((a, b));
            }
        }
    }
    let moduli: BTreeSet<u64> = certs
        .iter()
        .flat_map(|c| c.moduli.iter().copied())
        .collect();
    let regime = Regime {
        x: certs.iter().map(|c| c.regime.x).max().unwrap_or(0),
        y: certs.iter().map(|c| c.regime.y).max().unwrap_or(0),
    };
    Ok(ResidueCertificate {
        pair: first.pair,
        modulus: certs.iter().fold(1u64, |acc, c| acc.lcm(&c.modulus)),
        moduli: moduli.into_iter().collect(),
        x_preperiod: certs.iter().map(|c| c.x_preperiod).max().unwrap_or(0),
        x_period,
        y_preperiod: certs.iter().map(|c| c.y_preperiod).max().unwrap_or(0),
        y_period,
        regime,
        allowed,
    })
}

/// True iff every solution inside the certificate's regime lands in an
/// allowed class.
pub fn check_soundness(cert: &ResidueCertificate, sols: &SolutionSet) -> Result<bool, CertError> {
    if cert.pair != sols.pair {
        return Err(CertError::PairMismatch);
    }
    Ok(sols
        .solutions
        .iter()
        .all(|s| cert.admits(s.x as u64, s.y as u64)))
}

/// Filter applied by [`search_modulus`].
#[derive(Debug, Clone, Copy)]
pub enum Goal {
    /// Keep every modulus that produced a table.
    Any,
    EliminatesSomething,
    EliminateOddX,
    EliminateOddY,
    Custom(fn(&ResidueCertificate) -> bool),
}

impl Goal {
    pub fn accepts(&self, cert: &ResidueCertificate) -> bool {
        match self {
            Goal::Any => true,
            Goal::EliminatesSomething => cert.eliminated() > 0,
            Goal::EliminateOddX => cert.forces_even_x(),
            Goal::EliminateOddY => cert.forces_even_y(),
            Goal::Custom(f) => f(cert),
        }
    }
}

/// Builds a certificate for every `m` in `2..=m_max`, skipping oversize
/// tables, and ranks those meeting `goal` by eliminated fraction
/// (descending), then modulus (ascending).
pub fn search_modulus(
    pair: &PrimePair,
    m_max: u64,
    goal: Goal,
    config: &CertConfig,
) -> Vec<ResidueCertificate> {
    let mut found: Vec<ResidueCertificate> = (2..=m_max.max(1))
        .into_par_iter()
        .filter_map(|m| build_certificate(pair, m, config.class_cap).ok())
        .filter(|c| goal.accepts(c))
        .collect();
    found.sort_by(|l, r| {
        let lhs = l.eliminated() as u128 * r.class_count() as u128;
        let rhs = r.eliminated() as u128 * l.class_count() as u128;
        rhs.cmp(&lhs).then(l.modulus.cmp(&r.modulus))
    });
    found
}

/// The step of the descent template that a proof attempt stopped at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DescentStep {
    Precondition,
    Parity,
    Factorization,
    ExponentForcing,
    CycleCheck,
    SmallCases,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Error)]
#[error("descent inconclusive at {step:?}: {reason}")]
pub struct Inconclusive {
    pub step: DescentStep,
    pub reason: String,
}

impl Inconclusive {
    fn at(step: DescentStep, reason: impl Into<String>) -> Self {
        Inconclusive {
            step,
            reason: reason.into(),
        }
    }
}

/// `x = 0` forces `y = 0`; for `x ≥ 1` odd, `p^x − q^y ≡ 3 − 1 = 2 (mod 4)`,
/// which is not a square, so `x = 2k` with `k ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityStep {
    pub p_mod_4: u64,
    pub q_mod_4: u64,
    pub squares_mod_4: Vec<u64>,
    pub odd_x_residue: u64,
}

/// `(p^k − n)(p^k + n) = q^y` with `q` prime, so both factors are powers of
/// `q`: `p^k − n = q^a`, `p^k + n = q^b`, `a + b = y`, `a < b` since `n > 0`
/// (`n = 0` would give `p^(2k) = q^y`, impossible for distinct primes).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorizationStep {
    pub q_is_prime: bool,
    pub distinct_primes: bool,
}

/// `q^a` divides both factors, hence their sum `2p^k`; since
/// `gcd(2p, q) = 1`, `a = 0` and `2p^k = 1 + q^y`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentForcingStep {
    pub gcd_two_p_q: u64,
}

/// For `y ≥ 2`, `2p^k ≡ 1 (mod q²)`. `residues` lists `2p^k mod q²` for
/// `k = 1..=order`, a full cycle; `1` is absent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleStep {
    pub modulus: u64,
    pub order: u64,
    pub residues: Vec<u64>,
}

/// `y = 1`: `2p^k ≥ 2p > q + 1`. `y = 0`: `2p^k = 2` has no `k ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmallCasesStep {
    pub two_p: u64,
    pub q_plus_one: u64,
}

/// Replayable proof that `(p, q)` is trivially squared.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescentProof {
    pub pair: PrimePair,
    pub parity: ParityStep,
    pub factorization: FactorizationStep,
    pub exponent_forcing: ExponentForcingStep,
    pub cycle: CycleStep,
    pub small_cases: SmallCasesStep,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("replay failed at {step:?}: {detail}")]
pub struct ReplayFailure {
    pub step: DescentStep,
    pub detail: String,
}

fn replay_check(ok: bool, step: DescentStep, detail: &str) -> Result<(), ReplayFailure> {
    if ok {
        Ok(())
    } else {
        Err(ReplayFailure {
            step,
            detail: detail.to_string(),
        })
    }
}

impl DescentProof {
    /// Recomputes every stored fact from scratch.
    pub fn replay(&self) -> Result<(), ReplayFailure> {
        let (p, q) = (self.pair.p(), self.pair.q());
        use DescentStep::*;

        replay_check(
            p % 4 == 3 && q % 4 == 1,
            Precondition,
            "p ≡ 3, q ≡ 1 (mod 4)",
        )?;
        let squares4: Vec<u64> = square_residue_set(&4u64).into_iter().collect();
        let par = &self.parity;
        replay_check(
            par.p_mod_4 == p % 4 && par.q_mod_4 == q % 4 && par.squares_mod_4 == squares4,
            Parity,
            "stored residues mod 4",
        )?;
        replay_check(
            par.odd_x_residue == (p % 4 + 4 - q % 4) % 4 && !squares4.contains(&par.odd_x_residue),
            Parity,
            "odd x residue must be a non-square mod 4",
        )?;

        replay_check(
            self.factorization.q_is_prime == is_prime_u64(q)
                && self.factorization.q_is_prime
                && self.factorization.distinct_primes == (p != q)
                && self.factorization.distinct_primes,
            Factorization,
            "q prime and p ≠ q",
        )?;

        let g = (2 * p).gcd(&q);
        replay_check(
            self.exponent_forcing.gcd_two_p_q == g && g == 1,
            ExponentForcing,
            "gcd(2p, q) = 1",
        )?;

        let cyc = &self.cycle;
        let m = q * q;
        let order = multiplicative_order(&p, &m).map_err(|e| ReplayFailure {
            step: CycleCheck,
            detail: e.to_string(),
        })?;
        let residues: Vec<u64> = (1..=order).map(|k| 2 * pow_mod(&p, &k, &m) % m).collect();
        replay_check(
            cyc.modulus == m && cyc.order == order && cyc.residues == residues,
            CycleCheck,
            "stored cycle of 2p^k mod q²",
        )?;
        replay_check(!residues.contains(&(1 % m)), CycleCheck, "1 must be absent")?;

        let sc = &self.small_cases;
        replay_check(
            sc.two_p == 2 * p && sc.q_plus_one == q + 1 && sc.two_p > sc.q_plus_one && p > 1,
            SmallCases,
            "2p > q + 1 and p > 1",
        )?;
        Ok(())
    }

    /// Human-readable step list.
    pub fn steps(&self) -> Vec<String> {
        let (p, q) = (self.pair.p(), self.pair.q());
        vec![
            format!(
                "parity: odd x gives p^x - q^y ≡ {} (mod 4), not in {:?}, so x = 2k",
                self.parity.odd_x_residue, self.parity.squares_mod_4
            ),
            format!("factorization: ({p}^k - n)({p}^k + n) = {q}^y forces {q}^a, {q}^b"),
            format!(
                "exponent forcing: gcd(2·{p}, {q}) = {} so a = 0 and 2·{p}^k = 1 + {q}^y",
                self.exponent_forcing.gcd_two_p_q
            ),
            format!(
                "cycle check: 2·{p}^k mod {} over {} steps is {:?}, 1 absent, so y < 2",
                self.cycle.modulus, self.cycle.order, self.cycle.residues
            ),
            format!(
                "small cases: y = 1 needs 2·{p}^k = {} < {}; y = 0 needs {p}^k = 1",
                self.small_cases.q_plus_one, self.small_cases.two_p
            ),
        ]
    }
}

/// Attempts the descent argument. Any failed step is reported, never
/// treated as a proof.
pub fn prove_trivial_descent(
    pair: &PrimePair,
    config: &CertConfig,
) -> Result<DescentProof, Inconclusive> {
    let (p, q) = (pair.p(), pair.q());
    if p % 4 != 3 {
        return Err(Inconclusive::at(
            DescentStep::Precondition,
            format!("p ≡ {} mod 4, template needs p ≡ 3 mod 4", p % 4),
        ));
    }
    if q % 4 != 1 {
        return Err(Inconclusive::at(
            DescentStep::Precondition,
            format!("q ≡ {} mod 4, template needs q ≡ 1 mod 4", q % 4),
        ));
    }

    let squares4: Vec<u64> = square_residue_set(&4u64).into_iter().collect();
    let odd_x_residue = (p % 4 + 4 - q % 4) % 4;
    if squares4.contains(&odd_x_residue) {
        return Err(Inconclusive::at(
            DescentStep::Parity,
            "odd x not excluded mod 4",
        ));
    }

    if !is_prime_u64(q) {
        return Err(Inconclusive::at(
            DescentStep::Factorization,
            "q is not prime",
        ));
    }

    let gcd_two_p_q = (2 * p).gcd(&q);
    if gcd_two_p_q != 1 {
        return Err(Inconclusive::at(
            DescentStep::ExponentForcing,
            format!("gcd(2p, q) = {gcd_two_p_q}"),
        ));
    }

    let m = q
        .checked_mul(q)
        .ok_or_else(|| Inconclusive::at(DescentStep::CycleCheck, "q² overflows u64"))?;
    let order = cycle_length(p, m, config.cycle_cap).ok_or_else(|| {
        Inconclusive::at(
            DescentStep::CycleCheck,
            format!(
                "order of {p} mod {m} exceeds cycle cap {}",
                config.cycle_cap
            ),
        )
    })?;
    let mut residues = Vec::with_capacity(order as usize);
    let mut pk = 1u64;
    for _ in 0..order {
        pk = ((pk as u128 * p as u128) % m as u128) as u64;
        residues.push(((2 * pk as u128) % m as u128) as u64);
    }
    if let Some(pos) = residues.iter().position(|&r| r == 1) {
        return Err(Inconclusive::at(
            DescentStep::CycleCheck,
            format!("2·{p}^{} ≡ 1 (mod {m}); y ≥ 2 not excluded", pos + 1),
        ));
    }

    Ok(DescentProof {
        pair: *pair,
        parity: ParityStep {
            p_mod_4: p % 4,
            q_mod_4: q % 4,
            squares_mod_4: squares4,
            odd_x_residue,
        },
        factorization: FactorizationStep {
            q_is_prime: true,
            distinct_primes: p != q,
        },
        exponent_forcing: ExponentForcingStep { gcd_two_p_q },
        cycle: CycleStep {
            modulus: m,
            order,
            residues,
        },
        small_cases: SmallCasesStep {
            two_p: 2 * p,
            q_plus_one: q + 1,
        },
    })
}

/// Multiplicative order of `a` mod `m`, giving up past `cap` steps.
fn cycle_length(a: u64, m: u64, cap: u64) -> Option<u64> {
    if a.gcd(&m) != 1 {
        return None;
    }
    let base = a % m;
    let mut acc = base;
    let mut t = 1;
    while acc != 1 % m {
        if t >= cap {
            return None;
        }
        acc = ((acc as u128 * base as u128) % m as u128) as u64;
        t += 1;
    }
    Some(t)
}
