//! Versioned report envelope and its JSON, CSV and text renderings.

use std::fmt::Write as _;

use primesquare::certificate::{DescentProof, Inconclusive, ResidueCertificate};
use primesquare::proofcheck::{ConjectureScanReport, Counterexample, Erratum, PropositionReport};
use primesquare::search::{Bounds, SolutionSet};
use primesquare::PrimePair;
use serde::{Deserialize, Serialize};

use crate::args::Format;
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Settings that determine a run's result, echoed into every report.
/// Worker count and file paths are left out: they never change the payload.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub subcommand: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_x: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_y: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_bits: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_max_m: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<(i64, i64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pow: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve_imag: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xmax: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imag_xmax: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifyPayload {
    pub pair: PrimePair,
    pub certificates: Vec<ResidueCertificate>,
    /// Conjunction of all listed certificates, when there is more than one
    /// and the lcm table fits.
    pub composed: Option<ResidueCertificate>,
    pub soundness_bounds: Bounds,
    /// Every listed certificate admits every solution found within
    /// `soundness_bounds`.
    pub sound_against_search: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescentPayload {
    pub pair: PrimePair,
    pub proved: bool,
    pub proof: Option<DescentProof>,
    pub steps: Vec<String>,
    pub inconclusive: Option<Inconclusive>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingElement {
    pub a: String,
    pub b: String,
    pub d: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingPower {
    pub exponent: u64,
    pub value: RingElement,
    pub norm: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImagSolve {
    pub target: i64,
    pub xmax: u64,
    pub solutions: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingPayload {
    pub base: RingElement,
    pub base_norm: String,
    pub power: Option<RingPower>,
    pub imag_solve: Option<ImagSolve>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyPayload {
    pub reports: Vec<PropositionReport>,
    pub errata: Vec<Erratum>,
    pub all_solution_sets_match: bool,
    /// Set when any erratum was recorded; does not affect the exit code.
    pub errata_found: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    SolutionSet(SolutionSet),
    Certificates(CertifyPayload),
    Descent(DescentPayload),
    Ring(RingPayload),
    Propositions(VerifyPayload),
    Scan(ConjectureScanReport),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub schema_version: u32,
    pub tool_version: String,
    pub timestamp: String,
    pub config: ConfigEcho,
    pub payload: Payload,
}

impl ReportEnvelope {
    pub fn new(timestamp: String, config: ConfigEcho, payload: Payload) -> Self {
        ReportEnvelope {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            timestamp,
            config,
            payload,
        }
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => Ok(self.to_json()),
            Format::Csv => self.to_csv(),
            Format::Text => Ok(self.to_text()),
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        match &self.payload {
            Payload::SolutionSet(set) => {
                w.write_record(["p", "q", "x", "y", "n"])
                    .expect("in-memory write");
                for s in &set.solutions {
                    w.write_record([
                        set.pair.p().to_string(),
                        set.pair.q().to_string(),
                        s.x.to_string(),
                        s.y.to_string(),
                        s.n.to_string(),
                    ])
                    .expect("in-memory write");
                }
            }
            Payload::Scan(report) => {
                w.write_record(["p", "q", "verdict", "solution_count", "witnesses"])
                    .expect("in-memory write");
                for r in &report.records {
                    let witnesses = r
                        .witnesses()
                        .iter()
                        .map(|s| format!("{}:{}:{}", s.x, s.y, s.n))
                        .collect::<Vec<_>>()
                        .join(";");
                    w.write_record([
                        r.pair.p().to_string(),
                        r.pair.q().to_string(),
                        r.verdict.label().to_string(),
                        r.evidence.solution_count.to_string(),
                        witnesses,
                    ])
                    .expect("in-memory write");
                }
            }
            _ => {
                return Err(CliError::usage(
                    "csv output is available for solve and scan only",
                ))
            }
        }
        let bytes = w.into_inner().expect("in-memory flush");
        Ok(String::from_utf8(bytes).expect("csv of ascii fields"))
    }

    fn to_text(&self) -> String {
        let mut out = String::new();
        match &self.payload {
            Payload::SolutionSet(set) => {
                let _ = writeln!(
                    out,
                    "{}^x - {}^y = n^2, x <= {}, y <= {}",
                    set.pair.p(),
                    set.pair.q(),
                    set.effective_max_x,
                    set.bounds.max_y
                );
                if set.truncated {
                    let _ = writeln!(
                        out,
                        "x-range truncated by the {}-bit cap",
                        set.bounds.max_bits
                    );
                }
                for s in &set.solutions {
                    let _ = writeln!(out, "  (x, y, n) = {s}");
                }
            }
            Payload::Scan(r) => {
                let _ = writeln!(
                    out,
                    "pairs with p <= {}: {} proved trivial, {} nontrivial, {} unresolved",
                    r.limit, r.counts.proved_trivial, r.counts.nontrivial, r.counts.unresolved
                );
                let _ = writeln!(
                    out,
                    "twin pairs with p ≡ 3 (mod 4): {}",
                    r.twin_3_mod_4.len()
                );
                let _ = writeln!(
                    out,
                    "pairs with witness (1, 0): {}",
                    r.unit_witness_pairs.len()
                );
                for rec in &r.records {
                    let _ = writeln!(out, "  {} {}", rec.pair, rec.verdict.label());
                }
            }
            Payload::Certificates(c) => {
                for cert in &c.certificates {
                    let _ = writeln!(
                        out,
                        "mod {}: {}/{} classes allowed",
                        cert.modulus,
                        cert.allowed.len(),
                        cert.class_count()
                    );
                }
            }
            Payload::Descent(d) => {
                if let Some(why) = &d.inconclusive {
                    let _ = writeln!(out, "{}: {why}", d.pair);
                }
                for s in &d.steps {
                    let _ = writeln!(out, "  {s}");
                }
            }
            Payload::Ring(r) => {
                let _ = writeln!(out, "{r:?}");
            }
            Payload::Propositions(v) => {
                for rep in &v.reports {
                    let _ = writeln!(
                        out,
                        "proposition {}: {}",
                        rep.id,
                        if rep.passed { "pass" } else { "FAIL" }
                    );
                }
                for e in &v.errata {
                    let _ = writeln!(
                        out,
                        "erratum at {}: {}",
                        e.location,
                        describe(&e.counterexample)
                    );
                }
            }
        }
        out
    }
}

fn describe(c: &Counterexample) -> String {
    match c {
        Counterexample::Monotonicity { x, f_x, f_next } => {
            format!("f({x}) = {f_x}, f({}) = {f_next}", x + 2)
        }
        Counterexample::ClassSet {
            modulus,
            period,
            claimed,
            computed,
            ..
        } => format!("mod {modulus}, x mod {period}: claimed {claimed:?}, computed {computed:?}"),
    }
}

/// Verdict label for each scanned pair, for cross-format comparison.
pub fn scan_verdicts(report: &ConjectureScanReport) -> Vec<(u64, u64, &'static str)> {
    report
        .records
        .iter()
        .map(|r| (r.pair.p(), r.pair.q(), r.verdict.label()))
        .collect()
}
