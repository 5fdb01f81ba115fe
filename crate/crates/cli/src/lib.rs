//! Library side of the `primesquare` binary: argument handling, dispatch,
//! report rendering and resumable scans.

pub mod args;
pub mod error;
pub mod report;
pub mod scan;

use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::Parser;
use primesquare::certificate::{
    build_certificate, check_soundness, compose_certificates, prove_trivial_descent,
    search_modulus, CertConfig, Goal,
};
use primesquare::proofcheck::{check_errata, verify_propositions, VerifyConfig, DEFAULT_IMAG_XMAX};
use primesquare::search::{solve_pair, Bounds};
use primesquare::{BigInt, PrimePair, QuadInt};

use crate::args::*;
use crate::error::{ErrorBody, ErrorObject};
use crate::report::*;
use crate::scan::{ScanJob, ScanOutcome, CHECKPOINT_EVERY};

pub use crate::error::CliError;

/// Result of one invocation: exit code, text for stdout, and the
/// machine-readable error for stderr when the run failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub code: i32,
    pub stdout: String,
    pub error: Option<ErrorObject>,
}

impl RunOutput {
    fn ok(stdout: String) -> Self {
        RunOutput {
            code: 0,
            stdout,
            error: None,
        }
    }

    fn failed(err: &CliError) -> Self {
        RunOutput {
            code: err.exit_code(),
            stdout: String::new(),
            error: Some(err.to_object()),
        }
    }
}

/// Runs one command line (without the program name), stamping reports with
/// `SOURCE_DATE_EPOCH` when set and the current time otherwise.
pub fn run<I, S>(argv: I) -> RunOutput
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    run_at(argv, &default_timestamp())
}

/// As [`run`], with a fixed report timestamp.
pub fn run_at<I, S>(argv: I, timestamp: &str) -> RunOutput
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let full = std::iter::once("primesquare".to_string()).chain(argv.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(full) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => RunOutput::ok(e.to_string()),
                _ => RunOutput::failed(&CliError::usage(e.render().to_string().trim_end())),
            }
        }
    };
    match dispatch(cli.command, timestamp) {
        Ok(out) => out,
        Err(e) => RunOutput::failed(&e),
    }
}

pub fn default_timestamp() -> String {
    let when = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0))
        .unwrap_or_else(chrono::Utc::now);
    when.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn dispatch(command: Command, timestamp: &str) -> Result<RunOutput, CliError> {
    match command {
        Command::Solve(a) => solve(a, timestamp),
        Command::Scan(a) => scan_cmd(a, timestamp),
        Command::Certify(a) => certify(a, timestamp),
        Command::Descent(a) => descent(a, timestamp),
        Command::Ring(a) => ring(a, timestamp),
        Command::VerifyPaper(a) => verify(a, timestamp),
    }
}

fn in_range<T: PartialOrd + std::fmt::Display>(
    name: &str,
    v: T,
    lo: T,
    hi: T,
) -> Result<T, CliError> {
    if v < lo || v > hi {
        return Err(CliError::usage(format!(
            "--{name} must be in {lo}..={hi}, got {v}"
        )));
    }
    Ok(v)
}

fn pair_of(a: &PairArgs) -> Result<PrimePair, CliError> {
    PrimePair::new(a.p, a.q).map_err(|e| CliError::usage(e.to_string()))
}

fn bounds_of(max_x: u32, max_y: u32, max_bits: u64) -> Result<Bounds, CliError> {
    Ok(Bounds {
        max_x: in_range("max-x", max_x, 0, MAX_EXPONENT_CAP)?,
        max_y: in_range("max-y", max_y, 0, MAX_EXPONENT_CAP)?,
        max_bits: in_range("max-bits", max_bits, 1, MAX_BITS_CAP)?,
    })
}

/// Writes to `out` when given, otherwise returns the text for stdout.
fn emit(text: String, out: Option<&Path>) -> Result<String, CliError> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|source| CliError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn solve(a: SolveArgs, timestamp: &str) -> Result<RunOutput, CliError> {
    let pair = pair_of(&a.pair)?;
    let bounds = bounds_of(a.max_x, a.max_y, a.max_bits)?;
    let config = ConfigEcho {
        subcommand: "solve".into(),
        p: Some(pair.p()),
        q: Some(pair.q()),
        max_x: Some(bounds.max_x),
        max_y: Some(bounds.max_y),
        max_bits: Some(bounds.max_bits),
        format: Some(a.format),
        ..Default::default()
    };
    let env = ReportEnvelope::new(
        timestamp.into(),
        config,
        Payload::SolutionSet(solve_pair(&pair, &bounds)),
    );
    Ok(RunOutput::ok(emit(
        env.render(a.format)?,
        a.out.as_deref(),
    )?))
}

fn scan_cmd(a: ScanArgs, timestamp: &str) -> Result<RunOutput, CliError> {
    let limit = in_range("limit", a.limit, 0, LIMIT_CAP)?;
    let bounds = bounds_of(a.max_x, a.max_y, primesquare::arith::DEFAULT_BIT_CAP)?;
    let m_max = in_range("m-max", a.m_max, 2, M_MAX_CAP)?;
    let workers = match a.workers {
        Some(w) => in_range("workers", w, 1, WORKERS_CAP)?,
        None => std::thread::available_parallelism().map_or(1, |n| n.get().min(WORKERS_CAP)),
    };
    let job = ScanJob {
        limit,
        bounds,
        cert: CertConfig {
            m_max,
            ..CertConfig::default()
        },
    };
    let checkpoint = checkpoint_path(a.resume.as_deref(), a.out.as_deref());
    let report = match scan::execute(&job, workers, checkpoint.as_deref(), CHECKPOINT_EVERY, None)?
    {
        ScanOutcome::Complete(r) => r,
        ScanOutcome::Interrupted { .. } => unreachable!("no chunk limit was set"),
    };
    let config = ConfigEcho {
        subcommand: "scan".into(),
        limit: Some(limit),
        max_x: Some(bounds.max_x),
        max_y: Some(bounds.max_y),
        max_bits: Some(bounds.max_bits),
        m_max: Some(m_max),
        format: Some(a.format),
        ..Default::default()
    };
    let env = ReportEnvelope::new(timestamp.into(), config, Payload::Scan(report));
    Ok(RunOutput::ok(emit(
        env.render(a.format)?,
        a.out.as_deref(),
    )?))
}

/// `--resume` names the checkpoint file to read and keep updating. Without
/// it, a scan with `--out` checkpoints next to its output.
pub fn checkpoint_path(resume: Option<&Path>, out: Option<&Path>) -> Option<PathBuf> {
    resume.map(Path::to_path_buf).or_else(|| {
        out.map(|o| {
            let mut p = o.as_os_str().to_owned();
            p.push(".checkpoint");
            PathBuf::from(p)
        })
    })
}

fn certify(a: CertifyArgs, timestamp: &str) -> Result<RunOutput, CliError> {
    let pair = pair_of(&a.pair)?;
    let cfg = CertConfig::default();
    let certificates = match (a.modulus, a.search_max_m) {
        (Some(m), _) => {
            let m = in_range("modulus", m, 2, u32::MAX as u64)?;
            vec![build_certificate(&pair, m, cfg.class_cap)
                .map_err(|e| CliError::usage(e.to_string()))?]
        }
        (None, Some(n)) => {
            let n = in_range("search-max-m", n, 2, M_MAX_CAP)?;
            search_modulus(&pair, n, Goal::EliminatesSomething, &cfg)
        }
        (None, None) => unreachable!("clap enforces one of --modulus and --search-max-m"),
    };
    let composed = if certificates.len() > 1 {
        compose_certificates(&certificates, cfg.class_cap).ok()
    } else {
        None
    };
    let soundness_bounds = Bounds::default();
    let sols = solve_pair(&pair, &soundness_bounds);
    let sound_against_search = certificates
        .iter()
        .chain(composed.iter())
        .all(|c| check_soundness(c, &sols) == Ok(true));
    let config = ConfigEcho {
        subcommand: "certify".into(),
        p: Some(pair.p()),
        q: Some(pair.q()),
        modulus: a.modulus,
        search_max_m: a.search_max_m,
        ..Default::default()
    };
    let payload = Payload::Certificates(CertifyPayload {
        pair,
        certificates,
        composed,
        soundness_bounds,
        sound_against_search,
    });
    Ok(RunOutput::ok(
        ReportEnvelope::new(timestamp.into(), config, payload).to_json(),
    ))
}

fn descent(a: PairArgs, timestamp: &str) -> Result<RunOutput, CliError> {
    let pair = pair_of(&a)?;
    let payload = match prove_trivial_descent(&pair, &CertConfig::default()) {
        Ok(proof) => DescentPayload {
            pair,
            proved: true,
            steps: proof.steps(),
            proof: Some(proof),
            inconclusive: None,
        },
        Err(why) => DescentPayload {
            pair,
            proved: false,
            proof: None,
            steps: Vec::new(),
            inconclusive: Some(why),
        },
    };
    let config = ConfigEcho {
        subcommand: "descent".into(),
        p: Some(pair.p()),
        q: Some(pair.q()),
        ..Default::default()
    };
    let env = ReportEnvelope::new(timestamp.into(), config, Payload::Descent(payload));
    Ok(RunOutput::ok(env.to_json()))
}

fn parse_base(s: &str) -> Result<(i64, i64), CliError> {
    let bad = || {
        CliError::usage(format!(
            "--base must be `a,b` with integer parts, got {s:?}"
        ))
    };
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn element(u: &QuadInt) -> RingElement {
    RingElement {
        a: u.a().to_string(),
        b: u.b().to_string(),
        d: u.d(),
    }
}

fn ring(a: RingArgs, timestamp: &str) -> Result<RunOutput, CliError> {
    let d: i64 =
        a.d.parse()
            .map_err(|_| CliError::usage("--d must be -1 or -2"))?;
    let (ba, bb) = parse_base(&a.base)?;
    let base = QuadInt::from_i64(ba, bb, d).map_err(|e| CliError::usage(e.to_string()))?;
    let power = match a.pow {
        Some(e) => {
            let e = in_range("pow", e, 0, RING_EXPONENT_CAP)?;
            let value = base.pow(e);
            Some(RingPower {
                exponent: e,
                norm: value.norm().to_string(),
                value: element(&value),
            })
        }
        None => None,
    };
    let imag_solve = match (a.solve_imag, a.xmax) {
        (Some(target), Some(xmax)) => {
            let xmax = in_range("xmax", xmax, 1, RING_EXPONENT_CAP)?;
            let hits = base.solve_imag_equals(&BigInt::from(target), xmax);
            Some(ImagSolve {
                target,
                xmax,
                solutions: hits.into_iter().collect(),
            })
        }
        _ => None,
    };
    let config = ConfigEcho {
        subcommand: "ring".into(),
        d: Some(d),
        base: Some((ba, bb)),
        pow: a.pow,
        solve_imag: a.solve_imag,
        xmax: a.xmax,
        ..Default::default()
    };
    let payload = Payload::Ring(RingPayload {
        base: element(&base),
        base_norm: base.norm().to_string(),
        power,
        imag_solve,
    });
    Ok(RunOutput::ok(
        ReportEnvelope::new(timestamp.into(), config, payload).to_json(),
    ))
}

fn verify(a: VerifyArgs, timestamp: &str) -> Result<RunOutput, CliError> {
    let bounds = bounds_of(a.max_x, a.max_y, primesquare::arith::DEFAULT_BIT_CAP)?;
    let vc = VerifyConfig {
        bounds,
        imag_xmax: DEFAULT_IMAG_XMAX,
        ..VerifyConfig::default()
    };
    let reports = verify_propositions(&vc);
    let errata = check_errata(vc.errata_xmax);
    let mismatched: Vec<String> = reports
        .iter()
        .filter(|r| !r.solution_set_matches)
        .map(|r| format!("proposition {} {}", r.id, r.pair))
        .collect();
    let config = ConfigEcho {
        subcommand: "verify-paper".into(),
        max_x: Some(bounds.max_x),
        max_y: Some(bounds.max_y),
        max_bits: Some(bounds.max_bits),
        imag_xmax: Some(vc.imag_xmax),
        ..Default::default()
    };
    let payload = Payload::Propositions(VerifyPayload {
        all_solution_sets_match: mismatched.is_empty(),
        errata_found: !errata.is_empty(),
        reports,
        errata,
    });
    let env = ReportEnvelope::new(timestamp.into(), config, payload);
    let stdout = emit(env.to_json(), a.out.as_deref())?;
    if mismatched.is_empty() {
        return Ok(RunOutput::ok(stdout));
    }
    Ok(RunOutput {
        code: 1,
        stdout,
        error: Some(ErrorObject {
            error: ErrorBody {
                kind: "mismatch".into(),
                message: format!(
                    "solution set differs from the stated one: {}",
                    mismatched.join(", ")
                ),
            },
        }),
    })
}
