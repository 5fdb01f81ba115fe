//! Acceptance checks, one PASS/FAIL line per criterion. Exits nonzero if
//! any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use primesquare::arith::{is_perfect_square, isqrt};
use primesquare::certificate::{
    build_certificate, check_soundness, prove_trivial_descent, CertConfig, DescentStep,
};
use primesquare::primes::consecutive_pairs;
use primesquare::proofcheck::check_errata;
use primesquare::proofcheck::Counterexample;
use primesquare::quadring::{f_series, first_monotonicity_violation, SeriesVariant};
use primesquare::search::{solve_pair, Bounds, SolutionSet, Verdict};
use primesquare::{BigInt, BigUint, PrimePair, QuadInt};
use primesquare_cli::report::{Payload, ReportEnvelope};
use primesquare_cli::run_at;
use primesquare_cli::scan::{self, ScanJob, ScanOutcome};

const TS: &str = "2000-01-01T00:00:00Z";

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, format!("took {took:?}, limit {limit:?}"))
}

fn solve_cli(p: &str, q: &str) -> Result<BTreeSet<(u32, u32, String)>, String> {
    let out = run_at(
        [
            "solve", "--p", p, "--q", q, "--max-x", "64", "--max-y", "64",
        ],
        TS,
    );
    ensure(out.code == 0, format!("solve {p} {q} exited {}", out.code))?;
    let env = ReportEnvelope::from_json(&out.stdout).map_err(|e| e.to_string())?;
    match env.payload {
        Payload::SolutionSet(s) => Ok(s
            .solutions
            .iter()
            .map(|s| (s.x, s.y, s.n.to_string()))
            .collect()),
        _ => Err("wrong payload".into()),
    }
}

fn set(items: &[(u32, u32, u32)]) -> BTreeSet<(u32, u32, String)> {
    items
        .iter()
        .map(|&(x, y, n)| (x, y, n.to_string()))
        .collect()
}

fn c1_proposition_replay() -> Outcome {
    let t = Instant::now();
    let mut failures = Vec::new();
    let cases = [
        (
            "3",
            "2",
            set(&[(0, 0, 0), (1, 1, 1), (2, 3, 1), (3, 1, 5), (4, 5, 7)]),
        ),
        ("5", "3", set(&[(0, 0, 0), (1, 0, 2)])),
        ("7", "5", set(&[(0, 0, 0)])),
    ];
    for (p, q, want) in cases {
        let got = solve_cli(p, q)?;
        if got != want {
            failures.push(format!("({p},{q}) got {got:?}, expected {want:?}"));
        }
    }
    within(t, Duration::from_secs(5))?;
    ensure(failures.is_empty(), failures.join("; "))?;
    Ok("all three solution sets exact".into())
}

fn c2_ring_identities() -> Outcome {
    let a = QuadInt::from_i64(1, -1, -2).unwrap();
    let b = QuadInt::from_i64(2, -1, -1).unwrap();
    ensure(a.norm() == BigInt::from(3), "N(1-√-2) != 3")?;
    ensure(b.norm() == BigInt::from(5), "N(2-i) != 5")?;
    let fa: Vec<BigInt> = [1, 3, 5]
        .iter()
        .map(|&x| f_series(x, SeriesVariant::A).unwrap())
        .collect();
    ensure(
        fa == [-1, -1, 11].map(BigInt::from),
        format!("f_A(1,3,5) = {fa:?}"),
    )?;
    let fb3 = f_series(3, SeriesVariant::B).unwrap();
    ensure(fb3 == BigInt::from(-11), format!("f_B(3) = {fb3}"))?;
    Ok("norms 3, 5; f_A = -1, -1, 11; f_B(3) = -11".into())
}

fn c3_imaginary_equation() -> Outcome {
    let t = Instant::now();
    let target = BigInt::from(-1);
    let cases = [
        (QuadInt::from_i64(1, -1, -2).unwrap(), vec![1u64, 3]),
        (QuadInt::from_i64(2, -1, -1).unwrap(), vec![1]),
        (QuadInt::from_i64(1, 1, -2).unwrap(), vec![]),
    ];
    for (u, want) in cases {
        let got: Vec<u64> = u.solve_imag_equals(&target, 10_000).into_iter().collect();
        ensure(got == want, format!("{u}: got {got:?}, expected {want:?}"))?;
    }
    within(t, Duration::from_secs(10))?;
    Ok(format!("{{1,3}}, {{1}}, {{}} in {:?}", t.elapsed()))
}

fn c4_errata() -> Outcome {
    // A is claimed nondecreasing, B nonincreasing.
    let (xa, _, fa7) =
        first_monotonicity_violation(SeriesVariant::A, true, 51).ok_or("no violation for A")?;
    ensure(
        xa == 5 && fa7 == BigInt::from(-13),
        format!("A: x = {xa}, f(7) = {fa7}"),
    )?;
    let (xb, _, fb7) =
        first_monotonicity_violation(SeriesVariant::B, false, 51).ok_or("no violation for B")?;
    ensure(
        xb == 5 && fb7 == BigInt::from(29),
        format!("B: x = {xb}, f(7) = {fb7}"),
    )?;

    let cert = build_certificate(&PrimePair::new(5, 3).unwrap(), 9, u64::MAX)
        .map_err(|e| e.to_string())?;
    let classes = cert.allowed_x_classes();
    ensure(
        cert.x_period == 6 && classes == BTreeSet::from([0, 2, 4]),
        format!("mod 9 x classes {classes:?} mod {}", cert.x_period),
    )?;

    let errata = check_errata(51);
    let recorded = |x: u64, next: i64| {
        errata.iter().any(|e| {
            matches!(&e.counterexample, Counterexample::Monotonicity { x: ex, f_next, .. }
                if *ex == x && *f_next == BigInt::from(next))
        })
    };
    let all_recorded = recorded(5, -13)
        && recorded(5, 29)
        && errata.iter().any(|e| {
            matches!(&e.counterexample, Counterexample::ClassSet { modulus: 9, computed, .. }
            if *computed == vec![0, 2, 4])
        });
    ensure(
        errata.len() >= 3 && all_recorded,
        format!("{} errata recorded", errata.len()),
    )?;

    let out = run_at(["verify-paper"], TS);
    let env = ReportEnvelope::from_json(&out.stdout).map_err(|e| e.to_string())?;
    let Payload::Propositions(v) = env.payload else {
        return Err("wrong payload".into());
    };
    ensure(
        v.errata.len() >= 3 && v.errata_found,
        "errata missing from verify-paper report",
    )?;
    let passes = v.reports.iter().filter(|r| r.passed).count();
    ensure(
        out.code == 0,
        format!(
            "errata values exact, but verify-paper exited {} with {passes}/3 proposition passes: {}",
            out.code,
            out.error.map(|e| e.error.message).unwrap_or_default()
        ),
    )?;
    Ok("errata exact; verify-paper exit 0".into())
}

fn c5_descent() -> Outcome {
    let cfg = CertConfig::default();
    let proof = prove_trivial_descent(&PrimePair::new(7, 5).unwrap(), &cfg)
        .map_err(|e| format!("(7,5): {e}"))?;
    proof.replay().map_err(|e| format!("(7,5) replay: {e:?}"))?;
    let residues: BTreeSet<u64> = proof.cycle.residues.iter().copied().collect();
    ensure(
        proof.cycle.modulus == 25 && residues == BTreeSet::from([14, 23, 11, 2]),
        format!("mod {} residues {residues:?}", proof.cycle.modulus),
    )?;
    match prove_trivial_descent(&PrimePair::new(11, 7).unwrap(), &cfg) {
        Err(e) if e.step == DescentStep::Precondition => {}
        other => return Err(format!("(11,7): {other:?}")),
    }
    Ok("(7,5) proved with {14,23,11,2}; (11,7) inconclusive at precondition".into())
}

fn c6_certificate_soundness() -> Outcome {
    let pairs = consecutive_pairs(200);
    let bounds = Bounds::new(20, 20);
    let sols: BTreeMap<PrimePair, SolutionSet> =
        pairs.iter().map(|p| (*p, solve_pair(p, &bounds))).collect();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let samples = 2000;
    let mut violations = 0;
    for _ in 0..samples {
        let pair = pairs[rng.gen_range(0..pairs.len())];
        let m = rng.gen_range(2..=500u64);
        let cert = build_certificate(&pair, m, u64::MAX).map_err(|e| e.to_string())?;
        if check_soundness(&cert, &sols[&pair]) != Ok(true) {
            violations += 1;
        }
    }
    ensure(violations == 0, format!("{violations} violations"))?;
    Ok(format!("{samples} samples, 0 violations"))
}

/// Repeated multiplication and a bisection root; shares no code with the solver.
fn naive(p: u64, q: u64, max_x: u32, max_y: u32) -> Vec<(u32, u32, BigUint)> {
    let mut out = Vec::new();
    let mut px = BigUint::from(1u8);
    for x in 0..=max_x {
        let mut qy = BigUint::from(1u8);
        for y in 0..=max_y {
            if qy <= px {
                let d = &px - &qy;
                let (mut lo, mut hi) = (BigUint::from(0u8), &d + 1u8);
                while &hi - &lo > BigUint::from(1u8) {
                    let mid: BigUint = (&lo + &hi) >> 1;
                    if &mid * &mid <= d {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                if &lo * &lo == d {
                    out.push((x, y, lo));
                }
            }
            qy *= q;
        }
        px *= p;
    }
    out
}

fn c7_oracle_equivalence() -> Outcome {
    let t = Instant::now();
    let pairs = consecutive_pairs(50);
    for pair in &pairs {
        let got: Vec<(u32, u32, BigUint)> = solve_pair(pair, &Bounds::new(12, 12))
            .solutions
            .into_iter()
            .map(|s| (s.x, s.y, s.n))
            .collect();
        let want = naive(pair.p(), pair.q(), 12, 12);
        ensure(got == want, format!("{pair}: {got:?} vs {want:?}"))?;
    }
    within(t, Duration::from_secs(30))?;
    Ok(format!("{} pairs agree", pairs.len()))
}

fn c8_scan() -> Outcome {
    let t = Instant::now();
    let argv = |w: &'static str| {
        [
            "scan",
            "--limit",
            "1000",
            "--max-x",
            "30",
            "--max-y",
            "30",
            "--workers",
            w,
        ]
    };
    let baseline = run_at(argv("1"), TS);
    ensure(baseline.code == 0, "scan failed")?;
    for w in ["2", "4", "8"] {
        ensure(
            run_at(argv(w), TS).stdout == baseline.stdout,
            format!("workers {w} differ"),
        )?;
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let ckpt = dir.path().join("scan.ckpt");
    let job = ScanJob {
        limit: 1000,
        bounds: Bounds::new(30, 30),
        cert: CertConfig::default(),
    };
    match scan::execute(&job, 3, Some(&ckpt), 40, Some(2)).map_err(|e| e.to_string())? {
        ScanOutcome::Interrupted { .. } => {}
        ScanOutcome::Complete(_) => return Err("interruption not simulated".into()),
    }
    let mut resumed_args = argv("4").to_vec();
    let path = ckpt.to_str().unwrap();
    resumed_args.extend(["--resume", path]);
    let resumed = run_at(resumed_args, TS);
    ensure(resumed.stdout == baseline.stdout, "resumed report differs")?;

    let env = ReportEnvelope::from_json(&baseline.stdout).map_err(|e| e.to_string())?;
    let Payload::Scan(report) = env.payload else {
        return Err("wrong payload".into());
    };
    ensure(report.revalidate(), "records do not re-validate")?;
    for (p, q) in [(3, 2), (5, 3), (11, 7), (17, 13)] {
        let r = report
            .record_for(p, q)
            .ok_or(format!("({p},{q}) missing"))?;
        ensure(
            matches!(r.verdict, Verdict::Nontrivial { .. }),
            format!("({p},{q}) is {}", r.verdict.label()),
        )?;
    }
    let r = report.record_for(7, 5).ok_or("(7,5) missing")?;
    ensure(
        matches!(r.verdict, Verdict::ProvedTrivial { .. }),
        format!("(7,5) is {}", r.verdict.label()),
    )?;
    let units: Vec<(u64, u64)> = report
        .unit_witness_pairs
        .iter()
        .filter(|p| p.p() <= 100)
        .map(|p| (p.p(), p.q()))
        .collect();
    ensure(
        units == [(5, 3), (17, 13), (37, 31)],
        format!("(1,0) witnesses {units:?}"),
    )?;
    within(t, Duration::from_secs(120))?;
    Ok(format!(
        "identical across workers 1/2/4/8 and resume, {:?}",
        t.elapsed()
    ))
}

fn c9_arithmetic() -> Outcome {
    let mut rng = StdRng::seed_from_u64(9);
    for i in 0..10_000 {
        let bytes: Vec<u8> = (0..64).map(|_| rng.gen()).collect();
        let n = BigUint::from_bytes_le(&bytes);
        let r = isqrt(&n);
        let r1 = &r + 1u8;
        ensure(&r * &r <= n && &r1 * &r1 > n, format!("isqrt bracket #{i}"))?;
        let sq = &r * &r;
        ensure(
            is_perfect_square(&sq) == Some(r.clone()),
            format!("square #{i}"),
        )?;
    }
    for i in 0..1000 {
        let d = if i % 2 == 0 { -1 } else { -2 };
        let mut g = || rng.gen_range(-1_000_000i64..=1_000_000);
        let u = QuadInt::from_i64(g(), g(), d).unwrap();
        let v = QuadInt::from_i64(g(), g(), d).unwrap();
        ensure(
            u.try_mul(&v).unwrap().norm() == u.norm() * v.norm(),
            format!("norm #{i}"),
        )?;
    }
    let a = QuadInt::from_i64(1, -1, -2).unwrap();
    let b = QuadInt::from_i64(2, -1, -1).unwrap();
    for x in (1..=201).step_by(2) {
        ensure(
            f_series(x, SeriesVariant::A).unwrap() == a.imag_coeff(x),
            format!("A at {x}"),
        )?;
        ensure(
            f_series(x, SeriesVariant::B).unwrap() == b.imag_coeff(x),
            format!("B at {x}"),
        )?;
    }
    Ok("10^4 isqrt, 10^3 norms, odd x <= 201".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("proposition replay", c1_proposition_replay),
        ("ring identities", c2_ring_identities),
        ("imaginary-part equation", c3_imaginary_equation),
        ("errata detection", c4_errata),
        ("descent prover", c5_descent),
        ("certificate soundness", c6_certificate_soundness),
        ("oracle equivalence", c7_oracle_equivalence),
        ("scan determinism and evidence", c8_scan),
        ("arithmetic invariants", c9_arithmetic),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
