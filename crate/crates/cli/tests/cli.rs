use std::collections::BTreeSet;

use primesquare::certificate::CertConfig;
use primesquare::search::Bounds;
use primesquare_cli::report::{scan_verdicts, Payload, ReportEnvelope};
use primesquare_cli::scan::{self, Checkpoint, ScanJob, ScanOutcome};
use primesquare_cli::{run_at, RunOutput};

const TS: &str = "2000-01-01T00:00:00Z";

fn run(args: &[&str]) -> RunOutput {
    run_at(args.iter().copied(), TS)
}

fn parse(out: &RunOutput) -> ReportEnvelope {
    ReportEnvelope::from_json(&out.stdout).expect("valid report")
}

fn exponents(env: &ReportEnvelope) -> BTreeSet<(u32, u32, String)> {
    match &env.payload {
        Payload::SolutionSet(s) => s
            .solutions
            .iter()
            .map(|s| (s.x, s.y, s.n.to_string()))
            .collect(),
        other => panic!("unexpected payload {other:?}"),
    }
}

#[test]
fn solve_seven_five_has_only_trivial_solution() {
    let out = run(&[
        "solve", "--p", "7", "--q", "5", "--max-x", "40", "--max-y", "60", "--format", "json",
    ]);
    assert_eq!(out.code, 0);
    let env = parse(&out);
    assert_eq!(env.schema_version, 1);
    assert_eq!(exponents(&env), BTreeSet::from([(0, 0, "0".to_string())]));
}

#[test]
fn solve_rejects_composite_p() {
    let out = run(&["solve", "--p", "4", "--q", "2"]);
    assert_eq!(out.code, 2);
    let err = out.error.unwrap().error;
    assert_eq!(err.kind, "usage");
    assert_eq!(err.message, "p is not prime");
}

#[test]
fn solve_rejects_non_consecutive_pair() {
    let out = run(&["solve", "--p", "11", "--q", "5"]);
    assert_eq!(out.code, 2);
}

#[test]
fn unknown_flag_and_out_of_cap_values_are_usage_errors() {
    assert_eq!(
        run(&["solve", "--p", "3", "--q", "2", "--frobnicate"]).code,
        2
    );
    assert_eq!(
        run(&["solve", "--p", "3", "--q", "2", "--max-x", "5000"]).code,
        2
    );
    assert_eq!(run(&["scan", "--limit", "100", "--workers", "0"]).code, 2);
    assert_eq!(run(&["scan", "--limit", "100", "--m-max", "1"]).code, 2);
    assert_eq!(
        run(&["ring", "--d", "-5", "--base", "1,1", "--pow", "2"]).code,
        2
    );
    assert_eq!(
        run(&["ring", "--d", "-1", "--base", "1;1", "--pow", "2"]).code,
        2
    );
    assert_eq!(run(&["certify", "--p", "3", "--q", "2"]).code, 2);
    assert_eq!(run(&["frobnicate"]).code, 2);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let out = run(&[
        "solve",
        "--p",
        "3",
        "--q",
        "2",
        "--out",
        "/nonexistent-dir/x.json",
    ]);
    assert_eq!(out.code, 1);
    assert_eq!(out.error.unwrap().error.kind, "io");
}

#[test]
fn json_reports_round_trip() {
    let commands: &[&[&str]] = &[
        &["solve", "--p", "3", "--q", "2"],
        &["scan", "--limit", "60", "--max-x", "12", "--max-y", "12"],
        &["certify", "--p", "5", "--q", "3", "--modulus", "9"],
        &["certify", "--p", "13", "--q", "11", "--search-max-m", "20"],
        &["descent", "--p", "7", "--q", "5"],
        &["descent", "--p", "11", "--q", "7"],
        &["ring", "--d", "-2", "--base", "1,-1", "--pow", "7"],
        &[
            "ring",
            "--d",
            "-1",
            "--base",
            "2,-1",
            "--solve-imag",
            "-1",
            "--xmax",
            "500",
        ],
        &["verify-paper", "--max-x", "30", "--max-y", "30"],
    ];
    for argv in commands {
        let out = run(argv);
        assert!(
            out.code == 0 || argv[0] == "verify-paper",
            "{argv:?}: {:?}",
            out.error
        );
        let env = parse(&out);
        assert_eq!(env.to_json(), out.stdout, "{argv:?}");
    }
}

#[test]
fn ring_power_matches_known_values() {
    let env = parse(&run(&["ring", "--d", "-1", "--base", "2,-1", "--pow", "3"]));
    let Payload::Ring(r) = env.payload else {
        panic!()
    };
    let p = r.power.unwrap();
    assert_eq!((p.value.a.as_str(), p.value.b.as_str()), ("2", "-11"));
    assert_eq!(p.norm, "125");
    assert_eq!(r.base_norm, "5");
}

#[test]
fn descent_reports_inconclusive_precondition() {
    let env = parse(&run(&["descent", "--p", "11", "--q", "7"]));
    let Payload::Descent(d) = env.payload else {
        panic!()
    };
    assert!(!d.proved);
    assert_eq!(
        d.inconclusive.unwrap().step,
        primesquare::certificate::DescentStep::Precondition
    );
}

#[test]
fn verify_paper_flags_mismatch_and_errata() {
    let out = run(&["verify-paper"]);
    assert_eq!(out.code, 1);
    assert_eq!(out.error.as_ref().unwrap().error.kind, "mismatch");
    let Payload::Propositions(v) = parse(&out).payload else {
        panic!()
    };
    assert!(v.errata_found);
    assert!(v.errata.len() >= 3);
    let passed: Vec<bool> = v.reports.iter().map(|r| r.passed).collect();
    assert_eq!(passed, vec![true, false, true]);
}

#[test]
fn csv_and_json_scans_agree_on_verdicts() {
    let base = [
        "scan",
        "--limit",
        "200",
        "--max-x",
        "16",
        "--max-y",
        "16",
        "--workers",
        "2",
    ];
    let json = parse(&run(&base));
    let Payload::Scan(report) = json.payload else {
        panic!()
    };
    let mut csv_args = base.to_vec();
    csv_args.extend(["--format", "csv"]);
    let csv = run(&csv_args).stdout;
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    let from_csv: Vec<(u64, u64, String)> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (
                r[0].parse().unwrap(),
                r[1].parse().unwrap(),
                r[2].to_string(),
            )
        })
        .collect();
    let from_json: Vec<(u64, u64, String)> = scan_verdicts(&report)
        .into_iter()
        .map(|(p, q, v)| (p, q, v.to_string()))
        .collect();
    assert_eq!(from_csv, from_json);
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("verify-paper"));
}

#[test]
fn scan_renders_text() {
    let out = run(&["scan", "--limit", "10", "--format", "text"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("proved trivial"));
}

fn job(limit: u64) -> ScanJob {
    ScanJob {
        limit,
        bounds: Bounds::new(20, 20),
        cert: CertConfig::default(),
    }
}

#[test]
fn resume_after_interruption_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("scan.ckpt");
    let argv = [
        "scan",
        "--limit",
        "400",
        "--max-x",
        "20",
        "--max-y",
        "20",
        "--workers",
        "3",
    ];
    let uninterrupted = run(&argv);
    assert_eq!(uninterrupted.code, 0);

    match scan::execute(&job(400), 2, Some(&ckpt), 10, Some(3)).unwrap() {
        ScanOutcome::Interrupted { completed_pairs } => assert_eq!(completed_pairs, 30),
        ScanOutcome::Complete(_) => panic!("should have stopped early"),
    }
    let cp = Checkpoint::load(&ckpt).unwrap();
    assert_eq!(cp.counts.total(), 30);
    assert_eq!(cp.last_p, cp.records.last().unwrap().pair.p());

    let mut resumed_args = argv.to_vec();
    let path = ckpt.to_str().unwrap();
    resumed_args.extend(["--resume", path]);
    let resumed = run(&resumed_args);
    assert_eq!(resumed.code, 0, "{:?}", resumed.error);
    assert_eq!(resumed.stdout, uninterrupted.stdout);
}

#[test]
fn checkpoint_for_other_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("scan.ckpt");
    scan::execute(&job(100), 1, Some(&ckpt), 5, Some(1)).unwrap();
    let out = run(&["scan", "--limit", "300", "--resume", ckpt.to_str().unwrap()]);
    assert_eq!(out.code, 1);
    assert_eq!(out.error.unwrap().error.kind, "checkpoint");
}

#[test]
fn tampered_checkpoint_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("scan.ckpt");
    scan::execute(&job(100), 1, Some(&ckpt), 5, Some(2)).unwrap();
    let text = std::fs::read_to_string(&ckpt).unwrap();
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value["counts"]["nontrivial"] = serde_json::json!(99);
    std::fs::write(&ckpt, value.to_string()).unwrap();
    assert!(Checkpoint::load(&ckpt).is_err());
}

#[test]
fn scan_with_out_writes_file_and_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let out = run(&["scan", "--limit", "50", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.is_empty());
    let env = ReportEnvelope::from_json(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(env.config.limit, Some(50));
    assert!(dir.path().join("report.json.checkpoint").exists());
}
