//! End-to-end tests of the `liouville` binary: exit codes (0 success,
//! 1 failed verification with the artifact still written, 2 usage errors),
//! artifact shapes, the verify round trip, and the output-directory
//! environment variable.

use std::path::Path;
use std::process::Output;

fn run(dir: &Path, args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_liouville"))
        .args(args)
        .current_dir(dir)
        .env_remove("LIOUVILLE_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn build_then_verify_round_trip() {
    let dir = tempfile::tempdir().expect("tempdir");
    let built = run(
        dir.path(),
        &[
            "build-cofolner",
            "--support",
            "0,1",
            "--n",
            "1",
            "--N",
            "100",
            "--epsilon",
            "1/10",
        ],
    );
    assert_eq!(code(&built), 0, "{}", stderr(&built));
    let cert = dir.path().join("certificate.json");
    assert!(
        cert.exists(),
        "artifact is written under the working directory by default"
    );

    let verified = run(
        dir.path(),
        &[
            "verify-cofolner",
            "--certificate",
            cert.to_str().expect("utf-8"),
        ],
    );
    assert_eq!(code(&verified), 0, "{}", stderr(&verified));
    let report = std::fs::read_to_string(dir.path().join("verification.json"))
        .expect("verdict artifact is written");
    assert!(report.contains("\"recomputed\":\"1/50\""), "got: {report}");
    assert!(report.contains("\"consistent\":true"));
    assert!(report.contains("\"verified\":true"));
}

#[test]
fn unreachable_target_still_writes_artifact_and_exits_one() {
    let dir = tempfile::tempdir().expect("tempdir");
    let built = run(
        dir.path(),
        &[
            "build-cofolner",
            "--support",
            "0,1",
            "--n",
            "1",
            "--N",
            "10",
            "--epsilon",
            "1/1000000",
        ],
    );
    assert_eq!(
        code(&built),
        1,
        "failed verification is exit 1, not a usage error"
    );
    let raw = std::fs::read_to_string(dir.path().join("certificate.json"))
        .expect("artifact still written");
    assert!(raw.contains("\"verified\":false"));
}

#[test]
fn verify_detects_a_tampered_achieved_ratio() {
    let dir = tempfile::tempdir().expect("tempdir");
    let built = run(
        dir.path(),
        &[
            "build-cofolner",
            "--support",
            "0,1",
            "--n",
            "1",
            "--N",
            "100",
            "--epsilon",
            "1/10",
        ],
    );
    assert_eq!(code(&built), 0, "{}", stderr(&built));
    let cert = dir.path().join("certificate.json");
    let raw = std::fs::read_to_string(&cert).expect("artifact");
    assert!(
        raw.contains("\"achieved\":\"1/50\""),
        "baseline certificate achieves 2/100"
    );
    std::fs::write(
        &cert,
        raw.replace("\"achieved\":\"1/50\"", "\"achieved\":\"0/1\""),
    )
    .expect("tamper");

    let verified = run(
        dir.path(),
        &[
            "verify-cofolner",
            "--certificate",
            cert.to_str().expect("utf-8"),
        ],
    );
    assert_eq!(
        code(&verified),
        1,
        "a stored ratio the data does not reproduce must fail"
    );
    let report = std::fs::read_to_string(dir.path().join("verification.json"))
        .expect("verdict artifact is written even on failure");
    assert!(report.contains("\"consistent\":false"), "got: {report}");
}

#[test]
fn tiny_pair_search_certifies_zero() {
    let dir = tempfile::tempdir().expect("tempdir");
    let searched = run(
        dir.path(),
        &["search", "--objective", "pair3", "--B", "2", "--k", "2"],
    );
    assert_eq!(code(&searched), 0, "{}", stderr(&searched));
    let raw = std::fs::read_to_string(dir.path().join("search.json")).expect("artifact");
    assert!(
        raw.contains("\"best_ratio\":\"0/1\""),
        "no two rows under this bound intersect"
    );
}

#[test]
fn csv_sweep_covers_every_cell() {
    let dir = tempfile::tempdir().expect("tempdir");
    let swept = run(
        dir.path(),
        &[
            "search",
            "--objective",
            "chain(2)",
            "--B",
            "2",
            "--k",
            "2",
            "--format",
            "csv",
        ],
    );
    assert_eq!(code(&swept), 0, "{}", stderr(&swept));
    let raw = std::fs::read_to_string(dir.path().join("search.csv")).expect("artifact");
    let lines: Vec<&str> = raw.lines().collect();
    assert_eq!(lines[0], "B,k,best_ratio");
    assert_eq!(lines.len(), 1 + 4, "one row per (B, k) cell");
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 3));
}

#[test]
fn eval_reports_exact_ratios_for_rows_and_sequences() {
    let dir = tempfile::tempdir().expect("tempdir");
    let rows = run(
        dir.path(),
        &[
            "eval-objective",
            "--objective",
            "pair3",
            "--rows",
            "2,2,9;9,2,2;1,1,2;2,1,1",
        ],
    );
    assert_eq!(code(&rows), 0, "{}", stderr(&rows));
    let raw = std::fs::read_to_string(dir.path().join("eval.json")).expect("artifact");
    assert!(raw.contains("\"ratio\":\"1/4\""), "got: {raw}");

    let seq = run(
        dir.path(),
        &[
            "eval-objective",
            "--objective",
            "sequence",
            "--sequence",
            "2,1,2,1,1,3,2,3",
        ],
    );
    assert_eq!(code(&seq), 0, "{}", stderr(&seq));
    let raw = std::fs::read_to_string(dir.path().join("eval.json")).expect("artifact");
    assert!(raw.contains("\"ratio\":\"1/8\""), "got: {raw}");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cases: &[&[&str]] = &[
        &[
            "search",
            "--objective",
            "pair3",
            "--B",
            "2",
            "--k",
            "2",
            "--bogus",
        ],
        &[
            "build-cofolner",
            "--support",
            "0,1",
            "--n",
            "1",
            "--epsilon",
            "0/1",
        ],
        &[
            "build-cofolner",
            "--support",
            "0,0",
            "--n",
            "1",
            "--epsilon",
            "1/10",
        ],
        &["simulate-walk", "--support", "0", "--format", "csv"],
        &[
            "eval-objective",
            "--objective",
            "pair3",
            "--rows",
            "1,1,1",
            "--sequence",
            "1,2,3",
        ],
        &["verify-cofolner", "--certificate", "no_such_file.json"],
        &["search", "--objective", "pair5", "--B", "2", "--k", "2"],
    ];
    for args in cases {
        let out = run(dir.path(), args);
        assert_eq!(
            code(&out),
            2,
            "args {args:?} must be rejected as usage, got {}",
            code(&out)
        );
    }
}

#[test]
fn env_var_names_the_default_output_directory() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out_dir = dir.path().join("artifacts");
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_liouville"))
        .args(["eval-objective", "--objective", "chain(1)", "--rows", "3"])
        .current_dir(dir.path())
        .env("LIOUVILLE_OUT_DIR", &out_dir)
        .output()
        .expect("binary runs");
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(
        out_dir.join("eval.json").exists(),
        "artifact lands in the configured directory"
    );
    assert!(!dir.path().join("eval.json").exists());
}

#[test]
fn walk_artifact_counts_sum_to_trials() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = run(
        dir.path(),
        &[
            "simulate-walk",
            "--support",
            "0,1",
            "--steps",
            "5",
            "--trials",
            "500",
            "--seed",
            "4",
            "--measure",
            "lazy-fr",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let raw = std::fs::read_to_string(dir.path().join("walk.json")).expect("artifact");
    let value: serde_json::Value = serde_json::from_str(&raw).expect("valid JSON");
    assert_eq!(value["measure"], "lazy-fr");
    assert_eq!(value["trials"], 500);
    let total: u64 = value["counts"]
        .as_object()
        .expect("counts map")
        .values()
        .map(|v| v.as_u64().expect("count"))
        .sum();
    assert_eq!(total, 500);
}
