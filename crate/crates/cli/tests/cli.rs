//! End-to-end tests of the command-line interface: subcommand output,
//! exit codes, fault injection, and byte-level determinism.

use std::process::{Command, Output};

fn delpezzo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delpezzo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 output")
}

#[test]
fn enumerate_reports_the_known_counts() {
    let out = delpezzo(&["enumerate", "--r", "6"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("27 lines"), "{text}");
    assert!(text.contains("27 conic classes"), "{text}");
    assert!(text.contains("5 reducible fibers"), "{text}");
}

#[test]
fn census_json_matches_the_reference_total() {
    let out = delpezzo(&["census", "--r", "8", "--what", "conics", "--check-reference", "--format", "json"]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["total"], 2160);
    assert_eq!(value["types"][0]["symbol"], "1;1");
    assert_eq!(value["types"][0]["count"], 8);
    let n_types = value["types"].as_array().unwrap().len();
    assert_eq!(n_types, 15);
}

#[test]
fn census_csv_has_one_row_per_type() {
    let out = delpezzo(&["census", "--r", "4", "--what", "lines", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "symbol,count");
    // X_4 lines: 4 exceptional classes and 6 pencil lines through point pairs.
    assert!(rows.contains(&"0;-1,4"), "{text}");
    assert!(rows.contains(&"1;1^2,6"), "{text}");
}

#[test]
fn verify_hlog_passes_and_detects_injected_faults() {
    let out = delpezzo(&["verify-hlog", "--r", "4", "--format", "json"]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["relation_space_dim"], 1);
    assert_eq!(value["verified"], true);

    let out = delpezzo(&["verify-hlog", "--r", "4", "--inject-tau-flip", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("verification failed"), "{err}");
}

#[test]
fn verify_identity_passes_within_tolerance() {
    let out = delpezzo(&[
        "verify-identity", "--r", "4", "--seed", "3", "--points", "3", "--format", "json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["model_count"], 5);
    assert_eq!(value["verified"], true);
    let residual = value["max_residual"].as_f64().unwrap();
    assert!(residual < 1e-9, "max residual {residual}");
}

#[test]
fn verify_identity_detects_a_flipped_sign() {
    let out = delpezzo(&[
        "verify-identity", "--r", "4", "--seed", "3", "--points", "1", "--inject-sign-flip", "0",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn identical_seeds_give_byte_identical_json() {
    let args = [
        "verify-identity", "--r", "5", "--seed", "11", "--points", "2", "--format", "json",
    ];
    let first = delpezzo(&args);
    let second = delpezzo(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn usage_errors_exit_with_code_two() {
    // r out of range for the numeric identity.
    let out = delpezzo(&["verify-identity", "--r", "7"]);
    assert_eq!(out.status.code(), Some(2));
    // X_5 parameters passed to another surface.
    let out = delpezzo(&["verify-identity", "--r", "4", "--a", "3"]);
    assert_eq!(out.status.code(), Some(2));
    // Malformed rational.
    let out = delpezzo(&["verify-identity", "--r", "5", "--a", "x/y"]);
    assert_eq!(out.status.code(), Some(2));
    // Degenerate X_5 parameters (a = b).
    let out = delpezzo(&["verify-identity", "--r", "5", "--a", "4", "--b", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_flag_writes_the_report_to_a_file() {
    let dir = std::env::temp_dir().join("delpezzo-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("enumerate.csv");
    let out = delpezzo(&[
        "enumerate", "--r", "3", "--format", "csv", "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.contains("3,6,6,3,2"), "{written}");
    std::fs::remove_file(&path).unwrap();
}
