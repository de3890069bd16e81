use std::process::{Command, Output};

fn etacong(store: &std::path::Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_etacong"))
        .args(args)
        .env("ETACONG_STORE", store)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn params_examples() {
    let dir = tempfile::tempdir().unwrap();
    let o = etacong(
        dir.path(),
        &[
            "params", "-p", "5", "-l", "13", "-j", "1", "--format", "json",
        ],
    );
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(
        (v["params"]["y"].as_i64(), v["params"]["k"].as_i64()),
        (Some(3), Some(8))
    );
    assert_eq!(v["table_matches"], true);

    let o = etacong(
        dir.path(),
        &[
            "params", "-p", "3", "-l", "7", "-j", "2", "--format", "json",
        ],
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(
        (v["params"]["k"].as_i64(), v["params"]["s"].as_i64()),
        (Some(36), Some(41))
    );

    let o = etacong(dir.path(), &["params", "-p", "5", "-l", "5", "-j", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn pfn_exact_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = etacong(dir.path(), &["pfn", "-p", "2", "-n", "4"]);
    assert_eq!(stdout(&o).trim(), "9");
    let o = etacong(dir.path(), &["pfn", "-p", "2", "-n", "2000"]);
    assert!(o.status.success());
    assert!(stdout(&o).trim().len() > 39, "value exceeds u128");
}

#[test]
fn certify_writes_then_reuses() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "certify", "-p", "5", "-l", "13", "-j", "1", "-m", "7", "--format", "json",
    ];
    let first = etacong(dir.path(), &args);
    assert!(first.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&first)).unwrap();
    assert_eq!(v["cached"], false);
    assert_eq!(v["certificate"]["order_pgl_J"], 1190);
    assert_eq!(v["certificate"]["order_gl_N"], 3570);
    assert!(dir.path().join("cert_p5_l13_j1_m7.json").exists());

    let second = etacong(dir.path(), &args);
    let w: serde_json::Value = serde_json::from_str(&stdout(&second)).unwrap();
    assert_eq!(w["cached"], true);
    assert_eq!(w["certificate"], v["certificate"]);
}

#[test]
fn recomputation_is_deterministic_apart_from_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "certify", "-p", "2", "-l", "7", "-j", "1", "-m", "11", "--force", "--format", "json",
    ];
    let strip = |o: &Output| {
        let mut v: serde_json::Value = serde_json::from_str(&stdout(o)).unwrap();
        v["certificate"]
            .as_object_mut()
            .unwrap()
            .remove("created_at");
        v
    };
    assert_eq!(
        strip(&etacong(dir.path(), &args)),
        strip(&etacong(dir.path(), &args))
    );
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // m equal to l is rejected as invalid input.
    let o = etacong(
        dir.path(),
        &["certify", "-p", "5", "-l", "13", "-j", "1", "-m", "13"],
    );
    assert_eq!(o.status.code(), Some(2));
    // The order search cannot finish within one power.
    let o = etacong(
        dir.path(),
        &[
            "certify",
            "-p",
            "5",
            "-l",
            "13",
            "-j",
            "1",
            "-m",
            "7",
            "--order-cap",
            "1",
        ],
    );
    assert_eq!(o.status.code(), Some(5));
    // Unsupported prime for the basis construction.
    let o = etacong(
        dir.path(),
        &["certify", "-p", "7", "-l", "13", "-j", "1", "-m", "11"],
    );
    assert_eq!(o.status.code(), Some(2));
    let o = etacong(dir.path(), &["verify-paper", "--n-terms", "20"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn scan_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = etacong(
        dir.path(),
        &[
            "scan", "-p", "5", "-j", "1", "--ell", "7,11,13", "--m", "7,11,13", "--format", "json",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["results"].as_array().unwrap().len(), 6);
    let files = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(files, 6);
}

#[test]
fn verify_paper_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = etacong(dir.path(), &["verify-paper"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("overall: PASS"));
}
