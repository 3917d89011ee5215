//! CLI acceptance: report determinism (criterion 8 of the README checklist)
//! and the exit-code contract.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qinsdel"))
}

fn bundled_code_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/four_qubit_deletion.code")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(output: &Output) -> &[u8] {
    &output.stdout
}

#[test]
fn criterion_8_machine_reports_are_byte_identical() {
    let code = bundled_code_path();
    let code = code.to_str().unwrap();

    // Identical seeds, different worker counts: selftest.
    let a = run(&[
        "selftest", "--seed", "42", "--format", "machine", "--workers", "1",
    ]);
    let b = run(&[
        "selftest", "--seed", "42", "--format", "machine", "--workers", "4",
    ]);
    assert!(a.status.success());
    assert!(b.status.success());
    assert_eq!(
        stdout_of(&a),
        stdout_of(&b),
        "selftest reports differ across worker counts"
    );

    // And again for sweep.
    let c = run(&[
        "sweep", "--code", code, "1", "--seed", "42", "--format", "machine", "--workers", "1",
    ]);
    let d = run(&[
        "sweep", "--code", code, "1", "--seed", "42", "--format", "machine", "--workers", "3",
    ]);
    assert!(c.status.success());
    assert!(d.status.success());
    assert_eq!(
        stdout_of(&c),
        stdout_of(&d),
        "sweep reports differ across worker counts"
    );

    // A second identical invocation reproduces the bytes exactly.
    let e = run(&[
        "sweep", "--code", code, "1", "--seed", "42", "--format", "machine", "--workers", "1",
    ]);
    assert_eq!(stdout_of(&c), stdout_of(&e));

    println!("[PASS] criterion 8: selftest and sweep machine reports byte-identical across runs and worker counts");
}

#[test]
fn machine_reports_embed_schema_and_config() {
    let code = bundled_code_path();
    let out = run(&[
        "check",
        "--code",
        code.to_str().unwrap(),
        "0",
        "1",
        "--format",
        "machine",
        "--seed",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).expect("valid JSON");
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["command"], "check");
    assert_eq!(doc["config"]["seed"], 5);
    assert_eq!(doc["config"]["tolerance"], 1e-10);
    assert_eq!(doc["config"]["enumeration_cap"], 100_000);
    assert_eq!(doc["code"]["label"], "four-qubit-single-deletion");
    assert_eq!(doc["checks"][0]["t1"], 0);
    assert_eq!(doc["checks"][0]["t2"], 1);
    assert_eq!(doc["checks"][0]["family_size"], 8);
    assert_eq!(doc["checks"][0]["passed"], true);
    assert_eq!(doc["passed"], true);
}

#[test]
fn exit_codes_follow_the_contract() {
    let code = bundled_code_path();
    let code = code.to_str().unwrap();

    // 0: passing check.
    assert_eq!(run(&["check", "--code", code, "0", "1"]).status.code(), Some(0));
    assert_eq!(run(&["check", "--code", code, "1", "0"]).status.code(), Some(0));

    // 1: failing check (two deletions exceed this code's capability).
    assert_eq!(run(&["check", "--code", code, "0", "2"]).status.code(), Some(1));

    // 2: usage errors.
    assert_eq!(run(&["check", "--code", code, "0", "4"]).status.code(), Some(2));
    assert_eq!(
        run(&["check", "--code", "/nonexistent/file.code", "0", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["check", "--bogus-flag"]).status.code(), Some(2));
    // Cap too small to enumerate the family.
    assert_eq!(
        run(&["check", "--code", code, "0", "1", "--cap", "2"]).status.code(),
        Some(2)
    );

    // 0: sweeps that agree, whether passing or failing.
    assert_eq!(run(&["sweep", "--code", code, "1"]).status.code(), Some(0));
    assert_eq!(run(&["sweep", "--code", code, "2"]).status.code(), Some(0));

    // 0/1: recovery built and verified, or rejected on a failing check.
    assert_eq!(
        run(&["recover", "--code", code, "0", "1"]).status.code(),
        Some(0)
    );
    assert_eq!(
        run(&["recover", "--code", code, "0", "0"]).status.code(),
        Some(0)
    );
    assert_eq!(
        run(&["recover", "--code", code, "1", "1"]).status.code(),
        Some(1)
    );

    // 0: describe.
    assert_eq!(run(&["describe", "--code", code]).status.code(), Some(0));

    println!("[PASS] exit-code contract: 0 pass / 1 fail / 2 usage");
}

#[test]
fn invalid_code_files_are_rejected_with_diagnostics() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "label broken").unwrap();
    writeln!(file, "q 2").unwrap();
    writeln!(file, "N 1").unwrap();
    writeln!(file, "d 2").unwrap();
    writeln!(file, "codeword").unwrap();
    writeln!(file, "0 1 0").unwrap();
    writeln!(file, "codeword").unwrap();
    writeln!(file, "0 0.6 0").unwrap();
    writeln!(file, "1 0.8 0").unwrap();
    file.flush().unwrap();

    let out = run(&["check", "--code", file.path().to_str().unwrap(), "0", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("overlap"), "stderr: {stderr}");
}

#[test]
fn random_subspace_sweep_fails_with_agreement() {
    // A generic 2-dim subspace of four qubits corrects nothing; both splits
    // of a one-error budget must fail and agree (exit 0 = agreement). The
    // codewords have disjoint support, hence orthogonal, with unit norms.
    let text = "\
label generic-subspace
q 2
N 4
d 2
codeword
0000 0.5889149422867065 0
0111 0.47113195382936524 0.3533489653720239
1011 0.39260996152447103 -0.19630498076223551
1101 0.2748269730671297 0.09815249038111776
1110 0.09815249038111776 0.13741348653356486
codeword
0001 0.7187791123828288 0
1000 0.39932172910157154 0.29949129682617864
0010 0.29949129682617864 -0.09983043227539289
0100 0.24957608068848222 0.19966086455078577
1111 0.14974564841308932 0.09983043227539289
";
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(text.as_bytes()).unwrap();
    file.flush().unwrap();
    let out = run(&["sweep", "--code", file.path().to_str().unwrap(), "1"]);
    assert_eq!(out.status.code(), Some(0), "agreement expected");
    let text_out = String::from_utf8_lossy(&out.stdout);
    assert!(text_out.contains("AGREEMENT"), "{text_out}");
    assert!(text_out.contains("fail"), "{text_out}");
    assert!(!text_out.contains(" pass"), "{text_out}");
}
