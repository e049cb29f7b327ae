//! End-to-end behavior of the installed binary: exit codes, output files,
//! and run-to-run determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn nccw() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nccw"))
}

fn script(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scripts").join(name)
}

fn run_ok(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

#[test]
fn passing_script_exits_zero() {
    let out = run_ok(nccw().arg("run").arg(script("circle.nccw")).args(["--resolution", "2"]));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("0 failed"), "{stdout}");
}

#[test]
fn failing_script_exits_one_with_fail_lines() {
    let out = run_ok(nccw().arg("run").arg(script("controls.nccw")).args(["--resolution", "2"]));
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("FAIL"), "{stdout}");
}

#[test]
fn empty_script_exits_zero_with_empty_report() {
    let out = run_ok(nccw().arg("run").arg(script("empty.nccw")));
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("0 checks"));
}

#[test]
fn missing_files_and_parse_errors_exit_two() {
    let out = run_ok(nccw().arg("run").arg("no-such-file.nccw"));
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().expect("tempdir");
    let bad = dir.path().join("bad.nccw");
    fs::write(&bad, "algebra A = ;\n").unwrap();
    let out = run_ok(nccw().arg("run").arg(&bad));
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 1, col 13"), "{stderr}");
    assert!(stderr.contains("expected"), "{stderr}");
}

#[test]
fn usage_errors_exit_two() {
    let out = run_ok(nccw().arg("frobnicate"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn same_inputs_give_byte_identical_json() {
    let dir = tempfile::tempdir().expect("tempdir");
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = run_ok(
            nccw()
                .arg("run")
                .arg(script("circle.nccw"))
                .args(["--resolution", "2", "--resolution", "4", "--seed", "7"])
                .arg("--json")
                .arg(path),
        );
        assert_eq!(out.status.code(), Some(0));
    }
    let left = fs::read(&a).unwrap();
    let right = fs::read(&b).unwrap();
    assert!(!left.is_empty());
    assert_eq!(left, right);
}

#[test]
fn json_reports_carry_the_schema_version() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("r.json");
    let out = run_ok(
        nccw()
            .arg("run")
            .arg(script("controls.nccw"))
            .args(["--resolution", "2"])
            .arg("--json")
            .arg(&path),
    );
    assert_eq!(out.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["version"], "nccw-report/1");
    let reports = doc["reports"].as_array().unwrap();
    assert!(!reports.is_empty());
    // every failing report ships a witness
    for r in reports {
        if r["status"] == "fail" {
            assert!(r["witness"].is_object(), "{r}");
        }
    }
}

#[test]
fn dot_output_draws_the_eight_term_chain() {
    let dir = tempfile::tempdir().expect("tempdir");
    let src = dir.path().join("chain.nccw");
    fs::write(
        &src,
        "morphism d : M1 -> M2 = blocks(M1 -> M2, [[2]], unital);\npuppe(d, 8);\n",
    )
    .unwrap();
    let path = dir.path().join("chain.dot");
    let out = run_ok(
        nccw().arg("run").arg(&src).args(["--resolution", "4"]).arg("--dot").arg(&path),
    );
    assert_eq!(out.status.code(), Some(0));
    let dot = fs::read_to_string(&path).unwrap();
    let nodes = dot.lines().filter(|l| l.contains("[label=") && !l.contains("->")).count();
    let edges = dot.lines().filter(|l| l.contains("->")).count();
    assert_eq!(nodes, 8, "{dot}");
    assert_eq!(edges, 7, "{dot}");
    assert!(dot.lines().filter(|l| l.contains("->")).all(|l| l.contains("label=")));
}

#[test]
fn emit_statements_print_to_stdout_without_flags() {
    let dir = tempfile::tempdir().expect("tempdir");
    let src = dir.path().join("emit.nccw");
    fs::write(&src, "discretize M2;\nemit json;\n").unwrap();
    let out = run_ok(nccw().arg("run").arg(&src).args(["--resolution", "2"]));
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("\"version\": \"nccw-report/1\""), "{stdout}");
}
