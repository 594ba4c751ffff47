use std::path::PathBuf;
use std::process::Command;

use selinf_cli::run_cli;
use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("selinf").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn report_schema() -> jsonschema::Validator {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "schema", "analysis-report.schema.json"].iter().collect();
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

#[test]
fn table2_is_infeasible_with_gamma_four() {
    let (code, out, _) = run(&["analyze", &fixture("table2.json"), "--json"]);
    assert_eq!(code, 1);
    let report: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["chsh"]["gamma"], "4");
    assert_eq!(report["marginal_selectivity"]["satisfied"], true);
    assert_eq!(report["feasibility"]["certificate"]["kind"], "chsh_facet");
}

#[test]
fn uniform_is_feasible_with_witness() {
    let (code, out, _) = run(&["analyze", &fixture("uniform.json"), "--witness", "--json"]);
    assert_eq!(code, 0);
    let report: Value = serde_json::from_str(&out).unwrap();
    assert!(!report["feasibility"]["witness"].as_array().unwrap().is_empty());

    let (code, out, _) = run(&["witness", &fixture("uniform.json")]);
    assert_eq!(code, 0);
    assert!(out.lines().filter(|l| !l.starts_with('#')).count() >= 1);
}

#[test]
fn table3_rejects_marginal_selectivity() {
    let (code, out, _) = run(&["analyze", &fixture("table3.json"), "--sig", "0.05", "--json"]);
    assert_eq!(code, 1);
    let report: Value = serde_json::from_str(&out).unwrap();
    let results = report["statistical_tests"]["results"].as_array().unwrap();
    assert!(results.iter().any(|r| r["z"].as_f64().unwrap().abs() > 1.96 && r["reject"] == true));
}

#[test]
fn exit_code_ignores_statistical_tests() {
    // Counts are attached, but only the exact verdict decides the exit code.
    for sig in ["0.05", "0.000001"] {
        let (code, _, _) = run(&["analyze", &fixture("table3.json"), "--sig", sig]);
        assert_eq!(code, 1);
    }
}

#[test]
fn json_output_matches_schema() {
    let schema = report_schema();
    for name in ["table1.json", "table2.json", "table3.json", "uniform.json"] {
        for extra in [&[][..], &["--witness"][..], &["--bonferroni", "--tolerance", "1/10"][..]] {
            let path = fixture(name);
            let mut args = vec!["analyze", &path, "--json"];
            args.extend_from_slice(extra);
            let (_, out, _) = run(&args);
            let value: Value = serde_json::from_str(&out).unwrap();
            assert!(schema.is_valid(&value), "{name} {extra:?}");
        }
    }
}

#[test]
fn tolerance_changes_ms_verdict_only() {
    let (_, out, _) = run(&["analyze", &fixture("table1.json"), "--tolerance", ".25", "--json"]);
    let report: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["marginal_selectivity"]["satisfied"], true);
    assert_eq!(report["feasibility"]["verdict"], "infeasible");
}

#[test]
fn text_output_names_the_certificate() {
    let (code, out, _) = run(&["analyze", &fixture("table1.json")]);
    assert_eq!(code, 1);
    assert!(out.contains("Gamma = 0.000"));
    assert!(out.contains("certificate: Pr(A=+1) at a"));
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let doc = std::fs::read_to_string(fixture("table3.json")).unwrap().replace("\"renormalize\": true,", "");
    std::fs::write(&bad, doc).unwrap();
    let (code, _, err) = run(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("a',b"), "{err}");
    // The same file passes once renormalization is requested.
    let (code, _, _) = run(&["analyze", bad.to_str().unwrap(), "--renormalize"]);
    assert_eq!(code, 1);

    assert_eq!(run(&["analyze", "/nonexistent/file.json"]).0, 2);
    assert_eq!(run(&["analyze", &fixture("table1.json"), "--sig", "1.5"]).0, 2);
    assert_eq!(run(&["analyze", &fixture("table1.json"), "--tolerance", "-1"]).0, 2);
    assert_eq!(run(&["analyze"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["simulate", "--model", &fixture("models/uniform.json"), "--n", "0"]).0, 2);
    assert_eq!(run(&["simulate", "--model", &fixture("table1.json"), "--n", "10"]).0, 2);
}

#[test]
fn help_and_version_exit_zero() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("analyze"));
    assert_eq!(run(&["--version"]).0, 0);
}

#[test]
fn simulate_round_trips_through_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("sim.json");
    let args = ["simulate", "--model", &fixture("models/contaminated.json"), "--n", "500", "--seed", "11"];
    let mut with_out = args.to_vec();
    let out_str = out_path.to_str().unwrap();
    with_out.extend(["--out", out_str]);
    assert_eq!(run(&with_out).0, 0);
    let (_, stdout, _) = run(&args);
    assert_eq!(std::fs::read_to_string(&out_path).unwrap(), stdout);

    let (code, out, _) = run(&["analyze", out_str, "--json"]);
    assert_eq!(code, 1);
    let report: Value = serde_json::from_str(&out).unwrap();
    assert!(report["statistical_tests"].is_object());
}

#[test]
fn selftest_passes() {
    let (code, out, _) = run(&["selftest"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 3);
}

#[test]
fn format_env_var_sets_default() {
    let bin = env!("CARGO_BIN_EXE_selinf");
    let output = Command::new(bin)
        .args(["analyze", &fixture("table2.json")])
        .env("SELINF_FORMAT", "json")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(report["chsh"]["classification"], "supra_quantum");

    let output = Command::new(bin)
        .args(["--format", "text", "selftest"])
        .env("SELINF_FORMAT", "json")
        .output()
        .unwrap();
    assert!(String::from_utf8(output.stdout).unwrap().starts_with("PASS"));

    let output = Command::new(bin).arg("selftest").env("SELINF_FORMAT", "yaml").output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn stdin_input() {
    use std::io::Write;
    let bin = env!("CARGO_BIN_EXE_selinf");
    let mut child = Command::new(bin)
        .args(["analyze", "-"])
        .env_remove("SELINF_FORMAT")
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    let doc = std::fs::read_to_string(fixture("uniform.json")).unwrap();
    child.stdin.take().unwrap().write_all(doc.as_bytes()).unwrap();
    let output = child.wait_with_output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(String::from_utf8(output.stdout).unwrap().contains("Selective representation: exists"));
}
