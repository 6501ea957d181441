//! End-to-end tests of the `dpa` binary: flag plumbing, file outputs,
//! manifests, exit codes, and the config-file/flag precedence rules.

use std::path::Path;
use std::process::{Command, Output};

fn dpa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_json(path: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("reading {}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("parsing {}: {e}", path.display()))
}

const STANDARD: &[&str] = &[
    "--alpha", "0.3", "--beta", "0.4", "--delta-in", "1.0", "--delta-out", "1.0",
];

fn simulate_into(dir: &Path, seed: &str, stream: &str) -> Output {
    let mut args = vec!["simulate"];
    args.extend_from_slice(STANDARD);
    args.extend_from_slice(&[
        "--steps", "20000", "--seed", seed, "--stream", stream, "--out",
    ]);
    let dir_s = dir.to_str().unwrap();
    args.push(dir_s);
    dpa(&args)
}

#[test]
fn simulate_runs_are_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    assert!(simulate_into(&a, "11", "3").status.success());
    assert!(simulate_into(&b, "11", "3").status.success());
    assert!(simulate_into(&c, "11", "4").status.success());

    let degrees = |d: &Path| std::fs::read(d.join("degrees.csv")).unwrap();
    assert_eq!(degrees(&a), degrees(&b), "same seed and stream must replay");
    assert_ne!(degrees(&a), degrees(&c), "a different stream must diverge");
    let hist = |d: &Path| std::fs::read(d.join("hist.palb")).unwrap();
    assert_eq!(hist(&a), hist(&b));
}

#[test]
fn gdpa_manifest_records_every_parameter() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap().to_owned();
    let out = dpa(&[
        "simulate", "--model", "gdpa", "--alpha", "0.3", "--beta", "0.4",
        "--delta-in", "1.0", "--delta-out", "1.0", "--c", "0.2", "--d", "0.1",
        "--rho", "0.5", "--steps", "5000", "--seed", "2", "--out", &dir,
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    let manifest = read_json(&tmp.path().join("manifest.json"));
    assert_eq!(manifest["command"], "simulate");
    let p = &manifest["params"];
    assert_eq!(p["model"], "gdpa");
    for (key, expect) in [
        ("alpha", 0.3), ("beta", 0.4), ("delta_in", 1.0), ("delta_out", 1.0),
        ("c", 0.2), ("d", 0.1), ("rho", 0.5),
    ] {
        assert_eq!(p[key].as_f64(), Some(expect), "params.{key}");
    }
    assert_eq!(manifest["seed"].as_u64(), Some(2));
    assert_eq!(manifest["steps"].as_u64(), Some(5000));
    let outputs = manifest["outputs"].as_array().unwrap();
    assert!(outputs.iter().any(|v| v == "degrees.csv"));
    assert!(outputs.iter().any(|v| v == "hist.palb"));
}

#[test]
fn analytic_grid_writes_pmf_with_leaked_mass() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap().to_owned();
    let mut args = vec!["analytic"];
    args.extend_from_slice(STANDARD);
    args.extend_from_slice(&["--method", "dp", "--max-i", "8", "--max-j", "8", "--out", &dir]);
    let out = dpa(&args);
    assert!(out.status.success(), "{}", stderr(&out));

    let pmf = read_json(&tmp.path().join("pmf.json"));
    assert_eq!(pmf["method"], "dp");
    assert_eq!(pmf["max_in"].as_u64(), Some(8));
    let leaked = pmf["leaked_mass"].as_f64().unwrap();
    assert!(leaked > 0.0 && leaked < 1.0, "leaked_mass = {leaked}");
    assert!(tmp.path().join("pmf.csv").exists());
    assert_eq!(read_json(&tmp.path().join("manifest.json"))["method"], "dp");
}

#[test]
fn closed_form_rejects_the_generalised_model() {
    let out = dpa(&[
        "analytic", "--model", "gdpa", "--alpha", "0.3", "--beta", "0.4",
        "--delta-in", "1.0", "--delta-out", "1.0", "--c", "0.2", "--d", "0.1",
        "--rho", "0.5", "--method", "closed-form",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("closed-form"), "{}", stderr(&out));
}

#[test]
fn quadrature_single_entry_matches_the_known_value() {
    // p(0,1) = 8/37 = 0.216216... at alpha 0.3, beta 0.4, offsets 1.
    let mut args = vec!["analytic"];
    args.extend_from_slice(STANDARD);
    args.extend_from_slice(&["--method", "quadrature", "--i", "0", "--j", "1"]);
    let out = dpa(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("p(0,1) [quadrature] = 0.216216"), "{text}");
    // Without --out the manifest goes to stderr, keeping stdout parseable.
    assert!(stderr(&out).contains("manifest:"), "{}", stderr(&out));
}

#[test]
fn compare_passes_against_matching_theory() {
    let mut args = vec!["compare"];
    args.extend_from_slice(STANDARD);
    args.extend_from_slice(&["--steps", "200000", "--seed", "5", "--tv-tol", "0.05"]);
    let out = dpa(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("compare: PASS"), "{text}");
}

#[test]
fn pa_model_defaults_to_its_own_law() {
    let out = dpa(&[
        "compare", "--model", "pa", "--m", "2", "--steps", "100000",
        "--seed", "2", "--tv-tol", "0.01",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("compare: PASS"), "{}", stdout(&out));

    let out = dpa(&["analytic", "--model", "pa", "--m", "2", "--max-i", "30"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("\"method\": \"closed-form\""), "{}", stdout(&out));

    // An explicitly requested unsupported method still errors.
    let out = dpa(&["analytic", "--model", "pa", "--m", "2", "--method", "dp"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compare_fails_against_a_mismatched_reference() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap().to_owned();
    let theory = dpa(&[
        "analytic", "--alpha", "0.05", "--beta", "0.9", "--delta-in", "1.0",
        "--delta-out", "1.0", "--method", "dp", "--max-i", "16", "--max-j", "16",
        "--out", &dir,
    ]);
    assert!(theory.status.success(), "{}", stderr(&theory));

    let pmf = tmp.path().join("pmf.json");
    let pmf_s = pmf.to_str().unwrap().to_owned();
    let report = tmp.path().join("report");
    let report_s = report.to_str().unwrap().to_owned();
    let mut args = vec!["compare"];
    args.extend_from_slice(STANDARD);
    args.extend_from_slice(&[
        "--steps", "100000", "--seed", "5", "--against", &pmf_s,
        "--tv-tol", "0.05", "--out", &report_s,
    ]);
    let out = dpa(&args);
    assert_eq!(out.status.code(), Some(1), "{}", stdout(&out));
    assert!(stdout(&out).contains("compare: FAIL"), "{}", stdout(&out));
    let comparison = read_json(&report.join("comparison.json"));
    assert_eq!(comparison["pass"], false);
    assert_eq!(comparison["tv"]["pass"], false);
}

#[test]
fn tail_argmax_classifies_all_offset_regimes() {
    let run = |delta_out: &str| {
        let out = dpa(&[
            "tail", "--alpha", "0.3", "--beta", "0.4", "--delta-in", "1.0",
            "--delta-out", delta_out, "--argmax",
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        stdout(&out)
    };
    assert!(run("0.5").contains("r* = 0"));
    assert!(run("1.0").contains("interval [0, c_O/c_I]"));
    assert!(run("2.0").contains("r* = c_O/c_I = "));
}

#[test]
fn tail_ray_verification_passes_on_the_standard_model() {
    let mut args = vec!["tail"];
    args.extend_from_slice(STANDARD);
    args.extend_from_slice(&["--r", "1.0", "--verify"]);
    let out = dpa(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("predicted slope"), "{text}");
    assert!(text.contains("PASS"), "{text}");
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("run.json");
    std::fs::write(
        &config,
        r#"{"model":"dpa","alpha":0.2,"beta":0.5,"delta_in":0.6,"delta_out":1.4,"steps":5000,"seed":9}"#,
    )
    .unwrap();
    let config_s = config.to_str().unwrap().to_owned();
    let dir = tmp.path().join("out");
    let dir_s = dir.to_str().unwrap().to_owned();

    let out = dpa(&["simulate", "--config", &config_s, "--alpha", "0.25", "--out", &dir_s]);
    assert!(out.status.success(), "{}", stderr(&out));
    let manifest = read_json(&dir.join("manifest.json"));
    assert_eq!(manifest["params"]["alpha"].as_f64(), Some(0.25), "flag wins");
    assert_eq!(manifest["params"]["beta"].as_f64(), Some(0.5), "file fills the rest");
    assert_eq!(manifest["seed"].as_u64(), Some(9));
    assert_eq!(manifest["steps"].as_u64(), Some(5000));

    // Typos in the config file are rejected, not silently ignored.
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"alpa":0.2}"#).unwrap();
    let bad_s = bad.to_str().unwrap().to_owned();
    let out = dpa(&["simulate", "--config", &bad_s, "--steps", "10", "--out", &dir_s]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("alpa"), "{}", stderr(&out));
}
