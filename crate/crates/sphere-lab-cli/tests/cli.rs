//! End-to-end tests against the built binary: exit codes, payload shapes,
//! worker-count determinism, and manifest digests.

use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sphere-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is JSON: {e}\n{}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn axis_json(n: usize) -> String {
    let mut coords = vec!["0".to_string(); n];
    coords[0] = "1".to_string();
    format!("[{}]", coords.join(","))
}

fn cap_spec(n: usize, t0: f64, r: f64, extra: &str) -> String {
    let axis = axis_json(n);
    format!(
        r#"{{"experiment":"pairwise_density","n":{n},"a":{{"type":"cap","axis":{axis},"t0":{t0}}},"b":{{"type":"cap","axis":{axis},"t0":{t0}}},"r":{r}{extra}}}"#
    )
}

#[test]
fn constants_simplex_matches_closed_form() {
    let out = run(&["constants", r#"{"r_values":[0.5,0.5]}"#]);
    assert_eq!(out.status.code(), Some(0));
    let json = stdout_json(&out);
    assert_eq!(json["valid"], serde_json::Value::Bool(true));
    let c = json["C_R"].as_f64().unwrap();
    let eps = json["eps_R"].as_f64().unwrap();
    assert!((c - 13.0).abs() < 1e-12, "C_R = {c}");
    assert!((eps - 1.0 / 6.0).abs() < 1e-12, "eps_R = {eps}");
    let seq = json["c_sequence"].as_array().unwrap();
    assert_eq!(seq.len(), 2);
    assert_eq!(seq[0].as_f64().unwrap(), 0.5);
}

#[test]
fn constants_orthogonal_configuration_is_exact() {
    let out = run(&["constants", r#"{"r_values":[0.0,0.0,0.0]}"#]);
    assert_eq!(out.status.code(), Some(0));
    let json = stdout_json(&out);
    assert_eq!(json["C_R"].as_f64().unwrap(), 6.0);
    assert_eq!(json["eps_R"].as_f64().unwrap(), 1.0);
}

#[test]
fn constants_diameter_failure_exits_two() {
    let out = run(&["constants", r#"{"r_values":[-0.5,-0.5]}"#]);
    assert_eq!(out.status.code(), Some(2));
    let json = stdout_json(&out);
    assert_eq!(json["valid"], serde_json::Value::Bool(false));
    let reason = json["reason"].as_str().unwrap();
    assert!(reason.contains("diameter"), "{reason}");
}

#[test]
fn constants_malformed_input_exits_one() {
    let inline = run(&["constants", r#"{"r_values": oops}"#]);
    assert_eq!(inline.status.code(), Some(1));
    let missing_file = run(&["constants", "no-such-config.json"]);
    assert_eq!(missing_file.status.code(), Some(1));
    let out_of_range = run(&["constants", r#"{"r_values":[1.5]}"#]);
    assert_eq!(out_of_range.status.code(), Some(1));
}

#[test]
fn spectral_csv_has_schema_header_and_exact_low_degrees() {
    let out = run(&["spectral", "--n", "100", "--r", "0.5", "--K", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# schema=1");
    assert_eq!(lines[1], "k,mu,r_pow_k,deviation");
    assert_eq!(lines.len(), 2 + 11);

    let row1: Vec<&str> = lines[3].split(',').collect();
    assert_eq!(row1[0], "1");
    assert_eq!(row1[1].parse::<f64>().unwrap(), 0.5);
    assert_eq!(row1[3].parse::<f64>().unwrap(), 0.0);
    for line in &lines[2..] {
        let mu: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(mu.abs() <= 1.0, "{line}");
    }
}

#[test]
fn spectral_deviation_shrinks_when_dimension_doubles() {
    let max_dev = |n: &str| -> f64 {
        let out = run(&["spectral", "--n", n, "--r", "0.5", "--K", "50"]);
        assert_eq!(out.status.code(), Some(0));
        String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .skip(2)
            .map(|line| line.split(',').nth(3).unwrap().parse::<f64>().unwrap())
            .fold(0.0, f64::max)
    };
    let ratio = max_dev("200") / max_dev("100");
    assert!((0.35..=0.65).contains(&ratio), "ratio = {ratio}");
}

#[test]
fn spectral_accepts_negative_latitudes() {
    let out = run(&["spectral", "--n", "80", "--r", "-0.4", "--K", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let row1: Vec<&str> = text.lines().nth(3).unwrap().split(',').collect();
    assert_eq!(row1[1].parse::<f64>().unwrap(), -0.4);
}

#[test]
fn spectral_single_degree_and_range_errors() {
    let out = run(&["spectral", "--n", "50", "--r", "0.3", "--K", "8", "--k", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(2).unwrap().starts_with("3,"));

    assert_eq!(run(&["spectral", "--n", "2", "--r", "0.5"]).status.code(), Some(1));
    assert_eq!(run(&["spectral", "--n", "10", "--r", "1.5"]).status.code(), Some(1));
    let k_past_table = run(&["spectral", "--n", "10", "--r", "0.5", "--K", "4", "--k", "9"]);
    assert_eq!(k_past_table.status.code(), Some(1));
}

#[test]
fn estimate_full_sphere_density_is_one() {
    let spec = r#"{"experiment":"pairwise_density","n":10,"a":{"type":"complement","of":{"type":"union","terms":[]}},"b":{"type":"complement","of":{"type":"union","terms":[]}},"r":0.3}"#;
    let out = run(&["estimate", spec]);
    assert_eq!(out.status.code(), Some(0));
    let json = stdout_json(&out);
    assert_eq!(json["estimate"].as_f64().unwrap(), 1.0);
    assert_eq!(json["details"]["sigma_a"].as_f64().unwrap(), 1.0);
    assert_eq!(json["spec"]["samples"].as_u64().unwrap(), 10_000);
}

#[test]
fn estimate_stdout_is_identical_across_worker_counts() {
    let spec = cap_spec(12, 0.4, 0.3, "");
    let one = run(&["estimate", &spec, "--seed", "42", "--workers", "1"]);
    let four = run(&["estimate", &spec, "--seed", "42", "--workers", "4"]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(four.status.code(), Some(0));
    assert!(!one.stdout.is_empty());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn estimate_override_flags_reach_the_report() {
    let spec = cap_spec(8, 0.2, 0.1, "");
    let out = run(&["estimate", &spec, "--samples", "2000", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let json = stdout_json(&out);
    assert_eq!(json["spec"]["samples"].as_u64().unwrap(), 2000);
    assert_eq!(json["spec"]["seed"].as_u64().unwrap(), 7);
}

#[test]
fn estimate_failed_criterion_exits_three() {
    // Narrow cap at low dimension: orthogonal slices avoid the cap, so the
    // lower CI end lands under 0.9*sigma^2 and the pair criterion fails.
    let spec = cap_spec(10, 0.9, 0.0, r#","samples":1000"#);
    let out = run(&["estimate", &spec]);
    assert_eq!(out.status.code(), Some(3));
    let json = stdout_json(&out);
    let criteria = json["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 1);
    assert_eq!(criteria[0]["id"], "orthogonal_pair_lower_ci");
    assert_eq!(criteria[0]["passed"], serde_json::Value::Bool(false));
}

#[test]
fn estimate_rejects_bad_specs_with_the_right_codes() {
    // Below the minimum sample budget: input error.
    let starved = cap_spec(8, 0.2, 0.1, r#","samples":10"#);
    assert_eq!(run(&["estimate", &starved]).status.code(), Some(1));

    // Diameter-violating tuple configuration: invalid configuration.
    let axis = axis_json(12);
    let tuple = format!(
        r#"{{"experiment":"tuple_containment","n":12,"a":{{"type":"cap","axis":{axis},"t0":0.3}},"config":{{"r_values":[-0.5,-0.5]}}}}"#
    );
    assert_eq!(run(&["estimate", &tuple]).status.code(), Some(2));

    let garbage = run(&["estimate", r#"{"experiment":"no_such_kind","n":5}"#]);
    assert_eq!(garbage.status.code(), Some(1));
}

#[test]
fn estimate_csv_payload_matches_schema() {
    let spec = cap_spec(9, 0.3, 0.2, "");
    let out = run(&["estimate", &spec, "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "# schema=1");
    assert_eq!(
        lines[1],
        "experiment,n,samples,seed,estimate,ci_low,ci_high,std_error,bounds"
    );
    assert!(lines[2].starts_with("pairwise_density,9,10000,0,"));
}

#[test]
fn out_directory_gets_reports_and_a_digest_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let spec = cap_spec(8, 0.25, 0.2, "");
    let out = run(&["estimate", &spec, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "estimate");
    assert_eq!(manifest["seed"].as_u64().unwrap(), 0);
    assert_eq!(manifest["params"]["n"].as_u64().unwrap(), 8);
    assert!(manifest["runtime_seconds"].as_f64().unwrap() >= 0.0);

    let outputs = manifest["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 2);
    for entry in outputs {
        let name = entry["file"].as_str().unwrap();
        let bytes = std::fs::read(dir.path().join(name)).unwrap();
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(entry["sha256"].as_str().unwrap(), hex, "{name}");
    }

    // The report on disk matches stdout byte for byte.
    let report = std::fs::read(dir.path().join("report.json")).unwrap();
    assert_eq!(report, out.stdout);
}

#[test]
fn rerunning_an_estimate_reproduces_the_report_files() {
    let spec = cap_spec(8, 0.25, 0.2, "");
    let digest_of = |dir: &Path| -> String {
        let out = run(&["estimate", &spec, "--out", dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        let manifest: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.join("manifest.json")).unwrap(),
        )
        .unwrap();
        manifest["outputs"][0]["sha256"].as_str().unwrap().to_string()
    };
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    assert_eq!(digest_of(first.path()), digest_of(second.path()));
}
