use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn creditnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_creditnet"))
        .args(args)
        .env_remove("LLM_ENDPOINT")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout));
    })
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const TRIANGLE: &str = r#"{
  "labels": ["A", "B", "C"],
  "external_assets": [0, 0, 1],
  "liabilities": [[0, 3, 0], [0, 0, 3], [3, 0, 0]]
}"#;

#[test]
fn clear_reports_totals() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(dir.path(), "net.json", TRIANGLE);
    let out = creditnet(&["clear", "--network", &net]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let value = stdout_json(&out);
    // every firm pays in full: a = e + 3
    assert!((value["total_assets"].as_f64().unwrap() - 10.0).abs() < 1e-9);
    assert_eq!(value["defaults"], 0);
}

#[test]
fn generate_cycles_compress_remove() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("er.json");
    let net = net.to_str().unwrap();
    let out = creditnet(&["generate", "--topology", "erdos-renyi", "--n", "6", "--seed", "3", "--out", net]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("er.json.manifest.json").exists());

    let tri = write(dir.path(), "tri.json", TRIANGLE);
    let out = creditnet(&["cycles", "--network", &tri]);
    assert_eq!(code(&out), 0);
    let cycles = stdout_json(&out);
    assert_eq!(cycles.as_array().unwrap().len(), 1);
    assert_eq!(cycles[0]["firms"], serde_json::json!([0, 1, 2]));

    let compressed = dir.path().join("c.json");
    let out = creditnet(&["compress", "--network", &tri, "--cycles", "0,1,2", "--out", compressed.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("c.json.manifest.json").exists());
    let after: Value = serde_json::from_str(&fs::read_to_string(&compressed).unwrap()).unwrap();
    assert_eq!(after["liabilities"], serde_json::json!([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]));

    let out = creditnet(&["remove", "--network", &tri, "--edges", "0-1"]);
    assert_eq!(code(&out), 0);
    let value = stdout_json(&out);
    assert_eq!(value["network"]["liabilities"][0][1], 0.0);
    assert_eq!(value["report"]["removed_amount"], 3.0);
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let tri = write(dir.path(), "tri.json", TRIANGLE);
    assert_eq!(code(&creditnet(&["clear", "--network", "/no/such/file.json"])), 2);
    let bad = write(dir.path(), "bad.json", r#"{"labels": ["A"], "external_assets": [-1], "liabilities": [[0]]}"#);
    assert_eq!(code(&creditnet(&["clear", "--network", &bad])), 2);
    assert_eq!(code(&creditnet(&["compress", "--network", &tri, "--cycles", "0,2,1"])), 2);
    assert_eq!(code(&creditnet(&["remove", "--network", &tri, "--edges", "1-0"])), 2);
    assert_eq!(code(&creditnet(&["clear", "--network", &tri, "--alpha", "1.5"])), 2);
    assert_eq!(code(&creditnet(&["frobnicate"])), 2);
    let out = creditnet(&["strategize", "--network", &tri, "--operation", "removal", "--strategies", "llm"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn strategize_with_delegate() {
    let dir = tempfile::tempdir().unwrap();
    let tri = write(dir.path(), "tri.json", TRIANGLE);
    let out = creditnet(&[
        "strategize",
        "--network",
        &tri,
        "--operation",
        "compression",
        "--strategies",
        "none,greedy,oracle,llm",
        "--llm-delegate",
        "oracle",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let value = stdout_json(&out);
    let rows = value["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[3]["post_total"], rows[2]["post_total"]);

    let table = dir.path().join("table.txt");
    let out = creditnet(&[
        "strategize", "--network", &tri, "--operation", "removal", "--table", "--out", table.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&table).unwrap();
    assert!(text.contains("Random Removal"));
    assert!(dir.path().join("table.txt.manifest.json").exists());
}

#[test]
fn transport_failure_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let tri = write(dir.path(), "tri.json", TRIANGLE);
    // an exhausted script stands in for a failed endpoint
    let script = write(dir.path(), "script.json", "[]");
    let out = creditnet(&[
        "strategize", "--network", &tri, "--operation", "compression", "--strategies", "llm", "--llm-mock", &script,
    ]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));

    // nothing listens on port 9 of localhost
    let settings = write(dir.path(), "http.json", r#"{"timeout_secs": 2, "retries": 0}"#);
    let out = Command::new(env!("CARGO_BIN_EXE_creditnet"))
        .args([
            "strategize", "--network", &tri, "--operation", "compression", "--strategies", "llm", "--llm-http",
            "--llm-settings", &settings,
        ])
        .env("LLM_ENDPOINT", "http://127.0.0.1:9/v1/chat/completions")
        .env("LLM_MODEL", "test")
        .output()
        .unwrap();
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn render_translate_and_halt() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("cp.json");
    let out = creditnet(&["generate", "--topology", "core-periphery", "--seed", "5", "--out", net.to_str().unwrap()]);
    assert_eq!(code(&out), 0);

    let clean = dir.path().join("clean");
    let out = creditnet(&[
        "render-statements", "--network", net.to_str().unwrap(), "--out", clean.to_str().unwrap(), "--format",
        "statements", "--template", "narrative",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let result = clean.join("result");
    let out = creditnet(&[
        "translate",
        "--corpus",
        clean.join("corpus").to_str().unwrap(),
        "--llm-mock",
        clean.join("script.json").to_str().unwrap(),
        "--truth",
        clean.join("truth.json").to_str().unwrap(),
        "--out",
        result.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["verdict"], "reconstructed");
    assert!(result.join("component_0.json").exists());
    assert!(result.join("manifest.json").exists());
    let run: Value = serde_json::from_str(&fs::read_to_string(result.join("run.json")).unwrap()).unwrap();
    assert_eq!(run["exit_code"], 0);

    let dirty = dir.path().join("dirty");
    let out = creditnet(&[
        "render-statements", "--network", net.to_str().unwrap(), "--out", dirty.to_str().unwrap(), "--inject-conflicts",
        "1", "--seed", "2",
    ]);
    assert_eq!(code(&out), 0);
    let injected: Value = serde_json::from_str(&fs::read_to_string(dirty.join("injected.json")).unwrap()).unwrap();
    let mut records: Vec<_> = fs::read_dir(dirty.join("corpus"))
        .unwrap()
        .map(|e| e.unwrap().path().to_str().unwrap().to_string())
        .collect();
    records.sort();
    let mut args = vec!["aggregate"];
    args.extend(records.iter().map(String::as_str));
    let out = creditnet(&args);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["halted_at"], injected[0]["record"]);
}

#[test]
fn experiment_and_manifest_flag() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "spec.json",
        r#"{"topologies": [{"kind": "isolated_blocks", "sizes": [3, 3], "n": 6}], "instances": 2,
            "operation": "removal", "random_seeds": 2, "seed": 9}"#,
    );
    let out_dir = dir.path().join("exp");
    let manifest = dir.path().join("run.json");
    let out = creditnet(&[
        "--manifest",
        manifest.to_str().unwrap(),
        "experiment",
        "--spec",
        &spec,
        "--jobs",
        "2",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 4);
    let run: Value = serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(run["exit_code"], 0);

    let bad = write(dir.path(), "bad.json", r#"{"topologies": [], "operation": "removal"}"#);
    assert_eq!(code(&creditnet(&["experiment", "--spec", &bad, "--out", out_dir.to_str().unwrap()])), 2);
}
