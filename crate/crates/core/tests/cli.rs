use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn magic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magic"))
        .args(args)
        .env_remove("MAGIC_BUDGET")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn verify_z3_with_witness() {
    let out = magic(&["verify", "--p", "3", "--input", &fixture("t33.json"), "--witness", &fixture("w33.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["magic"], true);
    assert_eq!(v["checks"]["intertwining"]["holds"], true);
}

#[test]
fn verify_reports_failing_identity() {
    let out = magic(&["verify", "--input", &fixture("t33.json"), "--witness", &fixture("w22_id.json")]);
    assert_eq!(out.status.code(), Some(1));
    let v = json_of(&out);
    assert_eq!(v["magic"], false);
    assert_eq!(v["checks"]["m_t_squared_is_defect"]["holds"], false);
    assert!(v["checks"]["m_t_squared_is_defect"]["first_failure"].is_array());
}

#[test]
fn verify_scalar_two_over_z5_searches_and_fails() {
    let out = magic(&["verify", "--p", "5", "--input", &fixture("scalar2.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out), serde_json::json!({ "magic": false }));
}

#[test]
fn search_lists_witnesses() {
    let out = magic(&["search", "--p", "5", "--input", &fixture("scalar2.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["count"], 0);

    let out = magic(&["search", "--input", &fixture("t22.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let ws = v["witnesses"].as_array().unwrap();
    assert_eq!(ws.len(), v["count"].as_u64().unwrap() as usize);
    let swap = serde_json::json!([["0", "1"], ["1", "0"]]);
    let id = serde_json::json!([["1", "0"], ["0", "1"]]);
    for target in [&swap, &id] {
        assert!(ws.iter().any(|w| &w["m_t"]["rows"] == target && &w["m_t_star"]["rows"] == target));
    }
}

#[test]
fn halmos_z2_reproduces_both_matrices() {
    let cases = [
        ("w22_swap.json", [["1", "1", "0", "1"], ["1", "1", "1", "0"], ["0", "1", "1", "1"], ["1", "0", "1", "1"]]),
        ("w22_id.json", [["1", "1", "1", "0"], ["1", "1", "0", "1"], ["1", "0", "1", "1"], ["0", "1", "1", "1"]]),
    ];
    for (w, expected) in cases {
        let out = magic(&["dilate", "--kind", "halmos", "--input", &fixture("t22.json"), "--witness", &fixture(w)]);
        assert_eq!(out.status.code(), Some(0));
        let v = json_of(&out);
        assert_eq!(v["rows"], serde_json::json!(expected));
        assert_eq!(v["field"], serde_json::json!({ "kind": "Fp", "p": 2 }));
    }
}

#[test]
fn dilation_round_trip_is_unitary() {
    for (kind, n) in [("halmos", "1"), ("egervary", "4")] {
        let out = magic(&[
            "dilate", "--kind", kind, "--N", n,
            "--input", &fixture("t33.json"), "--witness", &fixture("w33.json"),
        ]);
        assert_eq!(out.status.code(), Some(0));
        let path = scratch(&format!("{kind}.json"));
        std::fs::write(&path, &out.stdout).unwrap();

        let check = magic(&["axioms", "--input", path.to_str().unwrap(), "--require", "unitary"]);
        assert_eq!(check.status.code(), Some(0), "{}", String::from_utf8_lossy(&check.stderr));
        let v = json_of(&check);
        assert_eq!(v["operator"]["is_unitary"], true);
        assert_eq!(v["gram_is_identity"], true);
    }
}

#[test]
fn non_unitary_operator_fails_requirement() {
    let out = magic(&["axioms", "--input", &fixture("t33.json"), "--require", "unitary,isometry"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_of(&out)["operator"]["is_self_adjoint"], true);
}

#[test]
fn dilate_without_witness_searches() {
    let out = magic(&["dilate", "--kind", "halmos", "--input", &fixture("t33.json")]);
    assert_eq!(out.status.code(), Some(0));
    let out = magic(&["dilate", "--kind", "halmos", "--p", "5", "--input", &fixture("scalar2.json")]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sznagy_trace_and_window() {
    let out = magic(&[
        "dilate", "--kind", "sznagy", "--N", "2", "--window", "4",
        "--input", &fixture("t33.json"), "--witness", &fixture("w33.json"),
        "--sequence", &fixture("seq_e0.json"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let trace = v["trace"].as_array().unwrap();
    assert_eq!(trace.len(), 3);
    assert_eq!(trace[0]["sequence"]["support"]["0"], serde_json::json!(["1", "0"]));
    assert_eq!(trace[1]["sequence"]["support"]["0"], serde_json::json!(["2", "2"]));
    assert_eq!(trace[1]["sequence"]["support"]["-1"], serde_json::json!(["2", "1"]));
    assert_eq!(v["window"]["passed"], true);
}

#[test]
fn vn_and_ergodic_over_q3() {
    let out = magic(&["vn", "--poly", "0,0,1", "--N", "2", "--input", &fixture("t_q3.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["lhs"], "1/9");
    assert_eq!(v["rhs"], "1");

    let out = magic(&["ergodic", "--N", "2", "--input", &fixture("t_q3.json"), "--vector", &fixture("v_one.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["lhs_vector"], serde_json::json!(["3^0 * 4"]));
    assert_eq!(v["rhs_vector"], serde_json::json!(["3^0 * 4"]));
    assert_eq!(v["equal"], true);
}

#[test]
fn ergodic_weight_error_exits_two() {
    let out = magic(&[
        "ergodic", "--N", "2", "--input", &fixture("t33.json"),
        "--witness", &fixture("w33.json"), "--vector", &fixture("v_one.json"),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn descriptor_mismatch_exits_two() {
    let out = magic(&["verify", "--p", "5", "--input", &fixture("t33.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn census_writes_csv() {
    let path = scratch("census_1_5.csv");
    let out = magic(&["census", "--n", "1", "--p", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["magic_count"], 3);
    let csv = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "p,n,matrix_entries,witness_count,sample_m_t,sample_m_t_star");
    assert_eq!(lines.len(), 4);
    assert!(lines.contains(&"5,1,0,1,1,1"));
}

#[test]
fn budget_env_var_is_honoured() {
    let out = Command::new(env!("CARGO_BIN_EXE_magic"))
        .args(["census", "--n", "2", "--p", "3", "--count-only"])
        .env("MAGIC_BUDGET", "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn repeated_invocations_are_byte_identical() {
    let invocations: [Vec<String>; 3] = [
        vec!["search".into(), "--input".into(), fixture("t22.json")],
        vec!["census".into(), "--n".into(), "2".into(), "--p".into(), "2".into(), "--format".into(), "csv".into(), "--partitions".into(), "4".into()],
        vec!["axioms".into(), "--p".into(), "7".into(), "--dim".into(), "3".into(), "--seed".into(), "11".into()],
    ];
    for args in invocations {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let a = magic(&args);
        let b = magic(&args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn plain_format() {
    let out = magic(&["dilate", "--kind", "halmos", "--format", "plain", "--input", &fixture("t22.json"), "--witness", &fixture("w22_id.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 4);
    let out = magic(&["verify", "--format", "csv", "--input", &fixture("t33.json")]);
    assert_eq!(out.status.code(), Some(2));
}
