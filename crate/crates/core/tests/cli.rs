// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::Command;

use blomkit::cli::main_with;
use blomkit::document::read_network;
use blomkit::example_network;
use tempfile::TempDir;

const EXAMPLE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/example_network.json");

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("blomkit").chain(args.iter().copied());
    let code = main_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn bundled_fixture_matches_builtin_example() {
    let net = read_network(Path::new(EXAMPLE)).unwrap();
    assert_eq!(net, example_network());
    let (code, out, _) = run(&["example"]);
    assert_eq!(code, 0);
    assert_eq!(out, std::fs::read_to_string(EXAMPLE).unwrap());
}

#[test]
fn establish_on_example() {
    let (code, out, err) = run(&["establish", "--network", EXAMPLE, "-i", "2", "-j", "8"]);
    assert_eq!((code, out.as_str(), err.as_str()), (0, "12\n", ""));
    let (code, out, _) = run(&["establish", "--network", EXAMPLE, "-i", "8", "-j", "2"]);
    assert_eq!((code, out.as_str()), (0, "12\n"));
}

#[test]
fn establish_out_of_range() {
    let (code, out, err) = run(&["establish", "--network", EXAMPLE, "-i", "2", "-j", "9"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert_eq!(err, "error: node 9 out of range 1..=8\n");
}

#[test]
fn composite_modulus_rejected() {
    let (code, out, err) = run(&["provision", "--N", "8", "--t", "6", "--q", "10"]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("composite modulus q=10"), "{err}");
}

#[test]
fn small_prime_rejected() {
    let (code, _, err) = run(&["provision", "--N", "8", "--m", "4", "--q", "7"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error: prime too small"), "{err}");
}

#[test]
fn t_and_m_are_exclusive_and_required() {
    let (code, _, err) = run(&["provision", "--N", "8", "--t", "3", "--m", "3", "--q", "11"]);
    assert_eq!(code, 2);
    assert_eq!(err.lines().count(), 1);
    let (code, _, _) = run(&["provision", "--N", "8", "--q", "11"]);
    assert_eq!(code, 2);
}

#[test]
fn blom_strict_adds_a_row() {
    let (_, default, _) = run(&["provision", "--N", "8", "--t", "3", "--q", "11"]);
    let (_, strict, _) = run(&["provision", "--N", "8", "--t", "3", "--q", "11", "--blom-strict"]);
    let d: serde_json::Value = serde_json::from_str(&default).unwrap();
    let s: serde_json::Value = serde_json::from_str(&strict).unwrap();
    assert_eq!(d["m"], 3);
    assert_eq!(s["m"], 4);
}

#[test]
fn provision_keymatrix_round_trip() {
    let dir = TempDir::new().unwrap();
    let net_path = dir.path().join("net.json");
    let net_str = net_path.to_str().unwrap();
    let (code, _, _) = run(&[
        "provision",
        "--variant",
        "classic-vandermonde",
        "--N",
        "10",
        "--m",
        "4",
        "--q",
        "101",
        "--seed",
        "9",
        "--output",
        net_str,
    ]);
    assert_eq!(code, 0);
    let (code, csv, _) = run(&["keymatrix", "--network", net_str, "--format", "csv"]);
    assert_eq!(code, 0);
    let parsed: Vec<Vec<u64>> = csv
        .lines()
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    let net = read_network(&net_path).unwrap();
    assert_eq!(parsed, net.full_key_matrix().to_rows());

    let (_, json, _) = run(&["keymatrix", "--network", net_str, "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["keys"][3][7].as_u64(), Some(net.full_key_matrix().get(3, 7)));
}

#[test]
fn keymatrix_table_on_example() {
    let (code, out, _) = run(&["keymatrix", "--network", EXAMPLE]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some(" 5  0  8 26 25  0 28 26"));
    assert_eq!(out.lines().count(), 8);
}

#[test]
fn sweep_row_counts() {
    let (code, out, _) = run(&["sweep", "--N", "8", "--q", "31", "--t-range", "1:8", "--seeds", "3"]);
    assert_eq!(code, 0);
    let (raw, agg) = out.split_once("\n\n").unwrap();
    assert_eq!(raw.lines().next(), Some("t,m,q,N,seed,unique_keys"));
    assert_eq!(raw.lines().count() - 1, 24);
    assert_eq!(agg.lines().next(), Some("t,mean_unique_keys"));
    assert_eq!(agg.lines().count() - 1, 8);
}

#[test]
fn sweep_rejects_out_of_range_t() {
    let (code, _, err) = run(&["sweep", "--N", "8", "--q", "31", "--t-range", "0:8", "--seeds", "2"]);
    assert_eq!(code, 2);
    assert!(err.contains("t=0"), "{err}");
}

#[test]
fn attack_reports() {
    let (code, out, _) = run(&["attack", "--network", EXAMPLE, "--compromise", "1,3,5", "--pair", "2,7"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["compromised"], serde_json::json!([1, 3, 5]));
    assert_eq!(v["pair"]["determined"], true);
    assert_eq!(v["pair"]["value"], 11);
    assert_eq!(v["determination"].as_array().unwrap().len(), 8);

    let (code, out, _) = run(&["attack", "--network", EXAMPLE, "--threshold"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["threshold"]["c"], 3);
    assert_eq!(v["threshold"]["witness_subset"], serde_json::json!([1, 3, 5]));
    assert_eq!(v["threshold"]["witness_pair"], serde_json::json!([2, 7]));
    assert_eq!(v["threshold"]["determined_value"], 11);
    assert_eq!(v["threshold"]["exhaustive"], true);

    let (code, _, _) = run(&["attack", "--network", EXAMPLE, "--pair", "1,2", "--threshold"]);
    assert_eq!(code, 2);
    let (code, _, err) = run(&["attack", "--network", EXAMPLE, "--compromise", "2,2"]);
    assert_eq!(code, 2);
    assert!(err.contains("duplicate"), "{err}");
}

#[test]
fn attack_without_possible_coalition() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("tiny.json");
    let p = path.to_str().unwrap();
    run(&[
        "provision",
        "--variant",
        "classic-vandermonde",
        "--N",
        "2",
        "--m",
        "1",
        "--q",
        "3",
        "--output",
        p,
    ]);
    let (code, out, _) = run(&["attack", "--network", p, "--threshold", "--format", "table"]);
    assert_eq!(code, 0);
    assert!(out.contains("no attack possible"), "{out}");
}

#[test]
fn cost_report() {
    let (code, out, _) = run(&["cost", "--variant", "both", "--m", "6", "--q", "31"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["records"][0]["variant"], "classic-vandermonde");
    assert_eq!(v["records"][0]["stored_bits_per_node"], 60);
    assert_eq!(v["records"][1]["stored_bits_per_node"], 30);
    assert_eq!(v["records"][1]["mults_per_key"], 0);
    assert_eq!(v["records"][1]["sign_ops_per_key"], 6);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    for args in [
        &["provision", "--N", "16", "--t", "9", "--q", "101", "--seed", "4"][..],
        &["sweep", "--N", "16", "--q", "101", "--t-range", "1:16", "--seeds", "4"][..],
        &["attack", "--network", EXAMPLE, "--compromise", "2,4", "--threshold"][..],
        &["cost", "--t", "6", "--q", "31", "--format", "table"][..],
    ] {
        let first = run(args);
        assert_eq!(first.0, 0, "{args:?}: {}", first.2);
        assert_eq!(run(args), first);
    }
}

#[test]
fn binary_exit_status_and_stderr() {
    let bin = env!("CARGO_BIN_EXE_blomkit");
    let out = Command::new(bin)
        .args(["establish", "--network", EXAMPLE, "-i", "2", "-j", "8"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "12\n");

    let out = Command::new(bin)
        .args(["provision", "--N", "8", "--t", "6", "--q", "10"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(String::from_utf8_lossy(&out.stderr), "error: composite modulus q=10\n");
}

#[test]
fn tampered_network_exits_with_internal_status() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.json");
    let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(EXAMPLE).unwrap()).unwrap();
    doc.as_object_mut().unwrap().remove("secret");
    doc["shares"][2]["row"][0] = serde_json::json!(0);
    std::fs::write(&path, doc.to_string()).unwrap();
    let (code, _, err) = run(&["establish", "--network", path.to_str().unwrap(), "-i", "3", "-j", "5"]);
    assert_eq!(code, 3);
    assert!(err.starts_with("error: asymmetric key"), "{err}");
}
