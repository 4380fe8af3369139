use std::process::{Command, Output};

use qfc_core::channels::{dephasing, random_channel};
use qfc_core::entropy::binary_entropy;
use serde_json::Value;

fn qfc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfc")).args(args).output().expect("qfc runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn golden_sweep_header() {
    let out = qfc(&["sweep", "--channel", "erasure", "--param-range", "0:1:0.25"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert_eq!(text.lines().next(), Some("param,C_E,Q_E,Q_unassisted_lb,Q_FB_star,ordering_ok"));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 5);
    for r in rows {
        let eps: f64 = r[0].parse().unwrap();
        let fb: f64 = r[4].parse().unwrap();
        assert!((fb - (1.0 - 2.0 * eps + eps * eps)).abs() < 1e-12);
        let c_e: f64 = r[1].parse().unwrap();
        let q_lb: f64 = r[3].parse().unwrap();
        assert!(c_e >= 2.0 * q_lb - 1e-6);
        assert_eq!(r[5], "true");
    }
}

#[test]
fn depolarizing_sweep_endpoints() {
    let out = qfc(&["sweep", "--channel", "depolarizing", "--param-range", "0.25:1:0.75"]);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 2);
    let c: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(c[0].abs() < 1e-6);
    assert!((c[1] - 2.0).abs() < 1e-6);
    // no feedback-rate formula outside the erasure family
    assert!(rows.iter().all(|r| r[4].is_empty()));
}

#[test]
fn single_point_range() {
    let out = qfc(&["sweep", "--channel", "erasure", "--param-range", "0.4:0.4:0.1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(csv_rows(&out).len(), 1);
}

#[test]
fn bad_ranges_exit_2() {
    for range in ["1:0:0.1", "0:1:0", "0:1", "a:b:c", "0:1:-0.5"] {
        let out = qfc(&["sweep", "--channel", "erasure", "--param-range", range]);
        assert_eq!(out.status.code(), Some(2), "{range}");
    }
}

#[test]
fn capacity_examples() {
    let v = json(&qfc(&["capacity", "--channel", "erasure", "--param", "0.5"]));
    assert!((v["C_E"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!((v["Q_E"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    for key in ["channel", "coherent_info_max", "iterations", "stationarity_gap", "multistart_spread"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let v = json(&qfc(&["capacity", "--channel", "identity", "--dim", "2"]));
    assert!((v["C_E"].as_f64().unwrap() - 2.0).abs() < 1e-6);
}

#[test]
fn capacity_from_channel_file() {
    let p = 0.15;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("custom.json");
    std::fs::write(&path, serde_json::to_string(&dephasing(p).unwrap().to_json()).unwrap()).unwrap();
    let out = qfc(&["capacity", "--channel-file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let c_e = json(&out)["C_E"].as_f64().unwrap();
    assert!((1.0..=2.0).contains(&c_e));

    // brute scan over diagonal inputs diag(q, 1-q); dephasing keeps them fixed
    // and its complementary output has spectrum {(1-p), p} mixed by q
    let scan = (0..=2000)
        .map(|i| {
            let q = i as f64 / 2000.0;
            let s_in = binary_entropy(q);
            // environment state [[1-p, (1-p)^½ p^½ (2q-1)], [.., p]]
            let off = ((1.0 - p) * p).sqrt() * (2.0 * q - 1.0);
            let tr = 1.0;
            let det = (1.0 - p) * p - off * off;
            let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
            let l = 0.5 + disc;
            2.0 * s_in - binary_entropy(l)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((c_e - scan).abs() < 1e-6, "{c_e} vs {scan}");
    assert!((c_e - (2.0 - binary_entropy(p))).abs() < 1e-6);
}

#[test]
fn invalid_inputs_exit_2() {
    let cases: Vec<Vec<&str>> = vec![
        vec!["capacity", "--channel", "nope"],
        vec!["capacity", "--channel", "erasure"],
        vec!["capacity", "--channel", "erasure", "--param", "1.5"],
        vec!["capacity", "--channel-file", "/nonexistent/channel.json"],
        vec!["capacity"],
        vec!["verify", "--suite", "unknown"],
        vec!["capacity", "--channel", "identity", "--format", "csv"],
    ];
    for args in cases {
        assert_eq!(qfc(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn malformed_channel_file_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    // not trace preserving
    std::fs::write(&path, r#"{"name":"half","d_in":1,"d_out":1,"kraus":[[[[0.5,0.0]]]]}"#).unwrap();
    assert_eq!(qfc(&["capacity", "--channel-file", path.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&path, "{").unwrap();
    assert_eq!(qfc(&["capacity", "--channel-file", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn non_convergence_exit_3() {
    // a generic channel, so the maximally mixed start is not already optimal
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("random.json");
    std::fs::write(&path, serde_json::to_string(&random_channel(2, 2, 3, 5).unwrap().to_json()).unwrap()).unwrap();
    let file = path.to_str().unwrap();
    let out = qfc(&["capacity", "--channel-file", file, "--max-iter", "1", "--gap-tol", "1e-300"]);
    assert_eq!(out.status.code(), Some(3));
    // the report is still written
    assert!(json(&out)["C_E"].as_f64().is_some());
    assert_eq!(qfc(&["capacity", "--channel-file", file]).status.code(), Some(0));
}

#[test]
fn verify_examples() {
    let out = qfc(&["verify", "--suite", "entropic", "--trials", "50", "--seed", "42"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["suite"], "entropic");
    assert_eq!(v["failures"].as_array().unwrap().len(), 0);
    assert!(v.get("max_slack_violation").is_some());

    let out = qfc(&["verify", "--suite", "feedback", "--trials", "20"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["worst_theorem3_slack"].as_f64().unwrap() <= 1e-7);

    let out = qfc(&["verify", "--suite", "all", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["warning"].is_string());
    assert!(String::from_utf8(out.stderr).unwrap().contains("warning"));
}

#[test]
fn verify_failure_exit_1() {
    let out = qfc(&["verify", "--suite", "channel", "--trials", "3", "--tol-identity=-1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!json(&out)["failures"].as_array().unwrap().is_empty());
}

#[test]
fn simulate_feedback_examples() {
    let out = qfc(&["simulate-feedback", "--rounds", "2", "--channel", "erasure", "--param", "0.25", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["lemma1_bound_holds"], true);
    assert_eq!(v["rounds"], 2);
    for key in ["mi_per_round", "conditional_terms", "bound_slack"] {
        assert_eq!(v[key].as_array().unwrap().len(), 2, "{key}");
    }

    let v = json(&qfc(&["simulate-feedback", "--rounds", "0", "--channel", "identity"]));
    assert_eq!(v["rounds"], 0);
    assert_eq!(v["total_mi"], 0.0);
    assert!(v["mi_per_round"].as_array().unwrap().is_empty());
}

#[test]
fn budget_overflow_exit_2() {
    let out = qfc(&["simulate-feedback", "--rounds", "4", "--channel", "identity"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("65536"), "{err}");
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let args = ["sweep", "--channel", "erasure", "--param-range", "0:1:0.5"];
    let stdout = qfc(&args).stdout;
    let mut with_file = args.to_vec();
    with_file.extend(["--output", path.to_str().unwrap()]);
    let out = qfc(&with_file);
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), stdout);
}
