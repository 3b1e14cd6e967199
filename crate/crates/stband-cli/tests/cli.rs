use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn stband(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stband")).args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> (i32, Value) {
    let mut a = args.to_vec();
    a.push("--json");
    let out = stband(&a);
    let text = String::from_utf8(out.stdout).unwrap();
    let v = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}: {text}\n{}", String::from_utf8_lossy(&out.stderr)));
    (out.status.code().unwrap(), v)
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("stband-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn torus_width_is_saturated() {
    let (code, r) = report(&[
        "width",
        "--theorem",
        "torus",
        "--metric",
        r#"{"family":"TorusExtremal","params":{"w":1.0471975511965976}}"#,
        "--grid",
        "2000",
    ]);
    assert_eq!(code, 0);
    assert_eq!(r["verdict"], "saturated");
    assert_eq!(r["numbers"]["saturated"], true);
    assert!((r["numbers"]["bound"].as_f64().unwrap() - PI / 3.0).abs() < 1e-12);
}

#[test]
fn flat_lemma23_has_zero_slack() {
    let (code, r) = report(&["identity", "--which", "lemma23", "--metric", "flat", "--potential", "zero", "--grid", "100"]);
    assert_eq!(code, 0);
    assert_eq!(r["slack"].as_f64(), Some(0.0));
    assert_eq!(r["h"].as_f64(), Some(0.01));
}

#[test]
fn flat_metric_fails_ricci_hypothesis() {
    let (code, r) = report(&["width", "--theorem", "ricci", "--metric", r#"{"family":"FlatProduct","params":{"length":1}}"#]);
    assert_eq!(code, 2);
    assert_eq!(r["verdict"], "hypothesis_rejected");
    assert!(r["numbers"]["reason"].as_str().unwrap().contains("Ricci"));
}

#[test]
fn malformed_json_reports_position() {
    let out = stband(&["width", "--theorem", "ricci", "--metric", "{\"family\": \"FlatProduct\",\n \"params\": {\"length\": ]}}"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2, column"), "{err}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(stband(&["nonsense"]).status.code(), Some(1));
    assert_eq!(stband(&["width"]).status.code(), Some(1));
    assert_eq!(stband(&["waist", "--tol", "-1"]).status.code(), Some(1));
    assert_eq!(stband(&["counterexample", "--delta", "2"]).status.code(), Some(1));
    assert_eq!(stband(&["--help"]).status.code(), Some(0));
}

#[test]
fn report_schema_and_determinism() {
    let args = ["waist", "--metric", "round-s3", "--r0", "6", "--grid", "400"];
    let (code, a) = report(&args);
    let (_, mut b) = report(&args);
    assert_eq!(code, 0);
    let keys: Vec<&str> = a.as_object().unwrap().keys().map(|s| s.as_str()).collect();
    assert_eq!(keys, ["command", "config", "verdict", "numbers", "slack", "h", "runtime_ms", "version"]);
    assert!(a["version"].as_str().unwrap().starts_with("stband "));
    assert_eq!(a["config"]["metric"]["family"], "RicciWarped");
    let mut a = a;
    a["runtime_ms"] = Value::Null;
    b["runtime_ms"] = Value::Null;
    assert_eq!(a, b);
}

#[test]
fn json_output_uses_seventeen_digits() {
    let out = stband(&["bonnet-myers", "--json"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"sum\": 3.1415926535897931e0"), "{text}");
}

#[test]
fn out_csv_and_svg_files() {
    let (json, csv, svg) = (scratch("solve.json"), scratch("solve.csv"), scratch("solve.svg"));
    let out = stband(&[
        "solve",
        "--metric",
        "round-band",
        "--grid",
        "50",
        "--quiet",
        "--out",
        json.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(r["command"], "solve");
    let csv = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(csv.lines().count(), 52);
    assert!(csv.starts_with("rho,u,du,residual\n"));
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<polyline"));
}

#[test]
fn grid_solve_matches_closed_form() {
    let (code, r) = report(&["solve", "--metric", "torus", "--method", "grid", "--grid", "128"]);
    assert_eq!(code, 0);
    let n = &r["numbers"];
    assert!(n["sup_error_vs_closed_form"].as_f64().unwrap() <= n["error_bound"].as_f64().unwrap());
}

#[test]
fn every_subcommand_runs() {
    let cases: &[(&[&str], i32)] = &[
        (&["catalog"], 0),
        (&["curvature", "--metric", "torus", "--grid", "1000"], 0),
        (&["identity", "--which", "lemma33", "--metric", "round-band"], 0),
        (&["identity", "--which", "lemma71", "--metric", "upsilon", "--potential", r#"{"kind":"TwoRicciBand","params":{"h0":2}}"#], 0),
        (&["bonnet-myers"], 0),
        (&["dice"], 0),
        (&["counterexample", "--delta", "0.5"], 0),
        (&["af", "--grid", "1000"], 0),
        (&["llarull"], 0),
        (&["barrier"], 0),
        (&["gradest", "--metric", "round-band"], 0),
        (&["waist", "--r0", "7"], 2),
        (&["llarull", "--metric", r#"{"family":"RicciWarped","params":{"lambda":0.9,"radius":1}}"#], 2),
    ];
    for (args, want) in cases {
        let (code, r) = report(args);
        assert_eq!(code, *want, "{args:?}: {r}");
        assert_eq!(r["command"], args[0]);
    }
}

#[test]
fn exit_code_follows_verdict() {
    let runs: &[&[&str]] = &[
        &["identity", "--which", "lemma33", "--metric", "round-band", "--potential", r#"{"kind":"RicciBand","params":{"n":3,"h_minus":2,"h_plus":2}}"#],
        &["width", "--theorem", "two-ricci", "--metric", "upsilon", "--interval", "-0.1,0.2"],
        &["width", "--theorem", "two-ricci", "--metric", "round-band"],
        &["dice", "--metric", "round-s3", "--r0", "6"],
    ];
    for args in runs {
        let (code, r) = report(args);
        let want = match r["verdict"].as_str().unwrap() {
            "ok" | "holds" | "saturated" => 0,
            "hypothesis_rejected" => 2,
            "falsified" => 3,
            v => panic!("unknown verdict {v}"),
        };
        assert_eq!(code, want, "{args:?}");
    }
}
